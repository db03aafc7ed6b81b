"""Exception hierarchy shared by the solvers and the CLI."""


class SelfTrapError(Exception):
    """Base class for all library errors."""


class InvalidParameterError(SelfTrapError, ValueError):
    pass


class SolverError(SelfTrapError):
    """Numerical failure: no equilibrium, unstable trap, integrator breakdown."""


class NoEquilibriumError(SolverError):
    pass


class AmbiguousEquilibriumError(SolverError):
    """Raised in strict mode when the force balance has several roots.

    ``roots`` holds every root found, ``chosen`` the deepest trap among them.
    """

    def __init__(self, message, roots, chosen=None):
        super().__init__(message)
        self.roots = tuple(roots)
        self.chosen = chosen


class UnstableEquilibriumError(SolverError):
    pass


class StiffnessError(SolverError):
    pass


class DivergenceError(SolverError):
    def __init__(self, message, last_good_time):
        super().__init__(message)
        self.last_good_time = last_good_time


class FitRejectedError(SelfTrapError):
    pass
