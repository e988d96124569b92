"""Exception types shared across the package."""


class BanachReduceError(Exception):
    """Base class for all package errors."""


class EmptySpectrum(BanachReduceError):
    pass


class OwnerMismatch(BanachReduceError):
    pass


class DimensionMismatch(BanachReduceError):
    pass


class NotInvertible(BanachReduceError):
    def __init__(self, min_modulus, where=None):
        self.min_modulus = float(min_modulus)
        self.where = where
        super().__init__(f"element not invertible: min modulus {self.min_modulus:.3e} at {where}")


class NotInvertibleTuple(BanachReduceError):
    def __init__(self, min_modulus, where=None):
        self.min_modulus = float(min_modulus)
        self.where = where
        super().__init__(f"tuple not invertible: min joint modulus {self.min_modulus:.3e} at {where}")


class NonPositiveValue(BanachReduceError):
    pass


class LogObstruction(BanachReduceError):
    """No continuous logarithm branch exists.

    ``windings`` is a list of (hole_id, winding) pairs; for the circle
    algebra it is [(0, total_winding)].
    """

    def __init__(self, windings, message=None):
        self.windings = list(windings)
        super().__init__(message or f"no continuous log branch: windings {self.windings}")


class ResolutionError(BanachReduceError):
    """The grid is too coarse to certify the requested quantity."""


class NotSubset(BanachReduceError):
    pass


class EmptySource(BanachReduceError):
    pass


class NotUnipotent(BanachReduceError):
    def __init__(self, power, residual):
        self.power = power
        self.residual = float(residual)
        super().__init__(f"matrix not unipotent: ||N^{power}|| = {self.residual:.3e}")


class NotNearIdentity(BanachReduceError):
    def __init__(self, norm):
        self.norm = float(norm)
        super().__init__(f"||M - I|| = {self.norm:.3e} >= 1")


class NotSpecialOrthogonal(BanachReduceError):
    pass


class SingularS(BanachReduceError):
    pass


class ScopeError(BanachReduceError):
    """Constructive path unsupported for this (field, n, dimension) combination.

    ``decision`` optionally carries the hole-condition decision that is still
    available in decision-only mode.
    """

    def __init__(self, message, decision=None):
        self.decision = decision
        super().__init__(message)


class HoleConditionViolated(BanachReduceError):
    def __init__(self, hole_id, winding=None):
        self.hole_id = hole_id
        self.winding = winding
        super().__init__(f"hole {hole_id} lies inside the target set with winding {winding}")


class InvalidWitness(BanachReduceError):
    pass


class PathLeavesInvertibleSet(BanachReduceError):
    def __init__(self, t, min_modulus):
        self.t = float(t)
        self.min_modulus = float(min_modulus)
        super().__init__(f"path leaves invertible set at t={self.t:.4f} (min modulus {self.min_modulus:.3e})")


class ExprSyntaxError(BanachReduceError):
    def __init__(self, offset, expected, message=None):
        self.offset = offset
        self.expected = expected
        super().__init__(message or f"syntax error at offset {offset}: expected {expected}")


class ManifestError(BanachReduceError):
    pass
