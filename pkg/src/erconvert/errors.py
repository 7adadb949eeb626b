"""Exception hierarchy shared by all erconvert modules."""


class ErconvertError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(ErconvertError):
    """Bad input document. The CLI maps this family to exit code 2."""


class UnitError(ConfigError):
    """A value is missing its unit annotation or carries one we do not accept."""


class InvariantError(ConfigError):
    """A validated type would violate one of its invariants.

    ``invariant`` names the rule, ``field`` the offending field.
    """

    def __init__(self, invariant: str, field: str, detail: str = ""):
        self.invariant = invariant
        self.field = field
        msg = f"{invariant}: {field}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class NumericalError(ErconvertError):
    """Numerical failure. The CLI maps this family to exit code 3."""


class ConvergenceError(NumericalError):
    def __init__(self, message: str, achieved_error: float = float("nan")):
        self.achieved_error = achieved_error
        super().__init__(f"{message} (achieved error {achieved_error:.3e})")


class SingularAtom(NumericalError):
    def __init__(self, index: int):
        self.index = index
        super().__init__(f"atom {index}: delta_o*delta_mu equals |Omega|^2 to machine precision")


class NoHalfPoint(NumericalError):
    pass


class GeometryError(ConfigError):
    pass


class CoverageError(GeometryError):
    pass


class SizeError(ConfigError):
    pass


class SingularBlock(NumericalError):
    pass


class IdentificationError(NumericalError):
    pass


class RangeError(ConfigError):
    pass
