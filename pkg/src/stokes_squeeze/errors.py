"""Exception types shared across the package."""


class SpecError(ValueError):
    """Malformed or inconsistent input (state specs, mixtures, CLI arguments)."""


class NumericalSafetyError(ArithmeticError):
    """A computation was refused because truncation or degeneracy would make it unreliable."""


class QUndefinedError(NumericalSafetyError):
    """Mandel's Q requested for a state with (numerically) zero mean photon number."""
