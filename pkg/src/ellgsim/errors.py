"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid or inconsistent simulation configuration."""


class MeshError(ValueError):
    """Invalid mesh input or failed mesh construction."""


class SolverError(RuntimeError):
    """A linear solve failed (breakdown, singularity, or non-convergence)."""


class InvariantViolation(RuntimeError):
    """A runtime invariant of the integrator was breached."""
