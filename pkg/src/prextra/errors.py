"""Exception types shared across the package."""


class SimulationError(Exception):
    """Base class for failures that abort a run."""


class RankDeficientError(SimulationError):
    """Nearest-point projection is not unique (input nearly rank deficient)."""


class ZeroDirectionError(SimulationError):
    """A direction-dependent quantity was requested for a zero direction."""


class NoConvergenceError(SimulationError):
    """An inner solver exhausted its iteration budget above tolerance."""


class DegenerateSampleError(SimulationError):
    """A random draw failed a well-posedness check and could not be repaired."""


class IndivisibleRowsError(SimulationError):
    """Row count does not split evenly across the requested node count."""


class MismatchedInstancesError(SimulationError):
    """Configs meant to share one problem instance describe different ones."""


class InsufficientDataError(SimulationError):
    """Too few trajectory points inside the requested fit window."""


class ConfigError(SimulationError):
    """A run configuration is malformed or contains unknown keys."""
