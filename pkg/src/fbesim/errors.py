"""Exception types shared across the package."""


class FbeError(Exception):
    """Base class for all errors raised by this package."""


class ScenarioValidationError(FbeError):
    """A scenario violates a structural or timing constraint."""


class CotTooLarge(ScenarioValidationError):
    """Channel occupancy time exceeds 95% of the frame period."""


class IdleTooShort(ScenarioValidationError):
    """Idle period is below max(5% of the period, 100 us)."""


class InfeasibleIdlePeriod(ScenarioValidationError):
    """Idle period cannot host the staggered CCA slots of all transmitters."""


class NonDivisiblePeriod(ScenarioValidationError):
    """Frame period is not divisible by the configuration count in whole us."""


class DuplicatePriority(ScenarioValidationError):
    """Two transmitters share a priority rank."""


class PeriodNotAllowed(ScenarioValidationError):
    """Frame period outside the regulatory set of allowed durations."""


class CcaWindowOverlap(ScenarioValidationError):
    """Two CCA observation windows in the system would overlap in time."""


class PrioritySpanExceedsCot(ScenarioValidationError):
    """Priority offsets push a CCA slot past the higher-priority occupancy span."""


class ConfigFileError(FbeError):
    """Scenario config file is malformed or contains unknown keys."""


class NoConvergence(FbeError):
    """Root bracketing failed; cannot happen for valid probability inputs."""


class MixedScenario(FbeError):
    """Attempted to merge results from non-identical scenarios."""


class EmptySeries(FbeError):
    """No rows selected for a plot series."""


class SimulationIntegrityError(FbeError):
    """The simulator reached a state that validated geometry forbids."""
