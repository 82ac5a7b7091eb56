"""Exception hierarchy shared by all simulator modules."""


class HvqsimError(Exception):
    """Base class for every error raised by the package."""


class ContractError(HvqsimError, ValueError):
    """An input violates an operation's precondition or type invariant."""


class DegenerateStateError(ContractError):
    pass


class CapacityError(ContractError):
    pass


class SlownessViolation(ContractError):
    """Phase correlation time is too short relative to the carrier period."""


class TransientRegionError(ContractError):
    pass


class UnstableModeError(ContractError):
    pass


class StepSizeError(ContractError):
    pass


class ConfigError(HvqsimError, ValueError):
    pass


class StatisticalCheckError(HvqsimError):
    """A generation-time statistical self-check failed."""
