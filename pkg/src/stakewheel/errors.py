"""Exception types shared across the package."""


class StakewheelError(Exception):
    """Base class for errors raised by this package."""


class EmptyTableError(StakewheelError):
    """A stake table or registry snapshot has no peers."""


class ZeroTotalError(StakewheelError):
    """Every stake is zero, so no peer is selectable."""


class OutOfRangeError(StakewheelError):
    """An index or draw argument lies outside its valid range."""


class AttemptCapExceededError(StakewheelError):
    """A rejection loop hit its attempt cap.

    Selection over any sane table succeeds within a handful of attempts;
    hitting the cap signals a pathological configuration (for example a
    fanout larger than the number of selectable peers) rather than bad luck.
    """


class StakeOverflowError(StakewheelError):
    """A stake or stake total exceeds the supported integer width."""


class LengthMismatchError(StakewheelError):
    """Observed and expected sequences do not line up."""


class InvalidExpectedError(StakewheelError):
    """Expected probabilities do not form a distribution."""


class ZeroSampleError(StakewheelError):
    """A statistic was requested over an empty sample."""


class ImpossibleObservationError(StakewheelError):
    """Nonzero observations fell in a zero-probability category."""


class ConfigError(StakewheelError, ValueError):
    """A configuration file failed validation.

    ``messages`` holds one human-readable line per offending field.
    """

    def __init__(self, messages):
        if isinstance(messages, str):
            messages = [messages]
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))
