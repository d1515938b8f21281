"""Exception hierarchy shared by every module."""


class KResultantError(ValueError):
    """Base class; all library errors are ``ValueError`` subclasses."""


class CharTwo(KResultantError):
    pass


class NotPrime(KResultantError):
    pass


class TooLarge(KResultantError):
    pass


class TrivialTwist(KResultantError):
    pass


class DimensionMismatch(KResultantError):
    pass


class SizeMismatch(KResultantError):
    pass


class BadSpec(KResultantError):
    """A point-set generator string could not be parsed or built."""


class OddDimension(KResultantError):
    pass


class MissingSphere(KResultantError):
    pass


class EmptySphere(KResultantError):
    pass


class ZeroRadius(KResultantError):
    pass


class RoundingOverflow(KResultantError):
    """A convolution value was too far from an integer to round safely."""


class DegenerateSet(KResultantError):
    pass


class BadDimension(KResultantError):
    pass


class HypothesisFail(KResultantError):
    """The hypotheses of an estimate are not met; the message names which."""


class ConfigInvalid(KResultantError):
    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
