"""Exception types raised across the package."""


class MdpError(ValueError):
    """Base class for invalid environments or mismatched inputs."""


class NonStochasticRow(MdpError):
    def __init__(self, x: int, a: int, rowsum: float):
        super().__init__(f"transition row P[{x}][{a}] sums to {rowsum!r}, not 1")
        self.x, self.a, self.rowsum = x, a, rowsum


class NegativeProbability(MdpError):
    pass


class BadInitialState(MdpError):
    pass


class ShapeMismatch(MdpError):
    pass


class TooLarge(ValueError):
    """Brute-force enumeration refused because the policy space is too big."""


class InfeasibleParams(ValueError):
    pass


class EmptyMixture(ValueError):
    pass
