"""Exception types raised by the library."""


class ModelError(ValueError):
    """Invalid physical parameters or states."""


class NumericalError(ArithmeticError):
    """A numerical kernel produced or received non-finite values."""


class SingularGramianError(NumericalError):
    """The controllability Gramian is numerically singular over the window."""

    def __init__(self, ratio: float, cutoff: float):
        self.ratio = ratio
        self.cutoff = cutoff
        super().__init__(
            f"controllability Gramian is numerically singular: "
            f"lambda_min/lambda_max = {ratio:.3e} <= {cutoff:.1e}; "
            f"the state cannot be steered over this window"
        )
