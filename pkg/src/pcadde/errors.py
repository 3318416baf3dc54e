"""Error types shared across the package."""


class NumericOverflowError(RuntimeError):
    """A marching scheme produced a non-finite value; message names the step."""


class FitError(RuntimeError):
    """An empirical fit is degenerate (zero data, non-decaying trial, ...)."""
