"""Exception types shared across modules; the CLI maps them to exit codes."""


class InputError(ValueError):
    """Bad argument, dimension mismatch or violated precondition."""


class RangeError(InputError):
    """Value outside a tabulated range."""


class NumericError(RuntimeError):
    """A numerical routine could not certify its answer."""


class SearchRadiusError(NumericError):
    """Optimizer landed on the boundary of its search region."""


class DegenerateModelError(NumericError):
    """Every sampled pair was below the degeneracy floor."""
