"""Exception types shared across the package."""


class HHLError(Exception):
    pass


class DimMismatch(HHLError, ValueError):
    pass


class NotHermitian(HHLError, ValueError):
    pass


class NoConvergence(HHLError, RuntimeError):
    pass


class SizeOverflow(HHLError, ValueError):
    pass


class SingularMatrix(HHLError, ValueError):
    pass


class NotPositiveDefinite(HHLError, ValueError):
    pass


class CTooLarge(HHLError, ValueError):
    """Rotation constant exceeds the smallest eigenvalue."""


class ZeroSuccessProbability(HHLError, ZeroDivisionError):
    pass


class EncodingOverflow(HHLError, ValueError):
    """An eigenvalue does not fit in the clock register."""


class UncomputeLeak(HHLError, RuntimeError):
    """Clock register was not returned to |0...0>."""


class IndexOutOfRange(HHLError, IndexError):
    pass


class NotPauliString(HHLError, TypeError):
    pass


class EmptyBranch(HHLError, LookupError):
    def __init__(self, branch):
        super().__init__(f"no shots landed in ancilla branch {branch}")
        self.branch = branch


class NotPowerOfTwo(HHLError, ValueError):
    pass


class NotUnitary(HHLError, ValueError):
    pass


class ParseError(HHLError, ValueError):
    pass
