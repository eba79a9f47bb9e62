"""Exception hierarchy shared by the kinematics, analysis and synthesis layers."""


class PKMError(Exception):
    """Base class for every error raised by :mod:`pkmdesign`."""


class OutOfReachError(PKMError, ValueError):
    """A pose (or lattice point) has no inverse-kinematic solution."""

    def __init__(self, message, leg=None, pose=None):
        super().__init__(message)
        self.leg = leg
        self.pose = pose


class NoAssemblyError(PKMError, ValueError):
    """The actuated joints admit no closure of the loop equations."""


class ConvergenceError(PKMError, RuntimeError):
    def __init__(self, message, iterations):
        super().__init__(message)
        self.iterations = iterations


class UnsupportedOperationError(PKMError, NotImplementedError):
    pass


class InvalidConfigurationError(PKMError, ValueError):
    """Pose and joints do not satisfy the closure equations."""


class OracleInvalidError(PKMError, RuntimeError):
    """Finite differences crossed a branch boundary."""


class InfiniteFactorError(PKMError, ArithmeticError):
    """A force amplification factor is unbounded along ``direction``."""

    def __init__(self, message, direction):
        super().__init__(message)
        self.direction = direction


class DegenerateEllipsoidError(PKMError, ArithmeticError):
    pass


class InfeasibleSpecError(PKMError, ValueError):
    pass


class MechanismFileError(PKMError, ValueError):
    """Malformed mechanism description; ``field`` names the offending entry."""

    def __init__(self, message, field):
        super().__init__(f"{field}: {message}")
        self.field = field
