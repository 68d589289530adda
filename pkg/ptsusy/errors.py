"""
Exception hierarchy shared by every ptsusy module.
"""


class PtsusyError(Exception):
    """
    Base class of every error raised on purpose by ptsusy.
    """


class ConfigError(PtsusyError, ValueError):
    """
    Invalid run configuration, command-line usage or config file.
    """


class ParameterError(PtsusyError, ValueError):
    """
    Invalid model or grid parameters.
    """


class ConstraintError(PtsusyError, ValueError):
    """
    A user-supplied b(x) cannot produce a real partner potential: it vanishes
    on the check grid or its derivatives are inconsistent.
    """


class SolverError(PtsusyError, RuntimeError):
    """
    Eigensolver failure. 'index' names the eigenvalue or seed that failed,
    when known.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class HypergeometricError(PtsusyError, ArithmeticError):
    """
    Gauss hypergeometric evaluation failed (pole in c, or the series did not
    converge).
    """


class NormalizationError(PtsusyError, ArithmeticError):
    """
    A wavefunction could not be normalized.
    """


class IntertwiningError(PtsusyError, ValueError):
    """
    The input to the intertwining operator is not an eigenfunction of H2.
    """
