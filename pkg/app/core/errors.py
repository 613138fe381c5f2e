# app/core/errors.py
from __future__ import annotations


class DoaLabError(Exception):
    """Base class for every error raised by the lab."""


class ParameterError(DoaLabError, ValueError):
    pass


class NotHermitianError(ParameterError):
    pass


class DegenerateInputError(DoaLabError, ValueError):
    pass


class SingularMatrixError(DoaLabError, ArithmeticError):
    """
    Raised when a scatter estimate cannot be inverted. The message suggests the
    usual remedies (another estimator or more snapshots than sensors).
    """

    def __init__(self, detail: str = ""):
        msg = "scatter matrix is singular"
        if detail:
            msg += f" ({detail})"
        msg += "; use more snapshots than sensors or switch estimator (sample/flom/sscm)"
        super().__init__(msg)


class ContractViolation(DoaLabError, RuntimeError):
    pass


class ConfigError(DoaLabError, ValueError):
    pass
