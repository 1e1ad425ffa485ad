"""Input validation helpers shared by the estimators and the functional API."""

import numbers

import numpy as np


class ContractError(ValueError):
    """Raised when an argument violates a documented precondition."""


class SignalError(ValueError):
    """Raised when a signal is degenerate (zero channel, zero gradient, ...)."""


class NumericalError(ArithmeticError):
    """Raised when a matrix operation cannot be carried out reliably."""


def check_positive(value, name, strict=True):
    if not isinstance(value, numbers.Real) or not np.isfinite(value):
        raise ContractError(f"{name} must be a finite real number, got {value!r}")
    if strict and value <= 0:
        raise ContractError(f"{name} must be > 0, got {value!r}")
    if not strict and value < 0:
        raise ContractError(f"{name} must be >= 0, got {value!r}")
    return float(value)


def check_in_unit_interval(value, name):
    value = check_positive(value, name)
    if value > 1:
        raise ContractError(f"{name} must lie in (0, 1], got {value!r}")
    return value


def check_vector(x, name, n=None, dtype=complex, nonneg=False):
    """Return ``x`` as a finite 1-D array, optionally of fixed length ``n``."""
    arr = np.asarray(x, dtype=dtype)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ContractError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ContractError(f"{name} must have length {n}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ContractError(f"{name} contains non-finite entries")
    if nonneg and np.any(arr < 0):
        raise ContractError(f"{name} must be entrywise non-negative")
    return arr


def check_same_length(a, b, name_a, name_b):
    if a.shape[0] != b.shape[0]:
        raise ContractError(
            f"{name_a} and {name_b} must have the same length, got {a.shape[0]} and {b.shape[0]}"
        )


def check_square(A, name, dtype=complex):
    arr = np.asarray(A, dtype=dtype)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ContractError(f"{name} must be a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ContractError(f"{name} contains non-finite entries")
    return arr


def check_symmetric(A, name, tol=1e-9):
    arr = check_square(A, name)
    scale = max(1.0, np.linalg.norm(arr))
    if np.linalg.norm(arr - arr.T) > tol * scale:
        raise ContractError(f"{name} must be symmetric (complex transpose-free)")
    return arr


def check_hermitian(A, name, tol=1e-10):
    arr = check_square(A, name)
    scale = max(1.0, np.linalg.norm(arr))
    if np.linalg.norm(arr - arr.conj().T) > tol * scale:
        raise ContractError(f"{name} must be Hermitian")
    return arr


def check_channels(h_I, h_R, h_D=None):
    """Validate per-subcarrier channel stacks of shape (N, M)."""
    h_I = np.asarray(h_I, dtype=complex)
    h_R = np.asarray(h_R, dtype=complex)
    if h_I.ndim == 1:
        h_I = h_I[None, :]
    if h_R.ndim == 1:
        h_R = h_R[None, :]
    if h_I.ndim != 2 or h_I.shape != h_R.shape:
        raise ContractError(
            f"h_I and h_R must be (N, M) arrays of equal shape, got {h_I.shape} and {h_R.shape}"
        )
    if not (np.all(np.isfinite(h_I)) and np.all(np.isfinite(h_R))):
        raise ContractError("channel arrays contain non-finite entries")
    if h_D is not None:
        h_D = check_vector(h_D, "h_D", n=h_I.shape[0])
    return h_I, h_R, h_D
