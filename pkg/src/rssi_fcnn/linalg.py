"""Dense double-precision matrix/vector helpers.

Matrices and vectors are plain ``float64`` numpy arrays of rank 2 and 1.
The helpers only add shape validation with readable errors on top of numpy.
"""

import numpy as np

from .errors import ShapeError


def as_matrix(data, rows=None, cols=None):
    """Return ``data`` as a C-contiguous float64 matrix.

    A flat sequence is reshaped row-major when ``rows`` and ``cols`` are given.
    """
    m = np.asarray(data, dtype=np.float64)
    if rows is not None and cols is not None:
        if m.size != rows * cols:
            raise ShapeError(f"data length {m.size} != rows*cols = {rows}*{cols}")
        m = m.reshape(rows, cols)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ShapeError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    return np.ascontiguousarray(m)


def as_vector(data):
    v = np.asarray(data, dtype=np.float64)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1:
        raise ShapeError(f"expected a 1-D vector, got shape {v.shape}")
    return v


def matvec(m, v):
    """Matrix-vector product ``m @ v`` with an explicit shape check."""
    m = np.asarray(m, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if m.ndim != 2 or v.ndim != 1 or m.shape[1] != v.shape[0]:
        raise ShapeError(f"matvec: matrix {m.shape} incompatible with vector {v.shape}")
    return m @ v


def affine(m, v, b):
    """``m @ v + b``."""
    b = np.asarray(b, dtype=np.float64)
    out = matvec(m, v)
    if b.shape != out.shape:
        raise ShapeError(f"affine: matrix {np.shape(m)} incompatible with bias {b.shape}")
    return out + b
