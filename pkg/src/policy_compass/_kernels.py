"""Hot numeric paths shared by aggregation and robustness diagnostics.

Two implementations of each kernel are kept side by side: a numba-jitted
loop and a vectorized pure-numpy fallback.  Selection happens once at import
time via the ``POLICY_COMPASS_NUMBA`` environment variable:

* unset / ``auto`` -- use numba when it imports, else numpy;
* ``0`` / ``false`` / ``off`` -- force the numpy path;
* ``1`` / ``true`` / ``on`` -- require numba, raising if unavailable.

Both variants of a kernel compute the same quantities; ``benchmarks/``
contains a script timing one against the other.  Kernel inputs are plain
arrays (quality codes 0/1/2, absolute angles in degrees, raw lengths) so the
jitted code never touches Python objects.
"""
from __future__ import annotations

import os

import numpy as np

_FALSE_VALUES = ("0", "false", "no", "off")
_TRUE_VALUES = ("1", "true", "yes", "on")


def _requested_backend() -> bool | None:
    raw = os.environ.get("POLICY_COMPASS_NUMBA", "").strip().lower()
    if raw in _FALSE_VALUES:
        return False
    if raw in _TRUE_VALUES:
        return True
    return None  # auto


def sector_components_numpy(
    qcodes: np.ndarray, angles_deg: np.ndarray, lengths: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Per-quality sum of corrected-length unit vectors.

    Returns ``(vectors, counts)`` where ``vectors`` is (3, 2) and row q is
    the sum over quality-q rows of ``log2(1 + length) / count_q`` times the
    unit vector of the absolute angle.  Input order is preserved; callers
    pass rows sorted by indicator id for reproducibility.
    """
    rad = np.radians(angles_deg)
    counts = np.bincount(qcodes, minlength=3).astype(np.int64)
    corrected = np.log2(1.0 + lengths)
    divisors = np.maximum(counts[qcodes], 1)
    corrected = corrected / divisors
    ux = corrected * np.cos(rad)
    uy = corrected * np.sin(rad)
    vectors = np.zeros((3, 2), dtype=np.float64)
    for q in range(3):
        mask = qcodes == q
        if counts[q]:
            vectors[q, 0] = np.add.reduce(ux[mask])
            vectors[q, 1] = np.add.reduce(uy[mask])
    return vectors, counts


def prefix_components_numpy(
    qcodes: np.ndarray, angles_deg: np.ndarray, lengths: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Sector vectors after every prefix of a stream.

    Returns ``(traces, counts)`` with shapes (n, 3, 2) and (n, 3); entry
    ``traces[k, q]`` is quality q's sector vector over the first k+1 rows.
    The running division uses sum-then-divide, which matches the per-term
    form up to float associativity.
    """
    n = len(qcodes)
    rad = np.radians(angles_deg)
    f = np.log2(1.0 + lengths)
    ux = f * np.cos(rad)
    uy = f * np.sin(rad)
    traces = np.zeros((n, 3, 2), dtype=np.float64)
    counts = np.zeros((n, 3), dtype=np.int64)
    for q in range(3):
        mask = qcodes == q
        cx = np.cumsum(np.where(mask, ux, 0.0))
        cy = np.cumsum(np.where(mask, uy, 0.0))
        cnt = np.cumsum(mask)
        safe = np.maximum(cnt, 1)
        traces[:, q, 0] = np.where(cnt > 0, cx / safe, 0.0)
        traces[:, q, 1] = np.where(cnt > 0, cy / safe, 0.0)
        counts[:, q] = cnt
    return traces, counts


_requested = _requested_backend()
HAVE_NUMBA = False
if _requested is not False:
    try:
        from numba import njit

        HAVE_NUMBA = True
    except ImportError:
        if _requested is True:
            raise ImportError(
                "POLICY_COMPASS_NUMBA requested the numba backend "
                "but numba is not importable"
            )

if HAVE_NUMBA:

    @njit(cache=True)
    def sector_components_numba(qcodes, angles_deg, lengths):  # pragma: no cover
        counts = np.zeros(3, dtype=np.int64)
        for i in range(qcodes.shape[0]):
            counts[qcodes[i]] += 1
        vectors = np.zeros((3, 2), dtype=np.float64)
        for i in range(qcodes.shape[0]):
            q = qcodes[i]
            term = np.log2(1.0 + lengths[i]) / counts[q]
            rad = np.radians(angles_deg[i])
            vectors[q, 0] += term * np.cos(rad)
            vectors[q, 1] += term * np.sin(rad)
        return vectors, counts

    @njit(cache=True)
    def prefix_components_numba(qcodes, angles_deg, lengths):  # pragma: no cover
        n = qcodes.shape[0]
        traces = np.zeros((n, 3, 2), dtype=np.float64)
        counts = np.zeros((n, 3), dtype=np.int64)
        sums = np.zeros((3, 2), dtype=np.float64)
        running = np.zeros(3, dtype=np.int64)
        for i in range(n):
            q = qcodes[i]
            f = np.log2(1.0 + lengths[i])
            rad = np.radians(angles_deg[i])
            sums[q, 0] += f * np.cos(rad)
            sums[q, 1] += f * np.sin(rad)
            running[q] += 1
            for j in range(3):
                counts[i, j] = running[j]
                if running[j] > 0:
                    traces[i, j, 0] = sums[j, 0] / running[j]
                    traces[i, j, 1] = sums[j, 1] / running[j]
        return traces, counts

    BACKEND = "numba"
    sector_components = sector_components_numba
    prefix_components = prefix_components_numba
else:
    BACKEND = "numpy"
    sector_components = sector_components_numpy
    prefix_components = prefix_components_numpy


def as_kernel_arrays(
    qcodes: "list[int] | np.ndarray",
    angles_deg: "list[float] | np.ndarray",
    lengths: "list[float] | np.ndarray",
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Coerce indicator rows to the dtypes the kernels are compiled for."""
    return (
        np.asarray(qcodes, dtype=np.int64),
        np.asarray(angles_deg, dtype=np.float64),
        np.asarray(lengths, dtype=np.float64),
    )
