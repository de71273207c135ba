"""Backend selection for the Schur-complement hot loop.

The compiled extension is used when it was built; set the environment
variable ``SECURE_SWIPT_PURE_PYTHON=1`` to force the numpy fallback.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _schur_py
from .cones import ConeDims, smat

try:
    if os.environ.get("SECURE_SWIPT_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-python backend requested")
    from . import _schur as _compiled
except ImportError:
    _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"


@dataclass
class PsdSchurData:
    """Column structure of the PSD rows of G, in two representations."""

    block_n: list
    block_cols: list      # global column indices active in each block
    block_dense: list     # (ncols, n, n) symmetric column matrices
    # flattened triplet form for the compiled kernel
    nsize: np.ndarray
    cptr: np.ndarray
    colidx: np.ndarray
    tptr: np.ndarray
    trow: np.ndarray
    tcol: np.ndarray
    tval: np.ndarray

    @classmethod
    def from_matrix(cls, G: np.ndarray, dims: ConeDims) -> "PsdSchurData":
        block_n, block_cols, block_dense = [], [], []
        cptr, colidx, tptr, trow, tcol, tval = [0], [], [0], [], [], []
        for n, off in zip(dims.s, dims.psd_offsets):
            rows = G[off: off + n * (n + 1) // 2]
            cols = np.flatnonzero(np.any(rows != 0.0, axis=0))
            dense = smat(rows[:, cols].T, n)
            block_n.append(n)
            block_cols.append(cols)
            block_dense.append(dense)
            for a, col in enumerate(cols):
                r, c = np.nonzero(dense[a])
                trow.extend(r)
                tcol.extend(c)
                tval.extend(dense[a][r, c])
                tptr.append(len(tval))
                colidx.append(col)
            cptr.append(len(colidx))
        ip = np.intp
        return cls(
            block_n, block_cols, block_dense,
            np.asarray(block_n, dtype=ip), np.asarray(cptr, dtype=ip),
            np.asarray(colidx, dtype=ip), np.asarray(tptr, dtype=ip),
            np.asarray(trow, dtype=ip), np.asarray(tcol, dtype=ip),
            np.asarray(tval, dtype=float),
        )


def schur_psd_accumulate(H: np.ndarray, data: PsdSchurData, rinv_blocks, backend: str | None = None) -> None:
    """Add the PSD-block part of G^T W^{-1} W^{-T} G into ``H`` in place."""
    backend = backend or BACKEND
    if backend == "python" or not data.block_n:
        _schur_py.schur_psd_accumulate(H, data, rinv_blocks)
        return
    if _compiled is None:
        raise RuntimeError("compiled kernel is not available")
    P_parts = [Ri.T @ Ri for Ri in rinv_blocks]
    p_off = np.cumsum([0] + [p.size for p in P_parts[:-1]]).astype(np.intp)
    P = np.concatenate([p.ravel() for p in P_parts]) if P_parts else np.zeros(0)
    _compiled.schur_psd_accumulate(
        H, np.ascontiguousarray(P), p_off, data.nsize, data.cptr, data.colidx,
        data.tptr, data.trow, data.tcol, data.tval,
    )
