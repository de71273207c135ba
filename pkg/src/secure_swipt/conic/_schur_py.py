"""Pure-numpy Schur-complement assembly for PSD cone blocks."""
from __future__ import annotations

import numpy as np


def schur_psd_accumulate(H: np.ndarray, data, rinv_blocks) -> None:
    """H[a, b] += <R^{-1} G_a R^{-T}, R^{-1} G_b R^{-T}> for each PSD block."""
    for cols, dense, Rinv in zip(data.block_cols, data.block_dense, rinv_blocks):
        if not len(cols):
            continue
        X = Rinv @ dense @ Rinv.T
        M = X.reshape(len(cols), -1)
        H[np.ix_(cols, cols)] += M @ M.T
