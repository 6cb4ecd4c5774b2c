"""Batch-means effective sample size."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError

MONITORED = ("beta", "sigma2_d", "sigma2_p", "transition")


@dataclass
class ESSResult:
    ess: np.ndarray
    degenerate: np.ndarray

    @property
    def any_degenerate(self) -> bool:
        return bool(self.degenerate.any())


def batch_means_ess(chain) -> ESSResult:
    """ESS per column of an ``(L, k)`` (or ``(L,)``) chain.

    Batch size is ``floor(sqrt(L))``. Columns with zero variance are
    reported with ESS 0 and flagged as degenerate.
    """
    x = np.asarray(chain, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    x = x.reshape(x.shape[0], -1)
    L = x.shape[0]
    if L < 100:
        raise DataError(f"ESS needs at least 100 draws, got {L}")
    b = int(np.floor(np.sqrt(L)))
    a = L // b
    trimmed = x[:a * b]
    var = x.var(axis=0, ddof=1)
    means = trimmed.reshape(a, b, -1).mean(axis=1)
    sigma2_bm = b * means.var(axis=0, ddof=1)
    degenerate = ~(var > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ess = np.where(degenerate, 0.0, L * var / np.where(sigma2_bm > 0, sigma2_bm, np.inf))
    return ESSResult(ess, degenerate)


def effective_sample_size(samples, block: str) -> ESSResult:
    """Batch-means ESS for every scalar coordinate of a monitored block."""
    if block not in MONITORED:
        raise DataError(f"ESS is reported for {MONITORED}, not {block!r}")
    return batch_means_ess(samples.draws[block])
