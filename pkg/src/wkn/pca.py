"""Principal-component projection for feature-space visualization."""

import numpy as np

__all__ = ["principal_components"]


def principal_components(features, k=2):
    """Mean-center and project onto the top-k principal directions.

    Returns (projected (N, k), components (k, D), explained_variance (k,)).
    Components are eigenvectors of the sample covariance, ordered by
    decreasing eigenvalue; each is sign-fixed so its largest-magnitude
    entry is positive.
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"expected a 2-D feature matrix, got shape {x.shape}")
    n, d = x.shape
    if not 1 <= k <= d:
        raise ValueError(f"k must be in [1, {d}], got {k}")
    centered = x - x.mean(axis=0)
    denom = max(1, n - 1)
    cov = centered.T @ centered / denom
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1][:k]
    comps = eigvecs[:, order].T.copy()
    for row in comps:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    explained = np.maximum(eigvals[order], 0.0)
    return centered @ comps.T, comps, explained
