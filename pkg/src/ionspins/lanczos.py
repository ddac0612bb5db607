"""Block Krylov eigensolver for the lowest eigenpairs of a symmetric operator.

A block of deterministic random start vectors is expanded with operator
applications and kept orthonormal by full reorthogonalization at every step;
Rayleigh-Ritz extraction on the accumulated basis yields the extremal
eigenpairs.  The block form resolves (near-)degenerate multiplets up to the
block size, which plain single-vector Lanczos silently collapses; the fixed
seed makes runs reproducible bit for bit.
"""

from __future__ import annotations

import numpy as np

DEFAULT_SEED = 0x5EED


class NoConvergence(RuntimeError):
    """Eigensolver failed to meet the residual bound within its basis budget."""


def lowest_eigenpairs(matvec, dim, k, tol=1e-10, max_basis=None, seed=DEFAULT_SEED):
    """Return (eigenvalues, eigenvectors) for the k lowest eigenpairs.

    Args:
        matvec: callable applying the symmetric operator to a length-dim vector.
        dim: operator dimension.
        k: number of lowest eigenpairs requested.
        tol: residual bound ||Av - ev|| <= tol * max(1, |e|) per pair.
        max_basis: Krylov basis cap (default min(dim, max(60 * k, 400))).
        seed: start-block seed; fixed by default for reproducibility.
    """
    if k < 1 or k > dim:
        raise ValueError(f"k must lie in [1, {dim}]")
    if max_basis is None:
        max_basis = min(dim, max(60 * k, 400))
    max_basis = min(max_basis, dim)
    block = min(max(k, 2), dim)
    rng = np.random.default_rng(seed)

    basis = np.zeros((dim, max_basis))
    a_basis = np.zeros((dim, max_basis))
    proj = np.zeros((max_basis, max_basis))
    m = 0
    blk = _orthonormal_block(rng, basis, 0, block)
    best_resid = np.inf
    while m < max_basis:
        b = min(blk.shape[1], max_basis - m)
        basis[:, m : m + b] = blk[:, :b]
        for i in range(b):
            a_basis[:, m + i] = matvec(basis[:, m + i])
        # grow the projected matrix incrementally and keep it exactly symmetric
        new = slice(m, m + b)
        old = slice(0, m + b)
        cross = basis[:, old].T @ a_basis[:, new]
        proj[old, new] = cross
        proj[new, old] = cross.T
        d = basis[:, new].T @ a_basis[:, new]
        proj[new, new] = 0.5 * (d + d.T)
        m += b

        theta, ritz = np.linalg.eigh(proj[:m, :m])
        theta, ritz = theta[:k], ritz[:, :k]
        vectors = basis[:, :m] @ ritz
        resid = np.linalg.norm(a_basis[:, :m] @ ritz - vectors * theta, axis=0)
        best_resid = min(best_resid, float(np.max(resid)))
        if np.all(resid <= tol * np.maximum(1.0, np.abs(theta))) or m >= dim:
            order = np.argsort(theta)
            return theta[order], vectors[:, order]

        # classical block Lanczos step: next block from the image of the last
        width = min(block, max_basis - m)
        if width == 0:
            break
        w = a_basis[:, m - b : m][:, :width].copy()
        for _ in range(2):
            w -= basis[:, :m] @ (basis[:, :m].T @ w)
        blk = _repair_block(rng, basis, m, w)

    raise NoConvergence(
        f"block Krylov solver hit the basis cap {max_basis}; best residual {best_resid:.3e}"
    )


def _orthonormal_block(rng, basis, m, width):
    """Deterministic random block, orthonormal and orthogonal to basis[:, :m]."""
    w = rng.standard_normal((basis.shape[0], width))
    for _ in range(2):
        if m > 0:
            w -= basis[:, :m] @ (basis[:, :m].T @ w)
    return _repair_block(rng, basis, m, w)


def _repair_block(rng, basis, m, w):
    """QR-orthonormalize a block, replacing rank-deficient columns."""
    q, r = np.linalg.qr(w)
    scale = max(1.0, float(np.max(np.abs(r))))
    for i in range(q.shape[1]):
        if abs(r[i, i]) <= 1e-10 * scale:
            for _ in range(40):
                v = rng.standard_normal(basis.shape[0])
                if m > 0:
                    v -= basis[:, :m] @ (basis[:, :m].T @ v)
                v -= q[:, :i] @ (q[:, :i].T @ v)
                norm = np.linalg.norm(v)
                if norm > 1e-8:
                    q[:, i] = v / norm
                    break
            else:
                raise NoConvergence("could not draw a vector outside the current subspace")
    # one more sweep against the basis for safety
    if m > 0:
        q -= basis[:, :m] @ (basis[:, :m].T @ q)
        q, _ = np.linalg.qr(q)
    return q
