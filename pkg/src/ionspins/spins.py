"""Ising spin network over the 2^N computational basis.

A configuration is stored as an integer whose N-bit binary string reads ions
1..N from left to right: ion n occupies bit (N - n), bit value 0 means spin up
(z = +1) and 1 means spin down (z = -1).  The Hamiltonian acts as

    H = sum_{m<n} 2 J_mn sigma^z_m sigma^z_n - B sum_n sigma^x_n

i.e. the zz part is the full ordered double sum of the coupling matrix (the
diagonal self-energy is dropped), and the transverse field points along +x so
that a strong field polarizes the chain to <sigma^x> = +1.  B is accepted in
units of Jbar; a zero coupling matrix has Jbar = 0 and the field is then in
bare coupling units.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lanczos

_ENUM_CHUNK = 1 << 18


class AmbiguousGround(RuntimeError):
    """Distinct spin orders tie for the classical minimum (an exact crossing)."""

    def __init__(self, orders, energy):
        self.orders = tuple(sorted(orders, key=lambda o: o.canonical))
        self.energy = energy
        names = ", ".join(o.bits for o in self.orders)
        super().__init__(f"degenerate classical minimum across orders {{{names}}}")


@dataclass(frozen=True)
class SpinOrder:
    """Canonical representative of a configuration under global flip and reflection."""

    canonical: int
    n_ions: int
    degeneracy: int

    @property
    def bits(self):
        return format(self.canonical, f"0{self.n_ions}b")


@dataclass(frozen=True)
class GroundState:
    """Classical ground order, its energy, and the full minimizing orbit."""

    order: SpinOrder
    energy: float
    configs: tuple


@dataclass(frozen=True)
class SpectrumResult:
    """Lowest eigenpairs of the spin Hamiltonian plus solver provenance."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    n_ions: int
    b_field: float
    b_abs: float
    method: str
    residuals: np.ndarray


def bits_to_index(bits):
    """Parse a binary string (ions left to right) into a basis index."""
    return int(bits, 2)


def index_to_bits(s, n_ions):
    return format(s, f"0{n_ions}b")


def flip_all(s, n_ions):
    """Global spin flip."""
    return s ^ ((1 << n_ions) - 1)


def reverse_bits(s, n_ions):
    """Chain reflection: ion n -> N + 1 - n."""
    r = 0
    for _ in range(n_ions):
        r = (r << 1) | (s & 1)
        s >>= 1
    return r


def orbit(s, n_ions):
    """Symmetry orbit {s, flip, reverse, flip(reverse)} sorted ascending."""
    r = reverse_bits(s, n_ions)
    return tuple(sorted({s, flip_all(s, n_ions), r, flip_all(r, n_ions)}))


def canonicalize(s, n_ions):
    """Smallest orbit member and the orbit size (2 for reflection-symmetric orders)."""
    members = orbit(s, n_ions)
    return SpinOrder(canonical=members[0], n_ions=n_ions, degeneracy=len(members))


def fm_basis(n_ions):
    """The two ferromagnetic configurations."""
    return (0, (1 << n_ions) - 1)


def kink_basis(n_ions):
    """The four single-domain-wall configurations of an odd chain.

    The wall sits between ions (N-1)/2 and (N+1)/2 counted from either end,
    giving blocks of length a = (N+1)/2 and b = (N-1)/2 in both orders plus
    their global flips.
    """
    if n_ions % 2 == 0 or n_ions < 3:
        raise ValueError("kink basis is defined for odd chains of at least 3 ions")
    a = (n_ions + 1) // 2
    b = n_ions - a
    strings = ("0" * a + "1" * b, "0" * b + "1" * a, "1" * a + "0" * b, "1" * b + "0" * a)
    return tuple(sorted(int(x, 2) for x in strings))


def hamming_distance(a, b, n_ions):
    """Differing spin count, minimized over the global flip of one argument."""
    direct = (a ^ b).bit_count()
    flipped = (a ^ flip_all(b, n_ions)).bit_count()
    return min(direct, flipped)


def _signs(indices, n_ions):
    """(len, N) array of z values: column n holds the spin of ion n+1."""
    shifts = np.arange(n_ions - 1, -1, -1, dtype=np.int64)
    return 1.0 - 2.0 * ((indices[:, None] >> shifts) & 1)


def classical_energy(coupling, s):
    """Ising energy of one configuration: z . J . z."""
    z = _signs(np.array([s], dtype=np.int64), coupling.n_ions)[0]
    return float(z @ coupling.j @ z)


def classical_energies(coupling, half=False):
    """Ising energies of every basis configuration.

    With half=True only indices with ion 1 up are enumerated (the other half
    is the global-flip mirror with identical energies).
    """
    n = coupling.n_ions
    jm = coupling.j
    dim = 1 << (n - 1 if half else n)
    out = np.empty(dim)
    for lo in range(0, dim, _ENUM_CHUNK):
        idx = np.arange(lo, min(lo + _ENUM_CHUNK, dim), dtype=np.int64)
        z = _signs(idx, n)
        out[lo : lo + len(idx)] = np.einsum("si,si->s", z @ jm, z)
    return out


def classical_ground(coupling, tie_rtol=1e-10):
    """Exhaustive classical minimum over the Z2-reduced half basis.

    Returns the canonical order, energy and the full minimizing orbit.
    Raises AmbiguousGround when configurations from distinct orders tie within
    tie_rtol * max(1, |E_min|) - the signature of an exact level crossing.
    """
    n = coupling.n_ions
    if n > 24:
        raise ValueError("exhaustive scan budget is N <= 24")
    e = classical_energies(coupling, half=True)
    emin = float(np.min(e))
    winners = np.nonzero(e <= emin + tie_rtol * max(1.0, abs(emin)))[0]
    orders = {canonicalize(int(s), n) for s in winners}
    if len(orders) > 1:
        raise AmbiguousGround(orders, emin)
    order = orders.pop()
    return GroundState(order=order, energy=emin, configs=orbit(order.canonical, n))


def field_scale(coupling):
    """Energy unit for the transverse field: Jbar, or 1 for a zero matrix."""
    return coupling.jbar if coupling.jbar > 0.0 else 1.0


def _flip_targets(n_ions):
    idx = np.arange(1 << n_ions, dtype=np.int64)
    return [idx ^ (1 << p) for p in range(n_ions)]


def apply_hamiltonian(coupling, b_field, v):
    """Matrix-free H @ v: diagonal Ising energies minus b * single-spin flips."""
    n = coupling.n_ions
    dim = 1 << n
    v = np.asarray(v, dtype=float)
    if v.shape != (dim,):
        raise ValueError(f"state vector must have length {dim}, got {v.shape}")
    out = classical_energies(coupling) * v
    b_abs = b_field * field_scale(coupling)
    if b_abs != 0.0:
        for tgt in _flip_targets(n):
            out -= b_abs * v[tgt]
    return out


def dense_hamiltonian(coupling, b_field):
    """Explicit 2^N x 2^N matrix; intended for small N."""
    n = coupling.n_ions
    dim = 1 << n
    h = np.zeros((dim, dim))
    h[np.arange(dim), np.arange(dim)] = classical_energies(coupling)
    b_abs = b_field * field_scale(coupling)
    if b_abs != 0.0:
        idx = np.arange(dim, dtype=np.int64)
        for p in range(n):
            h[idx, idx ^ (1 << p)] = -b_abs
    return h


def lowest_eigenpairs(coupling, b_field, k=4, tol=1e-10, method="auto", seed=lanczos.DEFAULT_SEED):
    """k lowest eigenpairs of the spin Hamiltonian.

    Dense diagonalization is used for 2^N <= 4096, a matrix-free Lanczos
    iteration with full reorthogonalization above (method="dense"/"lanczos"
    forces either path).  Residuals ||Hv - Ev|| are verified against
    1e-9 * max(1, |E|) for every returned pair.
    """
    n = coupling.n_ions
    dim = 1 << n
    if not 1 <= k <= min(8, dim):
        raise ValueError(f"k must lie in [1, {min(8, dim)}], got {k}")
    if b_field < 0.0:
        raise ValueError("transverse field must be non-negative")
    if method == "auto":
        method = "dense" if dim <= 4096 else "lanczos"
    if method == "dense":
        h = dense_hamiltonian(coupling, b_field)
        evals, vecs = np.linalg.eigh(h)
        evals, vecs = evals[:k], vecs[:, :k]
    elif method == "lanczos":
        diag = classical_energies(coupling)
        b_abs = b_field * field_scale(coupling)
        flips = _flip_targets(n)

        def matvec(x):
            y = diag * x
            for tgt in flips:
                y -= b_abs * x[tgt]
            return y

        evals, vecs = lanczos.lowest_eigenpairs(matvec, dim, k, tol=tol, seed=seed)
    else:
        raise ValueError(f"unknown method {method!r}")

    norms = np.linalg.norm(vecs, axis=0)
    vecs = vecs / norms
    resid = np.empty(k)
    for i in range(k):
        resid[i] = np.linalg.norm(apply_hamiltonian(coupling, b_field, vecs[:, i]) - evals[i] * vecs[:, i])
    bound = 1e-9 * np.maximum(1.0, np.abs(evals))
    if np.any(resid > bound):
        raise lanczos.NoConvergence(
            f"eigenpair residual {np.max(resid):.3e} exceeds bound {np.max(bound):.3e}"
        )
    return SpectrumResult(
        eigenvalues=evals,
        eigenvectors=vecs,
        n_ions=n,
        b_field=float(b_field),
        b_abs=float(b_field * field_scale(coupling)),
        method=method,
        residuals=resid,
    )


def polarization(result, which=0):
    """<sum_n sigma^x_n> / N for one eigenstate; lies in [-1, 1]."""
    v = result.eigenvectors[:, which]
    total = 0.0
    for tgt in _flip_targets(result.n_ions):
        total += float(v @ v[tgt])
    return total / result.n_ions


def subspace_projection(result, basis, which=0):
    """Probability of one eigenstate inside the span of the given configurations."""
    basis = list(basis)
    if not basis:
        raise ValueError("basis must be non-empty")
    if len(set(basis)) != len(basis):
        raise ValueError("basis configurations must be distinct")
    v = result.eigenvectors[:, which]
    return float(np.sum(v[np.asarray(basis, dtype=np.int64)] ** 2))


def ground_cluster(result, rtol=1e-9):
    """Indices of eigenstates degenerate with the ground state."""
    e = result.eigenvalues
    width = rtol * max(1.0, abs(e[0]))
    return np.nonzero(e - e[0] <= width)[0]


def cluster_projection(result, basis, rtol=1e-9):
    """Subspace probability averaged over the (possibly degenerate) ground cluster.

    The average equals tr(P_cluster P_basis) / dim(cluster) and is independent
    of the arbitrary eigenbasis chosen inside a degenerate cluster.
    """
    members = ground_cluster(result, rtol)
    return sum(subspace_projection(result, basis, which=i) for i in members) / len(members)


def cluster_polarization(result, rtol=1e-9):
    """Polarization averaged over the degenerate ground cluster."""
    members = ground_cluster(result, rtol)
    return sum(polarization(result, which=i) for i in members) / len(members)
