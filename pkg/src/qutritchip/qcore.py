"""Two-qutrit linear algebra and state functionals.

Two-qutrit vectors use the index convention (s, i) -> 3*s + i throughout the
package, s being the signal qutrit and i the idler qutrit.
"""
from __future__ import annotations

import numpy as np

from .errors import DimensionError

# structural checks (unitarity, normalization, hermiticity)
STRUCT_TOL = 1e-9
# algebraic identities (round trips, expansions)
ALG_TOL = 1e-12

OMEGA = np.exp(2j * np.pi / 3)


def _square(m):
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    return m


def is_unitary(m, tol: float = STRUCT_TOL) -> bool:
    """True iff ||M M^dag - I||_F <= tol."""
    m = _square(m)
    if tol <= 0:
        raise ValueError("tol must be positive")
    return bool(np.linalg.norm(m @ m.conj().T - np.eye(len(m))) <= tol)


def check_unitary(m, dim: int | None = None, tol: float = STRUCT_TOL) -> np.ndarray:
    """Return `m` as a complex array, raising if it is not a unitary of size `dim`."""
    m = _square(m)
    if dim is not None and m.shape[0] != dim:
        raise DimensionError(f"expected {dim}x{dim}, got {m.shape}")
    if not is_unitary(m, tol):
        raise ValueError("matrix is not unitary within tolerance")
    return m


def tensor(a, b) -> np.ndarray:
    """Two-party local unitary a (signal) x b (idler), consistent with 3*s+i."""
    return check_unitary(np.kron(check_unitary(a, 3), check_unitary(b, 3)), 9)


def fourier3() -> np.ndarray:
    """Three-mode discrete Fourier matrix, F[j, k] = omega^(j k) / sqrt(3)."""
    j = np.arange(3)
    return OMEGA ** np.outer(j, j) / np.sqrt(3)


def ket(amplitudes) -> np.ndarray:
    """Validated, normalized copy of a length-9 amplitude vector."""
    v = np.asarray(amplitudes, dtype=complex).reshape(-1)
    if v.shape != (9,):
        raise DimensionError(f"two-qutrit ket must have 9 entries, got {v.shape}")
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("zero vector")
    return v / n


def max_entangled() -> np.ndarray:
    """(|00> + |11> + |22>)/sqrt(3)."""
    v = np.zeros(9, complex)
    v[[0, 4, 8]] = 1 / np.sqrt(3)
    return v


def projector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def is_density(rho, tol: float = STRUCT_TOL) -> bool:
    rho = _square(rho)
    if np.abs(rho - rho.conj().T).max() > tol:
        return False
    if abs(np.trace(rho) - 1) > tol:
        return False
    return bool(np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() >= -tol)


def as_density(state) -> np.ndarray:
    """Accept a ket (1-d) or a density matrix (2-d) and return a density matrix."""
    s = np.asarray(state, dtype=complex)
    if s.ndim == 1:
        return projector(s / np.linalg.norm(s))
    return _square(s)


def white_noise_state(psi, p: float) -> np.ndarray:
    """(1 - p)|psi><psi| + p I/d."""
    rho = as_density(psi)
    d = len(rho)
    return (1 - p) * rho + p * np.eye(d) / d


def white_noise_for_fidelity(f: float, d: int = 9) -> float:
    """Weight p such that (1-p)|psi><psi| + p I/d has fidelity f with psi."""
    return (1 - f) / (1 - 1 / d)


def gell_mann_set() -> list[np.ndarray]:
    """Identity followed by the eight Gell-Mann matrices (Tr(l_a l_b) = 2 delta_ab)."""
    mats = [np.eye(3, dtype=complex)]
    for j, k in [(0, 1), (0, 2), (1, 2)]:
        s = np.zeros((3, 3), complex)
        s[j, k] = s[k, j] = 1
        a = np.zeros((3, 3), complex)
        a[j, k], a[k, j] = -1j, 1j
        mats += [s, a]
    # standard ordering: l1,l2 (01), l3, l4,l5 (02), l6,l7 (12), l8
    l1, l2, l4, l5, l6, l7 = mats[1:]
    l3 = np.diag([1, -1, 0]).astype(complex)
    l8 = np.diag([1, 1, -2]).astype(complex) / np.sqrt(3)
    return [mats[0], l1, l2, l3, l4, l5, l6, l7, l8]


def gell_mann_coefficients(h) -> np.ndarray:
    """Real coefficients c with h = sum_a c_a lambda_a for Hermitian h."""
    h = _square(h)
    gm = gell_mann_set()
    c = [np.trace(h).real / 3]
    c += [np.trace(h @ g).real / 2 for g in gm[1:]]
    return np.array(c)


def from_gell_mann(c) -> np.ndarray:
    return sum(ci * g for ci, g in zip(c, gell_mann_set()))


def partial_trace(rho, keep: int | str = 0) -> np.ndarray:
    """Reduced 3x3 state. keep: 0/'signal' keeps the first qutrit, 1/'idler' the second."""
    keep = {"signal": 0, "idler": 1}.get(keep, keep)
    r = as_density(rho)
    if r.shape != (9, 9):
        raise DimensionError("partial_trace expects a two-qutrit state")
    r = r.reshape(3, 3, 3, 3)
    if keep == 0:
        return np.einsum("ajbj->ab", r)
    if keep == 1:
        return np.einsum("jajb->ab", r)
    raise ValueError(f"keep must be 0/1/'signal'/'idler', got {keep!r}")


def fidelity(rho, psi) -> float:
    """<psi|rho|psi>, clamped to [0, 1]."""
    psi = np.asarray(psi, dtype=complex)
    f = np.real(psi.conj() @ as_density(rho) @ psi)
    return float(min(1.0, max(0.0, f)))


def purity(rho) -> float:
    r = as_density(rho)
    return float(np.real(np.trace(r @ r)))


def i_concurrence(psi) -> float:
    """I-concurrence sqrt(2(1 - Tr rho_A^2)) of a pure two-qutrit state."""
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise DimensionError("i_concurrence takes a ket; use i_concurrence_lower_bound for rho")
    rho_a = partial_trace(projector(psi / np.linalg.norm(psi)), 0)
    return float(np.sqrt(max(0.0, 2 * (1 - np.real(np.trace(rho_a @ rho_a))))))


def i_concurrence_lower_bound(rho) -> float:
    """Lower bound on the mixed-state I-concurrence.

    Evaluates sqrt(2(Tr rho^2 - Tr rho_X^2)) maximized over the two marginals.
    It coincides with the pure-state formula when rho is pure and never exceeds
    the convex-roof value. The naive sqrt(2(1 - Tr rho_A^2)) on a mixed state is
    not a bound (it is maximal for I/9).
    """
    r = as_density(rho)
    p = np.real(np.trace(r @ r))
    v = max(p - np.real(np.trace(m @ m)) for m in (partial_trace(r, 0), partial_trace(r, 1)))
    return float(np.sqrt(max(0.0, 2 * v)))


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR with phase fix."""
    z = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_density(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix from a Gram construction."""
    k = rank or n
    g = rng.normal(size=(n, k)) + 1j * rng.normal(size=(n, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
