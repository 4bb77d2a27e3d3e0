"""81-setting two-qutrit state tomography."""
from __future__ import annotations

import functools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import SingularDesignError
from .qcore import fidelity, max_entangled, purity

_S = 1 / np.sqrt(2)
SINGLE_STATES = {
    "0": np.array([1, 0, 0], complex),
    "1": np.array([0, 1, 0], complex),
    "2": np.array([0, 0, 1], complex),
    "0+1": np.array([_S, _S, 0], complex),
    "1+2": np.array([0, _S, _S], complex),
    "0+2": np.array([_S, 0, _S], complex),
    "0+i1": np.array([_S, 1j * _S, 0], complex),
    "1+i2": np.array([0, _S, 1j * _S], complex),
    "0+i2": np.array([_S, 0, 1j * _S], complex),
}
COMPUTATIONAL = ("0", "1", "2")


@dataclass(frozen=True)
class MeasurementSetting:
    signal: np.ndarray
    idler: np.ndarray
    label: str

    def __post_init__(self):
        for v in (self.signal, self.idler):
            if abs(np.linalg.norm(v) - 1) > 1e-12:
                raise ValueError("projector vectors must be unit norm")

    def operator(self) -> np.ndarray:
        v = np.kron(self.signal, self.idler)
        return np.outer(v, v.conj())


def schedule_81() -> list[MeasurementSetting]:
    """Every pair of the nine single-qutrit states; label 'signal|idler'."""
    return [MeasurementSetting(a, b, f"{la}|{lb}")
            for la, a in SINGLE_STATES.items() for lb, b in SINGLE_STATES.items()]


def design_matrix(schedule) -> np.ndarray:
    """Rows such that Tr(M_k rho) = (A @ rho.reshape(-1))_k."""
    return np.array([s.operator().conj().reshape(-1) for s in schedule])


@functools.lru_cache(maxsize=1)
def _default_design():
    sched = schedule_81()
    a = design_matrix(sched)
    return sched, a, np.linalg.pinv(a)


def _design(schedule):
    if schedule is None:
        return _default_design()
    a = design_matrix(schedule)
    if np.linalg.matrix_rank(a) < 81:
        raise SingularDesignError("measurement schedule is not informationally complete")
    return list(schedule), a, np.linalg.pinv(a)


def expected_rates(rho, total: float = 1.0, schedule=None) -> np.ndarray:
    """total * Tr(M_k rho) for every setting."""
    _, a, _ = _design(schedule)
    return total * np.real(a @ np.asarray(rho, complex).reshape(-1))


def simulate_counts(rho, counts_per_setting: float, seed=None, schedule=None) -> np.ndarray:
    """Poisson counts with `counts_per_setting` expected on average over the schedule."""
    rng = np.random.default_rng(seed)
    p = expected_rates(rho, schedule=schedule)
    return rng.poisson(np.clip(p, 0, None) * counts_per_setting / p.mean()).astype(float)


def _simplex(w):
    """Euclidean projection of a real vector onto the probability simplex."""
    u = np.sort(w)[::-1]
    css = np.cumsum(u) - 1
    k = np.arange(1, len(w) + 1)
    ok = u - css / k > 0
    r = k[ok][-1]
    return np.clip(w - css[ok][-1] / r, 0, None)


def project_density(x, method: str = "simplex") -> np.ndarray:
    """Positive unit-trace matrix near the Hermitian part of x.

    "simplex" gives the Frobenius-nearest density matrix (eigenvalues projected on
    the simplex). "clip" zeroes negative eigenvalues and rescales the trace.
    """
    h = (np.asarray(x, complex) + np.asarray(x, complex).conj().T) / 2
    w, v = np.linalg.eigh(h)
    if method == "simplex":
        w = _simplex(w)
    elif method == "clip":
        w = np.clip(w, 0, None)
        if w.sum() <= 0:
            w = np.ones_like(w)
        w = w / w.sum()
    else:
        raise ValueError(f"unknown projection {method!r}")
    return (v * w) @ v.conj().T


def _linear(rates, schedule, normalization):
    sched, a, a_inv = _design(schedule)
    rates = np.asarray(rates, float)
    if rates.shape != (len(sched),):
        raise ValueError(f"expected {len(sched)} rates, got {rates.shape}")
    if rates.sum() <= 0:
        raise ValueError("total counts must be positive")
    x = (a_inv @ rates).reshape(9, 9)
    x = (x + x.conj().T) / 2
    if normalization == "fit":
        n = np.trace(x).real
    elif normalization == "basis":
        idx = [k for k, s in enumerate(sched)
               if s.label.split("|")[0] in COMPUTATIONAL and s.label.split("|")[1] in COMPUTATIONAL]
        if len(idx) != 9:
            raise SingularDesignError("schedule lacks the computational-basis settings")
        n = rates[idx].sum()
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    if n <= 0:
        raise SingularDesignError("normalization sum is not positive")
    return x / n


def _mle(rates, schedule, start, max_iter=500, tol=1e-10):
    """Fixed-point iteration rho <- H^-1 R rho R H^-1 (H = sum of projectors)."""
    sched, a, _ = _design(schedule)
    ops = np.array([s.operator() for s in sched])
    h_inv = np.linalg.inv(ops.sum(0))
    n = np.asarray(rates, float)
    total = n.sum()
    rho = 0.99 * start + 0.01 * np.eye(9) / 9
    last = -np.inf
    for _ in range(max_iter):
        p = np.clip(np.real(a @ rho.reshape(-1)), 1e-15, None)
        ll = np.sum(n * np.log(p)) - total * np.log(p.sum())
        if ll - last < tol:
            break
        last = ll
        r = np.tensordot(n / p * (p.sum() / total), ops, axes=1)
        rho = h_inv @ r @ rho @ r @ h_inv
        rho = (rho + rho.conj().T) / 2
        rho /= np.trace(rho).real
    return rho


def reconstruct(rates, schedule=None, method: str = "linear", projection: str = "simplex",
                normalization: str = "basis") -> np.ndarray:
    """Density matrix from 81 measured rates.

    method "linear": least-squares inversion then projection to a density matrix.
    method "mle": maximum-likelihood refinement started from the linear estimate.
    """
    rho = project_density(_linear(rates, schedule, normalization), projection)
    if method == "linear":
        return rho
    if method == "mle":
        return _mle(rates, schedule, rho)
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class MonteCarloResult:
    fidelity_std: float
    stds: dict
    samples: int


def monte_carlo_errors(rates, n_samples: int = 100, seed=None, target=None, functionals=None,
                       threads: int = 1, **recon_kw) -> MonteCarloResult:
    """Resample each count from Poisson(measured), reconstruct, report spreads."""
    if n_samples < 10:
        raise ValueError("need at least 10 Monte Carlo samples")
    target = max_entangled() if target is None else np.asarray(target, complex)
    funcs = {"fidelity": lambda r: fidelity(r, target)}
    funcs.update(functionals or {})
    rates = np.asarray(rates, float)
    seeds = _seed_seq(seed).spawn(n_samples)

    def one(ss):
        r = reconstruct(np.random.default_rng(ss).poisson(rates).astype(float), **recon_kw)
        return [f(r) for f in funcs.values()]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            vals = list(ex.map(one, seeds))
    else:
        vals = [one(s) for s in seeds]
    std = np.std(np.array(vals, float), axis=0, ddof=1)
    stds = dict(zip(funcs, map(float, std)))
    return MonteCarloResult(stds["fidelity"], stds, n_samples)


@dataclass(frozen=True)
class TomographyResult:
    rho: np.ndarray
    fidelity_to_target: float
    fidelity_std: float
    purity: float
    mc_samples: int

    @property
    def max_imag(self) -> float:
        return float(np.abs(self.rho.imag).max())


def analyze(rates, n_samples: int = 100, seed=None, target=None, threads: int = 1,
            **recon_kw) -> TomographyResult:
    target = max_entangled() if target is None else np.asarray(target, complex)
    rho = reconstruct(rates, **recon_kw)
    mc = monte_carlo_errors(rates, n_samples, seed, target, threads=threads, **recon_kw)
    return TomographyResult(rho, fidelity(rho, target), mc.fidelity_std, purity(rho), mc.samples)


def _seed_seq(seed) -> np.random.SeedSequence:
    return seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
