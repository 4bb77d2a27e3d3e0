"""Phase sensitivity of the pump-phase interferometer.

Both qutrits pass Fourier multiports while the pump phases (Pz1, Pz2) are scanned.
Sensitivity of a coincidence curve CC(phi) is S = max |dCC/dphi| / max CC.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from ..experiment import NoiseModel, build_state, coincidence_probs, paper_fourier_pair

# one detector pair from each of the three degenerate groups
INEQUIVALENT_PAIRS = ("14", "12", "16")
ALL_PAIRS = tuple(f"{a}{b}" for a in (1, 3, 5) for b in (2, 4, 6))
TWO_PATH_BENCHMARK = 0.5
THREE_PATH_BENCHMARK = 0.78


def _cell(label: str) -> tuple[int, int]:
    a, b = int(label[0]), int(label[1])
    return (a - 1) // 2, (b - 2) // 2


def derivative(phases, y) -> np.ndarray:
    """Central differences with one Richardson step (h and 2h); interior points only.

    Returns an array aligned with phases[2:-2].
    """
    x = np.asarray(phases, float)
    y = np.asarray(y, float)
    h = np.diff(x)
    if np.ptp(h) > 1e-9 * h.mean():
        raise ValueError("derivative needs a uniform grid")
    h = h.mean()
    d1 = (y[3:-1] - y[1:-3]) / (2 * h)
    d2 = (y[4:] - y[:-4]) / (4 * h)
    return (4 * d1 - d2) / 3


def curve_sensitivity(phases, y, period: float | None = None) -> float:
    """max |dy/dphi| / max y."""
    x = np.asarray(phases, float)
    if period is not None and (len(x) - 1) * period / (x[-1] - x[0]) < 50:
        warnings.warn("fewer than 50 grid points per period", RuntimeWarning, stacklevel=2)
    y = np.asarray(y, float)
    return float(np.abs(derivative(x, y)).max() / y.max())


def slope_maxima(phases, y) -> np.ndarray:
    """Local maxima of |dy/dphi| / max y."""
    s = np.abs(derivative(phases, y)) / np.max(y)
    k = np.flatnonzero((s[1:-1] >= s[:-2]) & (s[1:-1] > s[2:])) + 1
    return s[k]


def _model(x, a, c, d):
    return a * (1 + 2 * np.cos(2 * x + d)) ** 2 + c


def fitted_sensitivity(phases, y) -> float:
    """Fit a (1 + 2cos(2phi + d))^2 + c and evaluate S on the fitted curve."""
    x = np.asarray(phases, float)
    y = np.asarray(y, float)
    best = None
    for d0 in np.linspace(0, 2 * np.pi, 7)[:-1]:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", optimize.OptimizeWarning)
                p, _ = optimize.curve_fit(_model, x, y, p0=(y.max() / 9, y.min(), d0))
        except RuntimeError:
            continue
        r = np.sum((_model(x, *p) - y) ** 2)
        if best is None or r < best[0]:
            best = (r, p)
    a, c, d = best[1]
    fine = np.linspace(0, np.pi, 20001)
    f = _model(fine, a, c, d)
    df = -8 * a * (1 + 2 * np.cos(2 * fine + d)) * np.sin(2 * fine + d)
    return float(np.abs(df).max() / f.max())


@dataclass(frozen=True)
class SensitivityScan:
    phases: np.ndarray
    curves: dict
    sensitivity: dict                       # per detector pair
    averages: dict = field(default_factory=dict)

    @property
    def mean(self) -> float:
        return self.averages["pairs"]


def cut_state(phi: float):
    """Pz1 = -Pz2 = phi with equal source amplitudes."""
    return build_state((1, 1, 1), (phi, -phi))


def sensitivity_scan(state_builder=cut_state, grid=None, noise: NoiseModel | None = None,
                     pairs=INEQUIVALENT_PAIRS) -> SensitivityScan:
    """Coincidence curves along a one-parameter pump-phase cut and their sensitivities.

    averages:
      "pairs"          mean of the per-pair maxima
      "slope_maxima"   mean of every local slope maximum over one period, all pairs
      "fit"            mean over pairs of S evaluated on a fitted model curve
    """
    grid = np.linspace(-np.pi / 2, np.pi / 2, 1001) if grid is None else np.asarray(grid, float)
    u_s, u_i = paper_fourier_pair()
    curves = {p: np.empty(len(grid)) for p in pairs}
    for n, phi in enumerate(grid):
        psi = state_builder(phi)
        st = noise.state(psi) if noise is not None else psi
        prob = coincidence_probs(st, u_s, u_i)
        for p in pairs:
            curves[p][n] = prob[_cell(p)]
    sens = {p: curve_sensitivity(grid, c, np.pi) for p, c in curves.items()}
    period_mask = grid <= grid[0] + np.pi
    maxima = np.concatenate([slope_maxima(grid[period_mask], c[period_mask]) for c in curves.values()])
    averages = {
        "pairs": float(np.mean(list(sens.values()))),
        "slope_maxima": float(maxima.mean()) if len(maxima) else float("nan"),
        "fit": float(np.mean([fitted_sensitivity(grid, c) for c in curves.values()])),
    }
    return SensitivityScan(grid, curves, sens, averages)


def pump_phase_map(grid1, grid2, noise: NoiseModel | None = None) -> dict[str, np.ndarray]:
    """Coincidence probability for all nine detector pairs over a (Pz1, Pz2) grid."""
    u_s, u_i = paper_fourier_pair()
    out = {p: np.empty((len(grid1), len(grid2))) for p in ALL_PAIRS}
    for i, p1 in enumerate(grid1):
        for j, p2 in enumerate(grid2):
            psi = build_state((1, 1, 1), (p1, p2))
            prob = coincidence_probs(noise.state(psi) if noise is not None else psi, u_s, u_i)
            for p in ALL_PAIRS:
                out[p][i, j] = prob[_cell(p)]
    return out


def degenerate_groups(maps: dict[str, np.ndarray], tol: float = 1e-9) -> list[list[str]]:
    """Detector pairs whose pump-phase maps coincide everywhere."""
    groups: list[list[str]] = []
    for p in sorted(maps):
        for g in groups:
            if np.max(np.abs(maps[g[0]] - maps[p])) <= tol:
                g.append(p)
                break
        else:
            groups.append([p])
    return groups


def two_path_curve(phi):
    return (1 + np.cos(phi)) / 2


def three_path_curve(phi):
    return (1 + 2 * np.cos(phi)) ** 2 / 9
