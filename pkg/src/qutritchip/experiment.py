"""State preparation, coincidence engine, count simulation and fringes."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from .circuit import PhaseSetting, multiport_unitary, wdm_transmission
from .errors import DomainError
from .qcore import STRUCT_TOL, as_density, fourier3, white_noise_for_fidelity

PAPER_FIDELITY = 0.9550

# source pair label -> modes; sources 1, 2, 3 feed modes 0, 1, 2
PAIRS = {"12": (0, 1), "13": (0, 2), "23": (1, 2)}


def signal_port(mode: int) -> int:
    return 2 * mode + 1


def idler_port(mode: int) -> int:
    return 2 * mode + 2


@dataclass(frozen=True)
class TwoQutritState:
    """alpha e^{2i Pz1}|00> + beta e^{2i Pz2}|11> + gamma |22>."""
    amplitudes: tuple = (1 / np.sqrt(3),) * 3
    pump_phases: tuple = (0.0, 0.0)

    def __post_init__(self):
        a = np.asarray(self.amplitudes, float)
        if a.shape != (3,) or np.any(a < 0):
            raise DomainError("amplitudes must be three non-negative reals")
        if abs(a @ a - 1) > STRUCT_TOL:
            raise DomainError("amplitudes must be normalized")

    def ket(self, detuning=None) -> np.ndarray:
        """Length-9 vector; `detuning` adds an extra phase per source."""
        pz1, pz2 = self.pump_phases
        ph = np.array([2 * pz1, 2 * pz2, 0.0])
        if detuning is not None:
            ph = ph + np.asarray(detuning, float)
        v = np.zeros(9, complex)
        v[[0, 4, 8]] = np.asarray(self.amplitudes) * np.exp(1j * ph)
        return v


def build_state(pump_splitting=(1.0, 1.0, 1.0), pump_phases=(0.0, 0.0)) -> TwoQutritState:
    """Pair state from the three source amplitudes and two relative pump phases.

    Spontaneous four-wave mixing consumes two pump photons, so a pump phase P
    appears as 2P on the pair amplitude.
    """
    a = np.abs(np.asarray(pump_splitting, float))
    n = np.linalg.norm(a)
    if n == 0:
        raise DomainError("all source amplitudes are zero")
    return TwoQutritState(tuple(a / n), tuple(float(x) for x in pump_phases))


def pair_state(pair: str, phase: float = 0.0) -> TwoQutritState:
    """Two sources at equal strength, third off; `phase` is the pump phase Pz1 or Pz2 analogue."""
    amps = np.zeros(3)
    amps[list(PAIRS[pair])] = 1
    return build_state(amps, (phase, 0.0))


def _state_array(psi, detuning=None):
    if isinstance(psi, TwoQutritState):
        return psi.ket(detuning)
    return np.asarray(psi, complex)


def coincidence_probs(psi, u_s, u_i) -> np.ndarray:
    """P[a, b] = |(<a|U_s x <b|U_i)|psi>|^2 for a ket, state object or 9x9 density matrix."""
    s = _state_array(psi)
    u_s = np.asarray(u_s, complex)
    u_i = np.asarray(u_i, complex)
    if s.ndim == 1:
        amp = u_s @ s.reshape(3, 3) @ u_i.T
        return np.abs(amp) ** 2
    u = np.kron(u_s, u_i)
    return np.real(np.diagonal(u @ s @ u.conj().T)).reshape(3, 3)


def paper_fourier_pair() -> tuple[np.ndarray, np.ndarray]:
    """Fourier transforms on both sides with the chip's detector labelling.

    The signal multiport outputs Fourier rows (0, 2, 1) on ports (1, 3, 5) and the
    idler multiport rows (1, 0, 2) on ports (2, 4, 6). Under this labelling the
    maximally entangled state at zero pump phase fires only the pairs 1-4, 3-2
    and 5-6.
    """
    f = fourier3()
    return f[[0, 2, 1]], f[[1, 0, 2]]


# ------------------------------------------------------------------- noise

@dataclass(frozen=True)
class NoiseModel:
    white_noise_weight: float = 0.0
    port_efficiencies: tuple = (1.0,) * 6     # detector ports 1..6
    accidental_rate: float = 0.0              # counts/s added to each pair
    resonance_detuning: tuple | None = None   # per-source phase offsets (rad)
    pair_weights: dict | None = None          # optional per source-pair override of p

    def __post_init__(self):
        if not 0 <= self.white_noise_weight <= 1:
            raise DomainError("white noise weight must lie in [0, 1]")
        eff = tuple(float(x) for x in self.port_efficiencies)
        if len(eff) != 6 or any(not 0 <= e <= 1 for e in eff):
            raise DomainError("need six port efficiencies in [0, 1]")
        object.__setattr__(self, "port_efficiencies", eff)
        if self.accidental_rate < 0:
            raise DomainError("accidental rate must be non-negative")
        if self.resonance_detuning is not None and len(self.resonance_detuning) != 3:
            raise DomainError("resonance detuning needs one phase per source")
        if self.pair_weights:
            for k, v in self.pair_weights.items():
                if k not in PAIRS or not 0 <= v <= 1:
                    raise DomainError(f"bad pair weight {k}: {v}")

    @classmethod
    def for_fidelity(cls, f: float = PAPER_FIDELITY, **kw) -> "NoiseModel":
        return cls(white_noise_weight=white_noise_for_fidelity(f), **kw)

    def weight(self, pair: str | None = None) -> float:
        if pair is not None and self.pair_weights and pair in self.pair_weights:
            return self.pair_weights[pair]
        return self.white_noise_weight

    def state(self, psi, pair: str | None = None) -> np.ndarray:
        """Density matrix (1-p)|psi><psi| + p I/9 with detuning phases applied."""
        rho = as_density(_state_array(psi, self.resonance_detuning))
        p = self.weight(pair)
        return (1 - p) * rho + p * np.eye(9) / 9

    def with_wdm_loss(self, loss_db: float = 3.0) -> "NoiseModel":
        t = wdm_transmission(loss_db)
        return replace(self, port_efficiencies=tuple(e * t for e in self.port_efficiencies))


@dataclass(frozen=True)
class CoincidenceRecord:
    counts: np.ndarray            # [signal mode, idler mode] -> ports (1,3,5) x (2,4,6)
    integration_time: float
    rng_seed: object = None

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.shape != (3, 3) or np.any(c < 0):
            raise DomainError("counts must be a non-negative 3x3 table")

    def label(self, a: int, b: int) -> str:
        return f"{signal_port(a)}{idler_port(b)}"


def expected_counts(p, pair_rate: float, t_s: float, noise: NoiseModel = NoiseModel(),
                    pair: str | None = None) -> np.ndarray:
    """Mean counts: white-noise mixing, port efficiencies, accidentals."""
    p = np.asarray(p, float)
    w = noise.weight(pair)
    mixed = (1 - w) * p + w / p.size
    eff = np.asarray(noise.port_efficiencies)
    eta = np.outer(eff[0::2], eff[1::2])
    return pair_rate * t_s * mixed * eta + noise.accidental_rate * t_s


def simulate_counts(p, pair_rate: float, t_s: float, noise: NoiseModel = NoiseModel(),
                    seed=None, pair: str | None = None) -> CoincidenceRecord:
    """Poisson draw of every cell around `expected_counts`; deterministic for a given seed."""
    rng = np.random.default_rng(seed)
    mean = expected_counts(p, pair_rate, t_s, noise, pair)
    return CoincidenceRecord(rng.poisson(mean), t_s, seed)


# ----------------------------------------------------------------- fringes

def rhom_settings(pair: str, phase: float) -> PhaseSetting:
    """Multiport setting interfering the two modes of `pair` on a 50:50 element.

    The scanned phase shifter sits before that element; the two outputs are
    modes (1, 2) for pair 23 and (0, 1) otherwise.
    """
    h = np.pi / 2
    if pair == "23":
        return PhaseSetting(0, np.pi, 0, np.pi, phase, h)
    if pair == "12":
        return PhaseSetting(0, np.pi, phase, h, 0, np.pi)
    if pair == "13":
        # first element crosses mode 2 onto mode 1
        return PhaseSetting(0, 0.0, phase, h, 0, np.pi)
    raise KeyError(f"unknown source pair {pair!r}; expected one of {sorted(PAIRS)}")


def rhom_output_modes(pair: str) -> tuple[int, int]:
    return (1, 2) if pair == "23" else (0, 1)


@dataclass(frozen=True)
class Fringe:
    phases: np.ndarray
    values: dict          # detector-pair label -> curve over phases
    kind: str             # "rhom" or "qubit"
    pair: str

    def __post_init__(self):
        ph = np.asarray(self.phases, float)
        if ph.ndim != 1 or np.any(np.diff(ph) <= 0):
            raise ValueError("fringe phases must be strictly increasing")

    @property
    def period(self) -> float:
        return np.pi if self.kind == "rhom" else 2 * np.pi

    @property
    def main(self) -> str:
        return next(iter(self.values))


def _scan(scan):
    scan = np.asarray(scan, float)
    if scan.ndim != 1 or len(scan) < 3:
        raise ValueError("scan must be a 1-d grid with at least three points")
    return scan


def rhom_fringe(pair: str, scan, noise: NoiseModel | None = None,
                amplitudes: tuple | None = None) -> Fringe:
    """Both photons of a two-source state enter the same multiport.

    Returns the probability that the two photons leave through the two different
    output ports of the interfering element.
    """
    scan = _scan(scan)
    a, b = rhom_output_modes(pair)
    psi = pair_state(pair) if amplitudes is None else build_state(amplitudes)
    state = noise.state(psi, pair) if noise is not None else psi.ket()
    cc = []
    for ph in scan:
        u = multiport_unitary(rhom_settings(pair, ph))
        p = coincidence_probs(state, u, u)
        cc.append(p[a, b] + p[b, a])
    return Fringe(scan, {f"{signal_port(a)}{signal_port(b)}": np.array(cc)}, "rhom", pair)


def qubit_fringe(pair: str, scan, noise: NoiseModel | None = None) -> Fringe:
    """Signal projected on (|j>+|k>)/sqrt 2, idler on (|j>+e^{i phi}|k>)/sqrt 2.

    Uses the same element settings as `rhom_fringe`: the signal multiport is held
    at zero phase and the idler multiport's shifter is scanned.
    """
    scan = _scan(scan)
    a, b = rhom_output_modes(pair)
    psi = pair_state(pair)
    state = noise.state(psi, pair) if noise is not None else psi.ket()
    u_s = multiport_unitary(rhom_settings(pair, 0.0))
    vals = {f"{signal_port(x)}{idler_port(y)}": [] for x in (a, b) for y in (a, b)}
    for ph in scan:
        p = coincidence_probs(state, u_s, multiport_unitary(rhom_settings(pair, ph)))
        for x in (a, b):
            for y in (a, b):
                vals[f"{signal_port(x)}{idler_port(y)}"].append(p[x, y])
    return Fringe(scan, {k: np.array(v) for k, v in vals.items()}, "qubit", pair)


@dataclass(frozen=True)
class FringeFit:
    visibility: float
    offset: float
    amplitude: float
    phase: float
    degenerate: bool


def fit_fringe(phases, y, period: float) -> FringeFit:
    """Least squares y ~ c + A cos(w phi - phase) with fixed period."""
    x = np.asarray(phases, float)
    y = np.asarray(y, float)
    w = 2 * np.pi / period
    m = np.column_stack([np.ones_like(x), np.cos(w * x), np.sin(w * x)])
    (c, a, b), *_ = np.linalg.lstsq(m, y, rcond=None)
    amp = float(np.hypot(a, b))
    if c <= 0 or amp <= 1e-12 * max(abs(c), 1e-300):
        return FringeFit(0.0, float(c), amp, 0.0, True)
    return FringeFit(amp / c, float(c), amp, float(np.arctan2(b, a)), False)


def visibility(f: Fringe, key: str | None = None) -> float:
    """(max - min)/(max + min) of the fitted sinusoid; 0 with a warning for flat data."""
    span = f.phases[-1] - f.phases[0]
    if span < f.period * (1 - 1e-9) - (f.phases[1] - f.phases[0]):
        raise ValueError("fringe must cover at least one full period")
    fit = fit_fringe(f.phases, f.values[key or f.main], f.period)
    if fit.degenerate:
        warnings.warn("flat fringe: visibility reported as 0", RuntimeWarning, stacklevel=2)
    return fit.visibility


def sample_fringe(f: Fringe, pair_rate: float, t_s: float, seed=None,
                  accidental_rate: float = 0.0) -> Fringe:
    """Poisson counts drawn around the probability curves of a fringe."""
    rng = np.random.default_rng(seed)
    vals = {k: rng.poisson(pair_rate * t_s * np.asarray(v) + accidental_rate * t_s).astype(float)
            for k, v in f.values.items()}
    return Fringe(f.phases, vals, f.kind, f.pair)


def white_noise_for_visibility(v: float, kind: str = "rhom", pair: str = "12") -> float:
    """White-noise weight at which the model fringe reaches visibility v."""
    if not 0 < v <= 1:
        raise DomainError("visibility must lie in (0, 1]")
    make = rhom_fringe if kind == "rhom" else qubit_fringe
    period = np.pi if kind == "rhom" else 2 * np.pi
    scan = np.linspace(0, 2 * np.pi, 81)

    def vis(p):
        f = make(pair, scan, NoiseModel(white_noise_weight=p))
        return fit_fringe(scan, f.values[f.main], period).visibility

    if v >= vis(0.0) - 1e-12:
        return 0.0
    return float(optimize.brentq(lambda p: vis(p) - v, 0.0, 1.0, xtol=1e-14))
