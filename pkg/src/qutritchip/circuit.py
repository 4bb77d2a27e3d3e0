"""Programmable linear optics: heaters, MZIs and the three-mode multiport.

Conventions
-----------
MMI = (1/sqrt 2) [[1, i], [i, 1]].  An MZI with internal phase theta on its
first arm is MMI diag(e^{i theta}, 1) MMI: theta = pi is the bar state, theta = 0
the cross state, theta = pi/2 a 50:50 split.

The multiport is a triangle of three MZI elements acting on mode pairs
(1,2), (0,1), (1,2) in that order, each preceded by an external phase shifter:
element k uses (S_zk, S_yk). In every element both heaters sit on the waveguide
that continues into the higher-index mode of its pair, so in (low, high) order

    E(phi_z, theta_y) = MMI diag(1, e^{i theta_y}) MMI diag(1, e^{i phi_z}).

This placement is the one under which the quoted A1 and |f> settings produce the
intended transformations (checked in the tests). Mode m leaves through signal
port 2m+1 (1, 3, 5) or idler port 2m+2 (2, 4, 6).
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .qcore import check_unitary

TWO_PI = 2 * np.pi
MMI = np.array([[1, 1j], [1j, 1]]) / np.sqrt(2)
LAYOUT = ((1, 2), (0, 1), (1, 2))
NAMES = ("z1", "y1", "z2", "y2", "z3", "y3")


@dataclass(frozen=True)
class HeaterCalibration:
    power_per_2pi_mw: float = 42.0

    def __post_init__(self):
        if not self.power_per_2pi_mw > 0:
            raise DomainError("power per 2 pi must be positive")


def phase_to_power(phi: float, cal: HeaterCalibration = HeaterCalibration()) -> float:
    """Heater power (mW) for a phase shift phi (rad); linear in phi."""
    if phi < 0:
        raise DomainError("a heater cannot produce a negative phase shift")
    return phi * cal.power_per_2pi_mw / TWO_PI


def power_to_phase(power_mw: float, cal: HeaterCalibration = HeaterCalibration()) -> float:
    if power_mw < 0:
        raise DomainError("negative heater power")
    return power_mw * TWO_PI / cal.power_per_2pi_mw


def mzi_unitary(theta: float) -> np.ndarray:
    """MMI diag(e^{i theta}, 1) MMI."""
    return MMI @ np.diag([np.exp(1j * theta), 1]) @ MMI


def wdm_transmission(loss_db: float = 3.0) -> float:
    """Power transmission of the on-chip wavelength demultiplexer."""
    return 10 ** (-loss_db / 10)


@dataclass(frozen=True)
class PhaseSetting:
    """Six multiport phases (rad), canonicalized to [0, 2 pi)."""
    z1: float = 0.0
    y1: float = np.pi
    z2: float = 0.0
    y2: float = np.pi
    z3: float = 0.0
    y3: float = np.pi

    def __post_init__(self):
        for n in NAMES:
            v = float(getattr(self, n))
            if not np.isfinite(v):
                raise DomainError(f"phase {n} is not finite")
            object.__setattr__(self, n, v % TWO_PI)

    @classmethod
    def from_pi(cls, *vals) -> "PhaseSetting":
        """Build from phases given in units of pi, in the order z1, y1, z2, y2, z3, y3."""
        return cls(*(np.pi * v for v in vals))

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in NAMES])

    def to_json(self, prefix: str = "S", units: str = "rad") -> str:
        scale = np.pi if units == "pi" else 1.0
        d = {prefix + n[0].lower() + n[1]: getattr(self, n) / scale for n in NAMES}
        if units == "pi":
            d["units"] = "pi"
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, text: str | dict) -> "PhaseSetting":
        d = dict(json.loads(text) if isinstance(text, str) else text)
        scale = np.pi if d.pop("units", "rad") == "pi" else 1.0
        vals = {}
        for key, v in d.items():
            k = key.lower()
            if len(k) != 3 or k[0] not in "sip" or k[1:] not in NAMES:
                raise KeyError(f"unrecognized phase key {key!r}")
            vals[k[1:]] = float(v) * scale
        missing = set(NAMES) - set(vals)
        if missing:
            raise KeyError(f"missing phases: {sorted(missing)}")
        return cls(**vals)


IDENTITY_SETTING = PhaseSetting()   # all elements bar: U = diag(1, -1, 1)


def element(phi_z: float, theta_y: float) -> np.ndarray:
    """2x2 element in (low, high) mode order."""
    return MMI @ np.diag([1, np.exp(1j * theta_y)]) @ MMI @ np.diag([1, np.exp(1j * phi_z)])


def _embed(e, modes):
    u = np.eye(3, dtype=complex)
    u[np.ix_(modes, modes)] = e
    return u


def multiport_unitary(s: PhaseSetting, offsets=None) -> np.ndarray:
    """3x3 transformation of the multiport; `offsets` adds a static phase per heater."""
    ph = s.as_array() + (0 if offsets is None else np.asarray(offsets, float))
    u = np.eye(3, dtype=complex)
    for k, modes in enumerate(LAYOUT):
        u = _embed(element(ph[2 * k], ph[2 * k + 1]), modes) @ u
    return check_unitary(u, 3)


def _route_low(a: complex, b: complex, tol: float = 1e-14) -> tuple[float, float]:
    """(phi_z, theta_y) sending the vector (conj a, conj b) entirely to the low port."""
    if abs(a) < tol and abs(b) < tol:
        return 0.0, np.pi
    if abs(b) < tol:
        return 0.0, np.pi
    if abs(a) < tol:
        return 0.0, 0.0
    theta = 2 * np.arctan2(abs(a), abs(b))
    phi = np.pi - np.angle(np.conj(b) / np.conj(a))
    return phi, theta


def decompose_unitary(u) -> PhaseSetting:
    """Phases with multiport_unitary(result) = D U for a diagonal phase matrix D.

    Right-multiplies U by inverse elements to null (0,2), (0,1), then (1,2),
    leaving a diagonal.
    """
    w = check_unitary(u, 3).copy()
    out = []
    for modes, (row, col) in zip(LAYOUT, ((0, 2), (0, 1), (1, 2))):
        lo, hi = modes
        phi, theta = _route_low(w[row, lo], w[row, hi])
        w = w @ _embed(element(phi, theta), modes).conj().T
        out += [phi, theta]
    return PhaseSetting(*out)


def diagonal_phase_distance(u, v) -> float:
    """min over diagonal phases D of ||D u - v||_F."""
    u = np.asarray(u, complex)
    v = np.asarray(v, complex)
    ov = np.sum(np.conj(u) * v, axis=1)
    d = np.exp(1j * np.angle(ov))
    return float(np.linalg.norm(d[:, None] * u - v))


def row_overlaps(u, v) -> np.ndarray:
    """|<u_k, v_k>| for normalized rows."""
    u = np.asarray(u, complex)
    v = np.asarray(v, complex)
    num = np.abs(np.sum(np.conj(u) * v, axis=1))
    return num / (np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1))


# Settings quoted for the chip (values in units of pi).
CGLMP_A1_SETTING = PhaseSetting.from_pi(0.333, 0.5, 0.583, 0.392, 0.779, 0.5)
KS_F_SETTING = PhaseSetting.from_pi(0, 0.5, 1.25, 0.608, 0, 1.0)
# With CGLMP_A1_SETTING, outcome K leaves through mode A1_OUTCOME_MODES[K].
A1_OUTCOME_MODES = (1, 0, 2)
