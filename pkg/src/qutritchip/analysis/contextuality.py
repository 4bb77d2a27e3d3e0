"""Kochen-Specker-type inequality with an entangled qutrit pair.

Alice (signal) measures D1 = |f><f|, T0 = |a0><a0| or T1 = |a1><a1|; Bob (idler)
measures D0 = |i><i|. The inequality reads
    P(D1=1|D0=1) - P(T0=1|D0=1) - P(T1=1|D0=1) <= 0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..circuit import KS_F_SETTING, decompose_unitary, multiport_unitary
from ..errors import UndefinedConditionalError
from ..experiment import NoiseModel, coincidence_probs, simulate_counts
from ..qcore import as_density, fourier3, projector

KET_I = np.array([1, 1, 1], complex) / np.sqrt(3)
KET_F = np.array([1, -1, 1], complex) / np.sqrt(3)
KET_A0 = np.array([0, 1, -1], complex) / np.sqrt(2)
KET_A1 = np.array([1, -1, 0], complex) / np.sqrt(2)


def ks_projectors() -> dict[str, np.ndarray]:
    return {"D0_B": projector(KET_I), "D1_A": projector(KET_F),
            "T0_A": projector(KET_A0), "T1_A": projector(KET_A1)}


def _expect(rho, op_a, op_b):
    return float(np.real(np.trace(rho @ np.kron(op_a, op_b))))


def ks_lhs(state) -> tuple[float, dict[str, float]]:
    """Inequality left-hand side and the three conditionals, from the state directly."""
    rho = as_density(state)
    pr = ks_projectors()
    d0 = pr["D0_B"]
    marg = _expect(rho, np.eye(3), d0)
    if marg <= 1e-15:
        raise UndefinedConditionalError("P(D0_B = 1) vanishes")
    cond = {k: _expect(rho, pr[k], d0) / marg for k in ("D1_A", "T0_A", "T1_A")}
    return cond["D1_A"] - cond["T0_A"] - cond["T1_A"], cond


@dataclass(frozen=True)
class Context:
    """One measurement context: Alice's and Bob's multiport unitaries and the
    output modes that signal outcome 1."""
    name: str
    u_alice: np.ndarray
    alice_mode: int
    u_bob: np.ndarray
    bob_mode: int


def _basis(rows):
    return np.array(rows, complex)


def ks_contexts() -> list[Context]:
    """D1 uses the quoted multiport setting (|f> leaves mode 1); T0, T1 use
    decomposed settings with the target vector on mode 0."""
    u_bob = fourier3()  # row 0 is <i|
    s = 1 / np.sqrt(2)
    t0 = _basis([KET_A0.conj(), [0, s, s], [1, 0, 0]])
    t1 = _basis([KET_A1.conj(), [s, s, 0], [0, 0, 1]])
    ctx = [Context("D1_A", multiport_unitary(KS_F_SETTING), 1, u_bob, 0)]
    for name, b in (("T0_A", t0), ("T1_A", t1)):
        ctx.append(Context(name, multiport_unitary(decompose_unitary(b)), 0, u_bob, 0))
    return ctx


@dataclass(frozen=True)
class ContextCounts:
    context: Context
    counts: np.ndarray   # [alice mode, bob mode]

    def p_bob(self) -> float:
        """P(D0_B = 1 | context)."""
        tot = self.counts.sum()
        if tot == 0:
            raise UndefinedConditionalError("no counts in context")
        return float(self.counts[:, self.context.bob_mode].sum() / tot)

    def conditional(self) -> float:
        """P(Alice outcome 1 | D0_B = 1)."""
        col = self.counts[:, self.context.bob_mode]
        if col.sum() == 0:
            raise UndefinedConditionalError("no counts with D0_B = 1")
        return float(col[self.context.alice_mode] / col.sum())


def simulate_contexts(state, counts_per_context: float, seed=None,
                      noise: NoiseModel | None = None) -> list[ContextCounts]:
    rho = noise.state(state) if noise is not None else as_density(state)
    seeds = _seed_seq(seed).spawn(3)
    out = []
    for ctx, ss in zip(ks_contexts(), seeds):
        p = coincidence_probs(rho, ctx.u_alice, ctx.u_bob)
        rec = simulate_counts(p, counts_per_context, 1.0, NoiseModel(), np.random.default_rng(ss))
        out.append(ContextCounts(ctx, rec.counts))
    return out


def ks_lhs_from_counts(tables: list[ContextCounts]) -> tuple[float, dict[str, float]]:
    cond = {t.context.name: t.conditional() for t in tables}
    return cond["D1_A"] - cond["T0_A"] - cond["T1_A"], cond


def no_signalling_checks(tables: list[ContextCounts]) -> list[tuple[str, float]]:
    """|P(D0_B=1|ctx_i) - P(D0_B=1|ctx_j)| for the three context pairs."""
    by = {t.context.name: t.p_bob() for t in tables}
    pairs = (("D1_A", "T0_A"), ("D1_A", "T1_A"), ("T0_A", "T1_A"))
    return [(f"{a}-{b}", abs(by[a] - by[b])) for a, b in pairs]


def _seed_seq(seed) -> np.random.SeedSequence:
    return seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
