"""Trajectory monitors for contraction-space norms and the global-existence criterion."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..besov import BesovParams, LPFilterBank, besov_norm, build_filter_bank
from ..multipliers import check_global_integral
from ..reports import EstimateReport
from .config import SolverConfig


@dataclass(frozen=True)
class XNorm:
    """The two parts of the X_{T,M} norm and the small-t behaviour of the weighted part."""

    sup_deviation: float
    sup_weighted: float
    t_sup_weighted: float
    t0_time: float
    t0_weighted: float

    @property
    def total(self) -> float:
        return self.sup_deviation + self.sup_weighted


def _besov_pair(cfg: SolverConfig, s1=None, s2=None, p=None, q=None):
    p = cfg.p if p is None else p
    q = cfg.q if q is None else q
    return BesovParams(cfg.s1 if s1 is None else s1, p, q), BesovParams(cfg.s2 if s2 is None else s2, p, q)


def x_distance(diffs, times, cfg: SolverConfig, bank: LPFilterBank | None = None) -> float:
    """sup_t ||d(t)||_{B^{s1}} + sup_t t^a ||d(t)||_{B^{s2}} over the sampled times."""
    bank = bank or build_filter_bank(cfg.grid)
    b1, b2 = _besov_pair(cfg)
    a = cfg.a
    first = max(besov_norm(d, b1, bank) for d in diffs)
    second = max((t**a if t > 0 else 0.0) * besov_norm(d, b2, bank) for t, d in zip(times, diffs))
    return first + second


def monitor_X_norm(traj, s1=None, s2=None, p=None, q=None, gamma1=None) -> XNorm:
    """(sup_t ||u(t) - e^{t L1} u0||_{B^{s1}_{p,q}}, sup_t t^a ||u(t)||_{B^{s2}_{p,q}}).

    Indices default to the trajectory's configuration; a = (s2 - s1)/gamma1.
    The weighted term at the smallest positive sample is reported as the
    t -> 0+ proxy (it should vanish).
    """
    cfg = traj.config
    b1, b2 = _besov_pair(cfg, s1, s2, p, q)
    g1 = cfg.L1.gamma if gamma1 is None else gamma1
    a = (b2.s - b1.s) / g1
    bank = build_filter_bank(cfg.grid)
    u0 = traj.fields[0]
    sym = cfg.nu * cfg.L1.symbol(cfg.grid.kmag)
    dev, weighted = [], []
    for t, u in zip(traj.times, traj.fields):
        free = u0.coeffs * np.exp(t * sym)
        dev.append(besov_norm(u.coeffs - free, b1, bank))
        weighted.append((t**a if t > 0 else 0.0) * besov_norm(u, b2, bank))
    weighted = np.array(weighted)
    times = np.asarray(traj.times)
    pos = np.flatnonzero(times > 0)
    i0 = pos[0] if pos.size else 0
    imax = int(np.argmax(weighted))
    return XNorm(float(max(dev)), float(weighted[imax]), float(times[imax]), float(times[i0]), float(weighted[i0]))


@dataclass(frozen=True)
class SmoothingRow:
    r: float
    exponent: float
    sup: float
    t_at_sup: float
    exponent_alt: float
    sup_alt: float


def smoothing_diagnostic(traj, r_list, s1=None, gamma1=None, p=None, q=None) -> list[SmoothingRow]:
    """sup_t t^{(r - s1)/gamma1} ||u(t)||_{B^r_{p,q}} per r, plus the same with exponent (r - s1)/2."""
    cfg = traj.config
    s1 = cfg.s1 if s1 is None else s1
    g1 = cfg.L1.gamma if gamma1 is None else gamma1
    p = cfg.p if p is None else p
    q = cfg.q if q is None else q
    bank = build_filter_bank(cfg.grid)
    times = np.asarray(traj.times, dtype=float)
    rows = []
    for r in r_list:
        if r < s1:
            raise ValueError(f"r = {r} below s1 = {s1}")
        norms = np.array([besov_norm(u, BesovParams(r, p, q), bank) for u in traj.fields])
        e, e_alt = (r - s1) / g1, (r - s1) / 2
        w = times**e * norms
        w_alt = times**e_alt * norms
        i = int(np.argmax(w))
        rows.append(SmoothingRow(float(r), e, float(w[i]), float(times[i]), e_alt, float(w_alt.max())))
    return rows


def growth_ratio(traj, column: str = "H_s1", fraction: float = 0.1) -> float:
    """max over the run divided by max over the first ``fraction`` of the horizon."""
    t = np.asarray(traj.times)
    v = traj.column(column)
    early = v[t <= fraction * traj.config.T]
    return float(v.max() / early.max())


@dataclass
class GlobalVerdict:
    verdict: str
    exponent_sum: float
    exponent_ok: bool
    integral: EstimateReport
    advisories: list = field(default_factory=list)

    def summary(self) -> str:
        cls = self.integral.details["classification"]
        lines = [
            f"2γ₁+γ₂ = {self.exponent_sum:.6g} {'≥' if self.exponent_ok else '<'} 5",
            f"∫ ds/(s g₁² g₂): {cls}",
            f"verdict: {self.verdict}",
        ]
        return "\n".join(lines + [f"advisory: {a}" for a in self.advisories])


def global_criterion_monitor(cfg: SolverConfig, R_max: float = 1e8) -> GlobalVerdict:
    """GLOBAL-REGIME iff 2 gamma1 + gamma2 >= 5 and the g-integral diverges."""
    total = 2 * cfg.L1.gamma + cfg.L2.gamma
    ok = total >= 5
    integral = check_global_integral(cfg.L1, cfg.L2, R_max)
    advisories = []
    if cfg.n != 3:
        advisories.append(f"criterion stated for n = 3, config has n = {cfg.n}")
    if cfg.p != 2:
        advisories.append(f"criterion stated for p = 2, config has p = {cfg.p:g}")
    verdict = "GLOBAL-REGIME" if ok and integral.passed else "LOCAL-ONLY"
    return GlobalVerdict(verdict, total, ok, integral, advisories)

