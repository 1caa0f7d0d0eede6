"""Time integration of the mild formulation and Picard iteration of the Duhamel map.

The equation is u_t = nu L1 u - W(u, u) with
W(u, v) = P (1 - alpha^2 L2)^{-1} div(u (x) (1 - alpha^2 L2) v), so

    u(t) = e^{t nu L1} u0 - int_0^t e^{(t-s) nu L1} W(u(s), u(s)) ds.

The stepper is the integrating-factor midpoint rule: a half step with the
exact linear propagator and an explicit W, then a full step using W at
the predicted midpoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..besov import BesovParams, besov_norm, build_filter_bank
from ..fields import SpectralVectorField, sobolev_norm
from ..spectral import leray_project, nonlinear_W
from .config import SolverConfig
from .monitors import x_distance

BLOWUP_FACTOR = 1e6
DIAGNOSTIC_COLUMNS = ("t", "L2", "H_s1", "B_s1", "B_s2", "weighted_B_s2")


@dataclass
class Trajectory:
    """Sampled solution with per-sample diagnostics.

    ``steps`` holds the step index of each sample (sub-steps of a refined
    first step share index 0 except the last).  ``blew_up`` marks a run that
    was truncated by the blow-up detector.
    """

    config: SolverConfig
    times: list = field(default_factory=list)
    fields: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=lambda: {c: [] for c in DIAGNOSTIC_COLUMNS})
    blew_up: bool = False
    message: str = ""

    def __len__(self) -> int:
        return len(self.times)

    @property
    def final(self) -> SpectralVectorField:
        return self.fields[-1]

    def column(self, name: str) -> np.ndarray:
        return np.asarray(self.diagnostics[name], dtype=float)

    def rows(self):
        cols = [self.diagnostics[c] for c in DIAGNOSTIC_COLUMNS]
        return list(zip(*cols))


class Diagnostics:
    """Norms recorded at each output sample."""

    def __init__(self, cfg: SolverConfig):
        self.cfg = cfg
        self.bank = build_filter_bank(cfg.grid)
        self.b1 = BesovParams(cfg.s1, cfg.p, cfg.q)
        self.b2 = BesovParams(cfg.s2, cfg.p, cfg.q)

    def __call__(self, t: float, u: SpectralVectorField) -> dict:
        b2 = besov_norm(u, self.b2, self.bank)
        return {
            "t": t,
            "L2": u.l2_norm(),
            "H_s1": sobolev_norm(u.coeffs, u.grid, self.cfg.s1, 2),
            "B_s1": besov_norm(u, self.b1, self.bank),
            "B_s2": b2,
            "weighted_B_s2": (t**self.cfg.a if t > 0 else 0.0) * b2,
        }


class Stepper:
    """Integrating-factor midpoint step for a fixed configuration."""

    def __init__(self, cfg: SolverConfig, linear_only: bool = False):
        self.cfg = cfg
        self.sym = cfg.nu * cfg.L1.symbol(cfg.grid.kmag)
        self.linear_only = linear_only
        self._cache = {}

    def factors(self, h: float):
        if h not in self._cache:
            self._cache[h] = (np.exp(h * self.sym), np.exp(0.5 * h * self.sym))
        return self._cache[h]

    def rhs(self, u: SpectralVectorField) -> np.ndarray:
        if self.linear_only:
            return np.zeros_like(u.coeffs)
        return -nonlinear_W(u, u, self.cfg.alpha, self.cfg.L2, self.cfg.w_variant).coeffs

    def step(self, u: SpectralVectorField, h: float) -> SpectralVectorField:
        E, Eh = self.factors(h)
        if self.linear_only:
            return u.replace(E * u.coeffs)
        mid = u.replace(Eh * (u.coeffs + 0.5 * h * self.rhs(u)))
        new = E * u.coeffs + h * Eh * self.rhs(mid)
        return leray_project(u.replace(new))


def _healthy(u: SpectralVectorField, limit: float) -> tuple[bool, float]:
    norm = u.l2_norm()
    return bool(np.all(np.isfinite(u.coeffs)) and math.isfinite(norm) and norm <= limit), norm


def integrate(
    u0: SpectralVectorField, cfg: SolverConfig, linear_only: bool = False, diagnostics: bool = True
) -> Trajectory:
    """Advance u0 to cfg.T with step cfg.dt, sampling every cfg.output_every steps.

    Args:
        u0: divergence-free initial field on the configuration grid.
        cfg: run configuration.
        linear_only: drop W (forced linear run, u(t) = e^{t nu L1} u0).
        diagnostics: record the norm columns at each sample.
    """
    if u0.grid != cfg.grid:
        raise ValueError("initial data grid does not match the configuration")
    stepper = Stepper(cfg, linear_only)
    diag = Diagnostics(cfg) if diagnostics else None
    traj = Trajectory(cfg)
    init_norm = u0.l2_norm()
    limit = BLOWUP_FACTOR * init_norm if init_norm > 0 else math.inf

    def record(t, u, step):
        traj.times.append(t)
        traj.fields.append(u)
        traj.steps.append(step)
        if diag is not None:
            for k, v in diag(t, u).items():
                traj.diagnostics[k].append(v)

    nsteps = cfg.steps
    plan = []  # (step size, time after, step index, record?)
    first = 1
    if cfg.refine_start:
        # geometric sub-steps of the first step resolve small-t weights
        k = cfg.refine_start
        subs = [cfg.dt * 2.0**-k] + [cfg.dt * 2.0**-i for i in range(k, 0, -1)]
        t = 0.0
        for i, h in enumerate(subs):
            t = cfg.dt if i == len(subs) - 1 else t + h
            plan.append((h, t, int(i == len(subs) - 1), True))
        first = 2
    for step in range(first, nsteps + 1):
        plan.append((cfg.dt, step * cfg.dt, step, step % cfg.output_every == 0 or step == nsteps))

    u = u0
    record(0.0, u, 0)
    for h, t, step, keep in plan:
        u = stepper.step(u, h)
        ok, norm = _healthy(u, limit)
        if not ok:
            traj.blew_up, traj.message = True, f"blow-up at t={t:.6g}: L2 norm {norm:.3e}"
            break
        if keep:
            record(t, u, step)
    return traj


# --------------------------------------------------------------------------
# Picard iteration


@dataclass
class PicardResult:
    times: np.ndarray
    iterates: list
    distances: list
    ratios: list
    blew_up: bool = False
    message: str = ""


def _duhamel_map(u0, prev, times, stepper: Stepper):
    """Phi(prev) on the time grid, W evaluated at the interval midpoints of prev."""
    out = [u0]
    for j in range(len(times) - 1):
        h = times[j + 1] - times[j]
        E, Eh = stepper.factors(h)
        mid = prev[j].replace(0.5 * (prev[j].coeffs + prev[j + 1].coeffs))
        new = E * out[-1].coeffs + h * Eh * stepper.rhs(mid)
        out.append(leray_project(u0.replace(new)))
    return out


def picard_iterate(u0: SpectralVectorField, cfg: SolverConfig, n_iter: int, metric=None) -> PicardResult:
    """Iterates u^(m+1) = Phi(u^(m)) starting from the free evolution u^(0)(t) = e^{t L1} u0.

    Each iterate lives on the uniform grid t_j = j dt of [0, T].  ``metric``
    maps a list of difference fields to the X_{T,M} distance (default: the
    metric of :func:`..monitors.x_distance` with the configuration's indices).
    ratios[m] = d(u^(m+2), u^(m+1)) / d(u^(m+1), u^(m)), 0 when the
    denominator vanishes.
    """
    if n_iter < 2:
        raise ValueError("n_iter must be >= 2")
    times = np.arange(cfg.steps + 1) * cfg.dt
    if metric is None:
        bank = build_filter_bank(cfg.grid)

        def metric(diffs):
            return x_distance(diffs, times, cfg, bank)

    stepper = Stepper(cfg)
    E, _ = stepper.factors(cfg.dt)
    free = [u0]
    for _ in range(cfg.steps):
        free.append(free[-1].replace(E * free[-1].coeffs))
    iterates = [free]
    limit = BLOWUP_FACTOR * u0.l2_norm() if u0.l2_norm() > 0 else math.inf
    distances, ratios = [], []
    for m in range(n_iter):
        nxt = _duhamel_map(u0, iterates[-1], times, stepper)
        if not all(_healthy(v, limit)[0] for v in nxt):
            return PicardResult(times, iterates, distances, ratios, True, f"blow-up in iterate {m + 1}")
        d = metric([a - b for a, b in zip(nxt, iterates[-1])])
        if distances:
            ratios.append(d / distances[-1] if distances[-1] > 0 else 0.0)
        distances.append(d)
        iterates.append(nxt)
    return PicardResult(times, iterates, distances, ratios)
