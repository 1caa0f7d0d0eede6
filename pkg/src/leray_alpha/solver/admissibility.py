"""Parameter admissibility for the two local-existence results.

Variant A is the inequality list of the result built on the standard
product estimate, with free parameter k.  Variant B is the final list of
the result built on the Chemin product estimate; a witness M > 0 for the
intermediate list (with r, r1, r2 fixed by M) is reported when one exists.
The log variant replaces gamma1 by gamma1 - eps throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

VARIANTS = ("A", "B")
K_GRID = 200
M_GRID = 200
LOG_EPS = 1e-9


@dataclass(frozen=True)
class AdmissibilityParams:
    gamma1: float
    gamma2: float
    n: int
    p: float
    s1: float
    s2: float

    @property
    def n_over_p(self) -> float:
        return 0.0 if math.isinf(self.p) else self.n / self.p


@dataclass(frozen=True)
class Inequality:
    text: str
    lhs: float
    op: str
    rhs: float

    @property
    def holds(self) -> bool:
        return {">": self.lhs > self.rhs, ">=": self.lhs >= self.rhs, "<": self.lhs < self.rhs}[self.op]


@dataclass
class AdmissibilityResult:
    variant: str
    log_variant: bool
    params: AdmissibilityParams
    inequalities: list
    witness: dict | None = None
    notes: list = field(default_factory=list)

    @property
    def admissible(self) -> bool:
        return all(i.holds for i in self.inequalities)

    @property
    def verdict(self) -> str:
        return "ADMISSIBLE" if self.admissible else "REJECTED"

    def failed(self) -> list[str]:
        return [i.text for i in self.inequalities if not i.holds]

    def table(self) -> str:
        rows = [f"variant {self.variant}{' (log, gamma1 -> gamma1 - eps)' if self.log_variant else ''}"]
        for i in self.inequalities:
            rows.append(f"  [{'ok' if i.holds else 'FAIL':4}] {i.text:32}  {i.lhs:.6g} {i.op} {i.rhs:.6g}")
        if self.witness:
            rows.append("  witness: " + ", ".join(f"{k}={v:.6g}" for k, v in self.witness.items()))
        rows.extend(f"  note: {n}" for n in self.notes)
        rows.append(f"verdict: {self.verdict}")
        return "\n".join(rows)

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "log_variant": self.log_variant,
            "verdict": self.verdict,
            "inequalities": [
                {"text": i.text, "lhs": i.lhs, "op": i.op, "rhs": i.rhs, "holds": i.holds} for i in self.inequalities
            ],
            "witness": self.witness,
            "notes": list(self.notes),
        }


def _hypotheses(g1: float, g2: float) -> list[Inequality]:
    return [Inequality("γ₁ > 1", g1, ">", 1.0), Inequality("γ₂ > 0", g2, ">", 0.0)]


def _list_a(pr: AdmissibilityParams, g1: float, k: float) -> list[Inequality]:
    d = pr.s2 - pr.s1
    return _hypotheses(g1, pr.gamma2) + [
        Inequality("s₂ > γ₂", pr.s2, ">", pr.gamma2),
        Inequality("γ₂ ≥ k", pr.gamma2, ">=", k),
        Inequality("k > 0", k, ">", 0.0),
        Inequality("kp < n", k * pr.p, "<", float(pr.n)),
        Inequality("s₂−s₁ > 0", d, ">", 0.0),
        Inequality("s₂−s₁ < min{γ₁/2, 1}", d, "<", min(g1 / 2, 1.0)),
        Inequality("γ₁ ≥ s₂−s₁+1+n/p−k", g1, ">=", d + 1 + pr.n_over_p - k),
    ]


def _k_candidates(pr: AdmissibilityParams) -> np.ndarray:
    if pr.gamma2 <= 0:
        return np.array([0.0])
    top = pr.gamma2 if pr.gamma2 * pr.p < pr.n else pr.n_over_p * (1 - 1e-9)
    return np.linspace(top / K_GRID, top, K_GRID)


def _list_b(pr: AdmissibilityParams, g1: float) -> list[Inequality]:
    d = pr.s2 - pr.s1
    g2, np_ = pr.gamma2, pr.n_over_p
    return _hypotheses(g1, g2) + [
        Inequality("s₂−s₁ > 0", d, ">", 0.0),
        Inequality("s₂−s₁ < γ₁/2", d, "<", g1 / 2),
        Inequality("s₁ > γ₂−n/p−1", pr.s1, ">", g2 - np_ - 1),
        Inequality("γ₁ ≥ 2s₂−s₁−γ₂+n/p+1", g1, ">=", 2 * pr.s2 - pr.s1 - g2 + np_ + 1),
        Inequality("n/p > γ₂/2", np_, ">", g2 / 2),
        Inequality("s₂ ≥ γ₂/2", pr.s2, ">=", g2 / 2),
    ]


def _list_b_with_m(pr: AdmissibilityParams, g1: float, M: float) -> list[Inequality]:
    d = pr.s2 - pr.s1
    g2, np_ = pr.gamma2, pr.n_over_p
    return [
        Inequality("s₂−s₁ > 0", d, ">", 0.0),
        Inequality("s₂−s₁ < γ₁/2", d, "<", g1 / 2),
        Inequality("s₁ ≥ γ₂+M−n/p−1", pr.s1, ">=", g2 + M - np_ - 1),
        Inequality("γ₁ ≥ 2s₂−s₁−γ₂−M+n/p+1", g1, ">=", 2 * pr.s2 - pr.s1 - g2 - M + np_ + 1),
        Inequality("n/p > γ₂/2+M", np_, ">", g2 / 2 + M),
        Inequality("s₂ ≥ γ₂/2+M", pr.s2, ">=", g2 / 2 + M),
    ]


def check_admissibility(
    params: AdmissibilityParams, variant: str = "A", log_variant: bool = False, eps: float = LOG_EPS
) -> AdmissibilityResult:
    """Evaluate the selected inequality list; deterministic, never raises on bad parameters."""
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    g1 = params.gamma1 - eps if log_variant else params.gamma1
    if variant == "A":
        best = None
        for k in _k_candidates(params):
            ineqs = _list_a(params, g1, float(k))
            if all(i.holds for i in ineqs):
                return AdmissibilityResult("A", log_variant, params, ineqs, {"k": float(k)})
            best = ineqs
        return AdmissibilityResult("A", log_variant, params, best, None, ["no k in (0, γ₂] with kp < n works"])
    ineqs = _list_b(params, g1)
    witness = None
    upper = min(params.n_over_p - params.gamma2 / 2, params.s2 - params.gamma2 / 2)
    if upper > 0:
        for M in np.linspace(upper / M_GRID, upper, M_GRID):
            if all(i.holds for i in _list_b_with_m(params, g1, float(M))):
                r = -1 + params.gamma2 + M - params.n_over_p
                witness = {"M": float(M), "r": r, "r1": params.gamma2 / 2 + M, "r2": -params.gamma2 / 2}
                break
    notes = []
    if witness is None:
        notes.append("no M > 0 on the search grid satisfies the list with explicit M")
    return AdmissibilityResult("B", log_variant, params, ineqs, witness, notes)


def params_from_config(cfg) -> AdmissibilityParams:
    return AdmissibilityParams(cfg.L1.gamma, cfg.L2.gamma, cfg.n, cfg.p, cfg.s1, cfg.s2)


def uses_log_variant(cfg) -> bool:
    """g unbounded but slowly growing (the log family) selects the gamma1 - eps lists."""
    return cfg.L1.g_id == "log_half" or cfg.L2.g_id == "log_half"
