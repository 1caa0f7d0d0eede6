"""Discrete Littlewood-Paley analysis on the torus.

Blocks are indexed j = -1, 0, ..., J with Delta_{-1} the low-frequency
piece Psi.  psi_0 is built from the C-infinity cutoff theta (1 on [0, 1],
0 on [2, inf)) as psi_0(xi) = theta(|xi|) - theta(2|xi|), so the dyadic sum
telescopes to theta(2^-J |xi|), which is exactly 1 on the grid once
2^J reaches the largest lattice radius.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .fields import l2_norm_coeffs, lp_norm, sobolev_norm, to_physical
from .grid import TorusGrid
from .reports import EstimateReport, fmt
from .spectral import dealiased_product

PARTITION_TOL = 1e-12


class PartitionError(RuntimeError):
    pass


class HypothesisError(ValueError):
    """A product-estimate or embedding precondition failed; ``failed`` names it."""

    def __init__(self, failed: str, detail: str = ""):
        self.failed = failed
        super().__init__(f"hypothesis {failed} violated{': ' + detail if detail else ''}")


def _h(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def theta(r):
    """Smooth monotone cutoff: 1 for r <= 1, 0 for r >= 2."""
    r = np.asarray(r, dtype=float)
    a, b = _h(2.0 - r), _h(r - 1.0)
    return a / (a + b)


def psi0_hat(r):
    return theta(r) - theta(2.0 * r)


def _inv(p: float) -> float:
    return 0.0 if math.isinf(p) else 1.0 / p


@dataclass(frozen=True)
class BesovParams:
    """Indices of B^s_{p,q}; use ``math.inf`` for p or q = infinity."""

    s: float
    p: float = 2.0
    q: float = 2.0

    def __post_init__(self):
        for name in ("p", "q"):
            v = getattr(self, name)
            if not (v >= 1):
                raise ValueError(f"{name} must be >= 1 or inf, got {v}")


@dataclass(frozen=True, eq=False)
class LPFilterBank:
    """psi_j multipliers for j = 0..j_max plus the low-frequency multiplier Psi."""

    grid: TorusGrid
    j_max: int
    low: np.ndarray
    blocks: tuple

    @property
    def indices(self) -> range:
        """All block indices, -1 standing for the low-frequency piece."""
        return range(-1, self.j_max + 1)

    def multiplier(self, j: int) -> np.ndarray:
        if j == -1:
            return self.low
        if not 0 <= j <= self.j_max:
            raise IndexError(f"block {j} outside 0..{self.j_max}")
        return self.blocks[j]

    def annulus(self, j: int) -> tuple[float, float]:
        """Open radial interval containing the support of psi_j."""
        return (2.0 ** (j - 1), 2.0 ** (j + 1))

    @cached_property
    def partition_residual(self) -> float:
        total = self.low + sum(self.blocks)
        return float(np.max(np.abs(1.0 - total)))


def build_filter_bank(grid: TorusGrid) -> LPFilterBank:
    """Filter bank whose blocks cover every lattice frequency of ``grid``.

    j_max is the smallest J with 2^J >= the largest lattice radius, which is
    log2(N) for n <= 3; no retained block starts above the Nyquist radius.
    """
    r = grid.kmag
    j_max = max(0, math.ceil(math.log2(float(r.max()))))
    low = theta(2.0 * r)
    blocks = tuple(psi0_hat(r * 2.0**-j) for j in range(j_max + 1))
    bank = LPFilterBank(grid, j_max, low, blocks)
    if bank.partition_residual > PARTITION_TOL:
        raise PartitionError(f"partition-of-unity residual {bank.partition_residual:.3e}")
    return bank


def _coeffs(f):
    return np.asarray(getattr(f, "coeffs", f))


def _rewrap(f, c):
    return f.replace(coeffs=c) if hasattr(f, "replace") else c


def lp_block(f, j: int, bank: LPFilterBank):
    """Delta_j f (j = -1 gives Psi * f); accepts arrays or spectral fields."""
    return _rewrap(f, _coeffs(f) * bank.multiplier(j))


def partial_sum(f, j: int, bank: LPFilterBank):
    """S_j f = sum of Delta_i f over -1 <= i <= j (zero for j < -1)."""
    c = _coeffs(f)
    if j < -1:
        return _rewrap(f, np.zeros_like(c))
    j = min(j, bank.j_max)
    mult = bank.low + sum(bank.blocks[: j + 1], np.zeros_like(bank.low))
    return _rewrap(f, c * mult)


def block_norms(f, p: float, bank: LPFilterBank) -> np.ndarray:
    """||Delta_j f||_p for j = -1..j_max."""
    c = _coeffs(f)
    g = bank.grid
    if p == 2:
        return np.array([l2_norm_coeffs(c * bank.multiplier(j), g) for j in bank.indices])
    return np.array([lp_norm(to_physical(c * bank.multiplier(j), g), g, p) for j in bank.indices])


def besov_norm(f, params: BesovParams, bank: LPFilterBank) -> float:
    """||Psi * f||_p + || (2^{js} ||Delta_j f||_p)_j ||_{l^q}."""
    norms = block_norms(f, params.p, bank)
    weighted = 2.0 ** (params.s * np.arange(bank.j_max + 1)) * norms[1:]
    if math.isinf(params.q):
        tail = float(weighted.max(initial=0.0))
    else:
        tail = float(np.sum(weighted**params.q) ** (1.0 / params.q))
    return float(norms[0]) + tail


def paraproduct_decompose(f, g, bank: LPFilterBank):
    """(T_f g, T_g f, R(f, g)) for scalar coefficient arrays.

    T_f g = sum_k S_{k-3} f Delta_k g and R = sum_k Delta_k f sum_{|l|<=2} Delta_{k+l} g,
    all products dealiased, so the three pieces sum to the dealiased f g.
    """
    a, b = _coeffs(f), _coeffs(g)
    grid = bank.grid
    if a.shape != grid.shape or b.shape != grid.shape:
        raise ValueError("paraproduct needs scalar fields on the bank's grid")
    da = {j: a * bank.multiplier(j) for j in bank.indices}
    db = {j: b * bank.multiplier(j) for j in bank.indices}
    zero = np.zeros(grid.shape, complex)
    tfg, tgf, rem = zero.copy(), zero.copy(), zero.copy()
    for k in bank.indices:
        if k - 3 >= -1:
            tfg += dealiased_product(partial_sum(a, k - 3, bank), db[k], grid)
            tgf += dealiased_product(partial_sum(b, k - 3, bank), da[k], grid)
        near = sum((db[k + l] for l in range(-2, 3) if k + l in db), zero)
        rem += dealiased_product(da[k], near, grid)
    return tfg, tgf, rem


# --------------------------------------------------------------------------
# Randomised estimate checks


def _ratio_report(check, params, ratios, c_max, extra=None) -> EstimateReport:
    ratios = np.asarray(ratios, dtype=float)
    used = ratios[np.isfinite(ratios)]
    worst = float(used.max()) if used.size else 0.0
    return EstimateReport(
        check=check,
        params=params,
        sample=f"{used.size} of {ratios.size} pairs used",
        passed=bool(worst <= c_max),
        tol=c_max,
        constant=worst,
        details={"ratios": ratios} | (extra or {}),
    )


def holder_split_ok(p, p1, p2, q1, q2) -> bool:
    lhs = _inv(p)
    return math.isclose(lhs, _inv(p1) + _inv(p2), abs_tol=1e-12) and math.isclose(
        lhs, _inv(q1) + _inv(q2), abs_tol=1e-12
    )


def verify_product_est_standard(
    pairs, s: float, p: float, q: float, split, bank: LPFilterBank, c_max: float = 100.0
) -> EstimateReport:
    """max ||fg||_{B^s_{p,q}} / (||f||_{p1} ||g||_{B^s_{p2,q}} + ||f||_{B^s_{q1,q}} ||g||_{q2}).

    Args:
        pairs: iterable of (f, g) scalar coefficient arrays.
        split: (p1, p2, q1, q2) with 1/p = 1/p1 + 1/p2 = 1/q1 + 1/q2.

    Pairs with a vanishing denominator are skipped (recorded as nan).
    """
    if s <= 0:
        raise HypothesisError("s>0", f"s={s}")
    p1, p2, q1, q2 = split
    if not holder_split_ok(p, p1, p2, q1, q2):
        raise HypothesisError("1/p=1/p1+1/p2=1/q1+1/q2", f"p={p}, split={split}")
    grid = bank.grid
    ratios = []
    for f, g in pairs:
        f, g = _coeffs(f), _coeffs(g)
        den = lp_norm(to_physical(f, grid), grid, p1) * besov_norm(g, BesovParams(s, p2, q), bank) + besov_norm(
            f, BesovParams(s, q1, q), bank
        ) * lp_norm(to_physical(g, grid), grid, q2)
        if den == 0:
            ratios.append(math.nan)
            continue
        ratios.append(besov_norm(dealiased_product(f, g, grid), BesovParams(s, p, q), bank) / den)
    params = {"s": s, "p": p, "q": q, "split": list(split), "N": grid.N, "n": grid.n}
    return _ratio_report("product_est_standard", params, ratios, c_max)


def chemin_index(s1, s2, p1, p2, p, n) -> float:
    """Target regularity s = s1 + s2 - n (1/p1 + 1/p2 - 1/p), after checking the hypotheses."""
    if not _inv(p) <= _inv(p1) + _inv(p2) + 1e-12:
        raise HypothesisError("1/p<=1/p1+1/p2")
    if not s1 < n * _inv(p1):
        raise HypothesisError("s1<n/p1", f"s1={s1}, n/p1={n * _inv(p1)}")
    if not s2 < n * _inv(p2):
        raise HypothesisError("s2<n/p2", f"s2={s2}, n/p2={n * _inv(p2)}")
    if not s1 + s2 > 0:
        raise HypothesisError("s1+s2>0", f"s1+s2={s1 + s2}")
    return s1 + s2 - n * (_inv(p1) + _inv(p2) - _inv(p))


def verify_product_est_chemin(
    pairs, s1, s2, p1, p2, p, q, bank: LPFilterBank, c_max: float = 100.0
) -> EstimateReport:
    """max ||fg||_{B^s_{p,q}} / (||f||_{B^{s1}_{p1,q}} ||g||_{B^{s2}_{p2,q}})."""
    grid = bank.grid
    s = chemin_index(s1, s2, p1, p2, p, grid.n)
    ratios = []
    for f, g in pairs:
        f, g = _coeffs(f), _coeffs(g)
        den = besov_norm(f, BesovParams(s1, p1, q), bank) * besov_norm(g, BesovParams(s2, p2, q), bank)
        if den == 0:
            ratios.append(math.nan)
            continue
        ratios.append(besov_norm(dealiased_product(f, g, grid), BesovParams(s, p, q), bank) / den)
    params = {"s1": s1, "s2": s2, "p1": p1, "p2": p2, "p": p, "q": q, "s": s, "N": grid.N, "n": grid.n}
    return _ratio_report("product_est_chemin", params, ratios, c_max)


# --------------------------------------------------------------------------
# Embeddings

EMBEDDINGS = ("regularity", "integrability", "sobolev", "hilbert")


@dataclass(frozen=True)
class EmbeddingPair:
    """||f||_lhs <= C ||f||_rhs.  For ``sobolev`` and ``hilbert`` the lhs is H^{s,p} (q unused)."""

    kind: str
    lhs: BesovParams
    rhs: BesovParams

    def validate(self, n: int):
        a, b = self.lhs, self.rhs
        if self.kind == "regularity":
            if a.p != b.p:
                raise HypothesisError("equal p", f"{a.p} != {b.p}")
            if not b.q <= a.q:
                raise HypothesisError("q1<=q2")
            if not a.s <= b.s:
                raise HypothesisError("beta1<=beta2")
        elif self.kind == "integrability":
            if a.q != b.q:
                raise HypothesisError("equal q")
            if not b.p <= a.p:
                raise HypothesisError("p1<=p2")
            if not math.isclose(b.s, a.s + n * (_inv(b.p) - _inv(a.p)), abs_tol=1e-12):
                raise HypothesisError("gamma1=gamma2+n(1/p1-1/p2)")
        elif self.kind == "sobolev":
            if a.p != b.p:
                raise HypothesisError("equal p")
            if not b.s > a.s > 0:
                raise HypothesisError("r>s>0")
        elif self.kind == "hilbert":
            if not (a.p == b.p == b.q == 2 and a.s == b.s):
                raise HypothesisError("H^{s,2} against B^s_{2,2}")
        else:
            raise ValueError(f"unknown embedding kind {self.kind!r}")


def _lhs_norm(pair: EmbeddingPair, f, bank):
    if pair.kind in ("sobolev", "hilbert"):
        return sobolev_norm(_coeffs(f), bank.grid, pair.lhs.s, pair.lhs.p)
    return besov_norm(f, pair.lhs, bank)


def verify_embeddings(samples, pairs, bank: LPFilterBank, c_max: float = 10.0) -> list[EstimateReport]:
    """One report per pair: max over samples of ||f||_lhs / ||f||_rhs.

    ``hilbert`` pairs are an equivalence, so they pass iff every ratio lies
    in [1/c_max, c_max]; the others pass iff the max ratio is <= c_max.
    """
    reports = []
    for pair in pairs:
        pair.validate(bank.grid.n)
        ratios = []
        for f in samples:
            den = besov_norm(f, pair.rhs, bank)
            ratios.append(math.nan if den == 0 else _lhs_norm(pair, f, bank) / den)
        params = {"kind": pair.kind, "lhs": vars(pair.lhs), "rhs": vars(pair.rhs), "N": bank.grid.N}
        rep = _ratio_report("embedding", params, ratios, c_max)
        r = np.asarray(ratios)
        lo = float(np.nanmin(r)) if np.any(np.isfinite(r)) else 0.0
        rep.details["min_ratio"] = lo
        if pair.kind == "hilbert":
            rep.passed = bool(rep.passed and lo >= 1.0 / c_max)
        reports.append(rep)
    return reports


# --------------------------------------------------------------------------
# Norm sweeps

SWEEP_COLUMNS = ("sample_id", "s", "p", "q", "norm")


def norm_sweep(samples, params_list, bank: LPFilterBank) -> list[tuple]:
    """Rows (sample_id, s, p, q, norm) over the cartesian product, in input order."""
    return [(i, b.s, b.p, b.q, besov_norm(f, b, bank)) for i, f in enumerate(samples) for b in params_list]


def sweep_to_csv(rows, path=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for i, s, p, q, v in rows:
        w.writerow([i, fmt(s), fmt(p), fmt(q), fmt(v)])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text
