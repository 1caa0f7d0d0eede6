"""Numerical checks of the hypotheses and bounds for the dissipation semigroup.

* :func:`check_mikhlin` - sampled sup_r |g^(k)(r)| r^k.
* :func:`check_kernel_condition` - the radial kernel integral, uniformly in t.
* :func:`check_global_integral` - divergence of int ds / (s g1^2 g2).
* :func:`verify_semigroup_lp_lq` - L^p -> L^q decay rate of exp(tL).
* :func:`verify_sobolev_smoothing` - H^{s1,p} -> H^{s2,p} decay rate.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from .fields import lp_norm, random_coeffs, sobolev_norm, to_physical
from .grid import TorusGrid
from .reports import EstimateReport, fit_loglog
from .symbols import SymbolSpec, central_derivative, kernel_integrand_fn

DEFAULT_TOL = 0.1
LOG_EPS = 0.1
MIKHLIN_R_GRID = np.logspace(-3, 6, 1801)


class DegenerateFitError(ValueError):
    pass


class QuadratureError(RuntimeError):
    pass


def _default_eps(s: SymbolSpec, eps: float | None) -> float:
    if eps is not None:
        return eps
    # unbounded g: the rates only hold with gamma replaced by gamma - eps
    return LOG_EPS if s.g_id in ("log_half", "power") else 0.0


# --------------------------------------------------------------------------
# Mikhlin-type derivative bounds


def check_mikhlin(s: SymbolSpec, k_max: int, r_grid=None, c_max: float = 1e3) -> EstimateReport:
    """sup_r |g^(k)(r)| r^k for 1 <= k <= k_max; passes iff every sup is finite and <= c_max."""
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    r = MIKHLIN_R_GRID if r_grid is None else np.asarray(r_grid, dtype=float)
    sups = {}
    for k in range(1, k_max + 1):
        vals = np.abs(s.g_derivative(r, k)) * r**k
        if not np.all(np.isfinite(vals)):
            raise QuadratureError(f"derivative of order {k} is not finite on the sample grid")
        sups[k] = float(vals.max())
    worst = max(sups.values())
    failed = [k for k, v in sups.items() if not v <= c_max]
    return EstimateReport(
        check="mikhlin",
        params={"g": s.g_id, "g_params": s.params, "k_max": k_max, "c_max": c_max},
        sample=f"{len(r)} log-spaced r in [{r.min():.3g}, {r.max():.3g}]",
        passed=not failed,
        tol=c_max,
        constant=worst,
        details={"sup_by_k": sups, "first_failing_k": failed[0] if failed else None},
    )


# --------------------------------------------------------------------------
# Kernel boundedness condition


def _kernel_integrand(s: SymbolSpec, gamma: float, n: int):
    if s.closed_form:
        return kernel_integrand_fn(s.key, float(gamma), int(n))

    def fd(r, scale):
        r = np.asarray(r, dtype=float)
        return central_derivative(lambda x: x ** (n - 1) * np.exp(-(x**gamma) / s.g(x * scale)), r, n + 1)

    return fd


def _cutoff(s: SymbolSpec, gamma: float, scales: np.ndarray) -> float:
    """Radius beyond which exp(-r^gamma/g(r s)) < 1e-30 with room for polynomial factors."""
    R = 1.0
    while True:
        if np.all(R**gamma / s.g(R * scales) > 90.0):
            return R
        R *= 2.0
        if R > 1e12:
            raise QuadratureError("could not find a cutoff radius")


def _integrate_log(fn, scales, a, b, points=()):
    """Adaptive integral over r in [a, b] of (f, |f|) for every scale, via r = e^u."""
    la, lb = math.log(a), math.log(b)

    def h(u):
        r = math.exp(u)
        v = fn(np.full(scales.shape, r), scales) * r
        return np.concatenate([v, np.abs(v)])

    pts = sorted(p for p in (math.log(x) for x in points if a < x < b))
    res, err = integrate.quad_vec(h, la, lb, epsabs=1e-13, epsrel=1e-10, points=pts or None, limit=2000)
    m = len(scales)
    return res[:m], res[m:], err


def kernel_integrals(s: SymbolSpec, gamma: float, n: int, t_grid, inner=1e-2, levels=4):
    """Signed and termwise integrals of d^{n+1}(r^{n-1} e^{-r^gamma/g(r t^{-1/gamma})}) over (0, inf).

    Returns a dict with per-t arrays ``literal`` (|signed integral|),
    ``termwise`` (integral of the absolute integrand), their convergence
    flags and the near-zero increments used for refinement-divergence
    detection.  The interval (0, inner) is covered by ``levels`` decades-of-3
    pieces; their increments must shrink geometrically.
    """
    t = np.asarray(t_grid, dtype=float)
    scales = t ** (-1.0 / gamma)
    fn = _kernel_integrand(s, gamma, n)
    R = _cutoff(s, gamma, scales)
    knees = [b / sc for b in s.breakpoints for sc in scales]
    signed, absval, _ = _integrate_log(fn, scales, inner, 1.0, knees)
    if R > 1.0:
        s2, a2, _ = _integrate_log(fn, scales, 1.0, R, knees)
        signed, absval = signed + s2, absval + a2
    inc_signed, inc_abs = [], []
    hi = inner
    for _ in range(levels):
        lo = hi * 1e-3
        s_inc, a_inc, _ = _integrate_log(fn, scales, lo, hi, knees)
        inc_signed.append(s_inc)
        inc_abs.append(a_inc)
        hi = lo
    inc_signed = np.array(inc_signed)
    inc_abs = np.array(inc_abs)

    def finish(base, incs, absincs):
        total = base + incs.sum(axis=0)
        mag = np.abs(absincs)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(mag[-2] > 0, mag[-1] / mag[-2], 0.0)
        floor = 1e-12 * np.maximum(np.abs(total), 1.0)
        converged = (ratio < 0.9) | (mag[-1] < floor)
        rho = np.clip(ratio, 0.0, 0.9)
        tail = mag[-1] * rho / (1 - rho)
        return total, converged, tail

    lit_total, lit_conv, lit_tail = finish(signed, inc_signed, inc_abs)
    term_total, term_conv, term_tail = finish(absval, inc_abs, inc_abs)
    return {
        "t": t,
        "cutoff": R,
        "literal": np.abs(lit_total),
        "literal_converged": lit_conv,
        "termwise": term_total + np.where(term_conv, term_tail, np.inf),
        "termwise_converged": term_conv,
        "increments_abs": inc_abs,
    }


def check_kernel_condition(
    s: SymbolSpec, gamma: float | None = None, n: int = 2, t_grid=None, tol: float = DEFAULT_TOL
) -> EstimateReport:
    """Boundedness in t in (0, 1) of the radial kernel integral.

    The signed integral is evaluated as written (absolute value outside);
    the termwise integral of |d^{n+1}(...)| is also computed because the
    signed one telescopes to a boundary term.  Passes iff both converge and
    the fitted t-exponent of the termwise integral is >= -tol.
    """
    gamma = s.gamma if gamma is None else float(gamma)
    t = np.logspace(-6, math.log10(0.9), 20) if t_grid is None else np.asarray(t_grid, dtype=float)
    if len(t) < 20 or t.min() <= 0 or t.max() >= 1:
        raise ValueError("t_grid must hold at least 20 points inside (0, 1)")
    res = kernel_integrals(s, gamma, n, t)
    converged = bool(np.all(res["literal_converged"]) and np.all(res["termwise_converged"]))
    params = {"g": s.g_id, "g_params": s.params, "gamma": gamma, "n": n}
    details = {
        "t": res["t"],
        "literal": res["literal"],
        "termwise": res["termwise"],
        "literal_converged": res["literal_converged"],
        "termwise_converged": res["termwise_converged"],
        "literal_sup": float(np.max(res["literal"])),
        "cutoff": res["cutoff"],
        "converged": converged,
    }
    if not converged:
        return EstimateReport(
            check="kernel_condition",
            params=params,
            sample=f"{len(t)} t in [{t.min():.3g}, {t.max():.3g}]",
            passed=False,
            tol=tol,
            constant=math.inf,
            predicted=0.0,
            details=details | {"verdict": "unbounded or non-convergent"},
        )
    slope, _ = fit_loglog(t, res["termwise"])
    return EstimateReport(
        check="kernel_condition",
        params=params,
        sample=f"{len(t)} t in [{t.min():.3g}, {t.max():.3g}]",
        passed=bool(slope >= -tol),
        tol=tol,
        constant=float(np.max(res["termwise"])),
        exponent=slope,
        predicted=0.0,
        details=details | {"verdict": "bounded" if slope >= -tol else "grows as t -> 0"},
    )


# --------------------------------------------------------------------------
# Global-existence integral


def check_global_integral(g1: SymbolSpec, g2: SymbolSpec, R_max: float = 1e8, tol: float = DEFAULT_TOL) -> EstimateReport:
    """Classify int_1^inf ds / (s g1(s)^2 g2(s)) as DIVERGENT or CONVERGENT.

    Partial integrals I(R) are accumulated on the doubling ladder R = 2^m.
    The local slope dI/dlog R is fitted against log R as C (log R)^-beta over
    the upper half of the ladder; the integral of (log R)^-beta d(log R)
    diverges iff beta <= 1, so the verdict is DIVERGENT iff beta <= 1 + tol.
    """
    if R_max < 1e6:
        raise ValueError("R_max must be >= 1e6")
    m_max = int(math.ceil(math.log2(R_max)))
    ladder = 2.0 ** np.arange(m_max + 1)

    def integrand(u):
        x = math.exp(u)
        return 1.0 / (float(g1.g(x)) ** 2 * float(g2.g(x)))

    pieces = [
        integrate.quad(integrand, math.log(a), math.log(b), epsabs=0, epsrel=1e-12)[0]
        for a, b in zip(ladder[:-1], ladder[1:])
    ]
    partial = np.concatenate([[0.0], np.cumsum(pieces)])
    slopes = np.array(pieces) / math.log(2.0)
    mid = np.sqrt(ladder[:-1] * ladder[1:])
    upper = mid >= mid[len(mid) // 2]
    if np.any(slopes[upper] <= 0):
        beta = math.inf
    else:
        b, _ = fit_loglog(np.log(mid[upper]), slopes[upper])
        beta = -b
    divergent = beta <= 1 + tol
    return EstimateReport(
        check="global_integral",
        params={"g1": g1.g_id, "g1_params": g1.params, "g2": g2.g_id, "g2_params": g2.params, "R_max": R_max},
        sample=f"doubling ladder 1..2^{m_max}",
        passed=bool(divergent),
        tol=tol,
        constant=float(partial[-1]),
        exponent=float(beta),
        predicted=1.0,
        details={
            "classification": "DIVERGENT" if divergent else "CONVERGENT",
            "R": ladder,
            "partial_integrals": partial,
            "local_slopes": slopes,
        },
    )


# --------------------------------------------------------------------------
# Semigroup decay rates


def _as_scalar_list(grid: TorusGrid, samples):
    out = []
    for f in samples or ():
        c = getattr(f, "coeffs", f)
        c = np.asarray(c)
        if c.shape == grid.shape:
            out.append(c)
        else:
            out.extend(c.reshape((-1,) + grid.shape))
    return out


def _kernel_candidate(grid: TorusGrid, s: SymbolSpec, tau: float) -> np.ndarray:
    c = np.exp(tau * s.symbol(grid.kmag)) if tau > 0 else np.ones(grid.shape)
    return c.astype(complex)


def semigroup_time_grid(grid: TorusGrid, gamma: float, count: int = 16) -> np.ndarray:
    """Times whose frequency scale t^{-1/gamma} sweeps [4, N/6]."""
    hi_k, lo_k = grid.N / 6 * grid.scale, 4.0 * grid.scale
    return np.logspace(math.log10(hi_k ** (-gamma)), math.log10(lo_k ** (-gamma)), count)


def random_samples(grid: TorusGrid, count: int = 4, sigma: float = 0.0, seed: int = 0) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    return [random_coeffs(grid, sigma, rng) for _ in range(count)]


def empirical_lp_lq(s: SymbolSpec, grid: TorusGrid, p: float, q: float, t: float, samples=()) -> tuple[float, str]:
    """max over candidate fields of ||exp(tL) f||_q / ||f||_p, and the maximiser's label.

    Candidates: the constant field, the kernels exp(c t L) delta for
    c in {0, 1/4, 1/2, 1, 2, 4}, and any supplied samples.
    """
    m = np.exp(t * s.symbol(grid.kmag))
    cands = [("constant", np.zeros(grid.shape, complex))]
    cands[0][1][(0,) * grid.n] = 1.0
    for c in (0.0, 0.25, 0.5, 1.0, 2.0, 4.0):
        cands.append((f"kernel(c={c:g})", _kernel_candidate(grid, s, c * t)))
    cands += [(f"sample{i}", f) for i, f in enumerate(samples)]
    best, label = 0.0, ""
    for name, f in cands:
        den = lp_norm(to_physical(f, grid), grid, p)
        if den == 0:
            continue
        val = lp_norm(to_physical(f * m, grid), grid, q) / den
        if val > best:
            best, label = val, name
    return best, label


def verify_semigroup_lp_lq(
    s: SymbolSpec,
    grid: TorusGrid,
    p: float,
    q: float,
    t_grid=None,
    samples=None,
    tol: float = DEFAULT_TOL,
    eps: float | None = None,
) -> EstimateReport:
    """Fitted decay exponent of the empirical L^p -> L^q norm of exp(tL).

    Predicted rate is -(n/p - n/q)/gamma.  For unbounded g the rate may
    degrade by ``eps`` (default 0.1 for log/power families).  Passes iff
    predicted - eps - tol <= slope <= predicted + tol.
    """
    if p > q:
        raise ValueError("need p <= q")
    t = semigroup_time_grid(grid, s.gamma) if t_grid is None else np.asarray(t_grid, dtype=float)
    samples = _as_scalar_list(grid, samples)
    ratios, labels = [], []
    for ti in t:
        r, lab = empirical_lp_lq(s, grid, p, q, ti, samples)
        ratios.append(r)
        labels.append(lab)
    ratios = np.array(ratios)
    usable = np.isfinite(ratios) & (ratios > 0)
    if usable.sum() < 5:
        raise DegenerateFitError(f"only {int(usable.sum())} usable t samples")
    slope, const = fit_loglog(t[usable], ratios[usable])
    n = grid.n
    inv = lambda x: 0.0 if np.isinf(x) else 1.0 / x  # noqa: E731
    predicted = -(n * inv(p) - n * inv(q)) / s.gamma
    eps = _default_eps(s, eps)
    lower = predicted - eps - tol
    return EstimateReport(
        check="semigroup_lp_lq",
        params={"g": s.g_id, "g_params": s.params, "gamma": s.gamma, "n": n, "p": p, "q": q, "N": grid.N},
        sample=f"{len(t)} t in [{t.min():.3g}, {t.max():.3g}], {len(samples)} extra samples",
        passed=bool(lower <= slope <= predicted + tol),
        tol=tol,
        constant=const,
        exponent=slope,
        predicted=predicted,
        details={"t": t, "ratio": ratios, "maximiser": labels, "eps": eps, "max_ratio": float(ratios.max())},
    )


def linf_l2_operator_norm(s: SymbolSpec, grid: TorusGrid, t: float) -> float:
    """Exact ||exp(tL)||_{L^2 -> L^inf} on the grid: (sum_k m_t(k)^2)^{1/2} / L^{n/2}."""
    m = np.exp(t * s.symbol(grid.kmag))
    return float(np.sqrt(np.sum(m**2) / grid.volume))


def _mode_candidates(grid: TorusGrid) -> list[np.ndarray]:
    """The constant field and cos(k.x) along the axis and diagonal for every retained k."""
    const = np.zeros(grid.shape, complex)
    const[(0,) * grid.n] = 1.0
    out = [const]
    kmax = (grid.N - 1) // 3
    for m in range(1, kmax + 1):
        for direction in ((1,) + (0,) * (grid.n - 1), (1,) * grid.n):
            kvec = tuple(m * d for d in direction)
            c = np.zeros(grid.shape, complex)
            c[grid.mode_index(kvec)] += 0.5
            c[grid.mode_index(tuple(-x for x in kvec))] += 0.5
            out.append(c)
    return out


def sobolev_time_grid(grid: TorusGrid, gamma: float, sigma: float, count: int = 16) -> np.ndarray:
    """Times whose maximising frequency (sigma/(gamma t))^{1/gamma} sweeps [3, N/4]."""
    sigma = sigma if sigma > 0 else 1.0
    lo_k, hi_k = 3.0 * grid.scale, grid.N / 4 * grid.scale
    return np.logspace(
        math.log10(sigma / (gamma * hi_k**gamma)), math.log10(sigma / (gamma * lo_k**gamma)), count
    )


def verify_sobolev_smoothing(
    s: SymbolSpec,
    grid: TorusGrid,
    s1: float,
    s2: float,
    p: float = 2,
    t_grid=None,
    samples=None,
    tol: float = DEFAULT_TOL,
    eps: float | None = None,
) -> EstimateReport:
    """Fitted decay exponent of the empirical H^{s1,p} -> H^{s2,p} norm of exp(tL).

    Candidates are the constant field, single cosine modes, the kernels exp(c t L) delta and any
    supplied samples.  Predicted rate is -(s2 - s1)/gamma; for unbounded g
    the band extends down to -(s2 - s1)/(gamma - eps).
    """
    if s1 > s2:
        raise ValueError("need s1 <= s2")
    sigma = s2 - s1
    t = sobolev_time_grid(grid, s.gamma, sigma) if t_grid is None else np.asarray(t_grid, dtype=float)
    extra = _as_scalar_list(grid, samples)
    modes = _mode_candidates(grid)
    ratios = []
    for ti in t:
        m = np.exp(ti * s.symbol(grid.kmag))
        cands = modes + [_kernel_candidate(grid, s, c * ti) for c in (0.5, 1.0, 2.0)] + extra
        best = 0.0
        for f in cands:
            den = sobolev_norm(f, grid, s1, p)
            if den > 0:
                best = max(best, sobolev_norm(f * m, grid, s2, p) / den)
        ratios.append(best)
    ratios = np.array(ratios)
    usable = np.isfinite(ratios) & (ratios > 0)
    if usable.sum() < 5:
        raise DegenerateFitError(f"only {int(usable.sum())} usable t samples")
    slope, const = fit_loglog(t[usable], ratios[usable])
    predicted = -sigma / s.gamma
    eps = _default_eps(s, eps)
    lower = (-sigma / (s.gamma - eps) if eps else predicted) - tol
    return EstimateReport(
        check="sobolev_smoothing",
        params={"g": s.g_id, "g_params": s.params, "gamma": s.gamma, "s1": s1, "s2": s2, "p": p, "N": grid.N},
        sample=f"{len(t)} t in [{t.min():.3g}, {t.max():.3g}], {len(modes)} modes, {len(extra)} extra samples",
        passed=bool(lower <= slope <= predicted + tol),
        tol=tol,
        constant=const,
        exponent=slope,
        predicted=predicted,
        details={"t": t, "ratio": ratios, "eps": eps},
    )
