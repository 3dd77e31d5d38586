"""Adaptive quadrature engines for the catalog's left-hand sides.

Three routes cover everything the identities need:

* finite intervals: globally adaptive 15-point Gauss-Kronrod pairs with
  interval bisection, error from the Kronrod-Gauss difference;
* semi-infinite integrands: a rational map x = t/(1-t) for monotone
  envelopes, lobe partition at phase zeros plus Wynn-epsilon summation for
  oscillatory tails, and dyadic panels plus epsilon for slow algebraic
  decay;
* straight complex segments: parametrized delegation to the finite rule.

Integrands are vectorized callables (real ndarray -> complex ndarray);
panels are evaluated in batches so the integrand sees large arrays.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConvergenceError

# 15-point Kronrod nodes on [-1, 1] (ascending), Gauss-7 at the odd indices.
_XGK = np.array(
    [
        -0.991455371120813,
        -0.949107912342759,
        -0.864864423359769,
        -0.741531185599394,
        -0.586087235467691,
        -0.405845151377397,
        -0.207784955007898,
        0.0,
        0.207784955007898,
        0.405845151377397,
        0.586087235467691,
        0.741531185599394,
        0.864864423359769,
        0.949107912342759,
        0.991455371120813,
    ]
)
_WGK = np.array(
    [
        0.022935322010529,
        0.063092092629979,
        0.104790010322250,
        0.140653259715525,
        0.169004726639267,
        0.190350578064785,
        0.204432940075298,
        0.209482141084728,
        0.204432940075298,
        0.190350578064785,
        0.169004726639267,
        0.140653259715525,
        0.104790010322250,
        0.063092092629979,
        0.022935322010529,
    ]
)
_WG7 = np.array(
    [
        0.129484966168870,
        0.279705391489277,
        0.381830050505119,
        0.417959183673469,
        0.381830050505119,
        0.279705391489277,
        0.129484966168870,
    ]
)

DEFAULT_NODE_BUDGET = 2_000_000


def node_budget_default() -> int:
    """Evaluation cap; the TA_NODE_BUDGET environment variable overrides."""
    raw = os.environ.get("TA_NODE_BUDGET")
    if raw:
        try:
            return max(int(float(raw)), 15)
        except ValueError:
            pass
    return DEFAULT_NODE_BUDGET


@dataclass
class QuadResult:
    value: complex
    err_abs: float
    n_evals: int
    converged: bool

    def __iter__(self):
        yield from (self.value, self.err_abs, self.n_evals, self.converged)


@dataclass
class Integrand:
    """A vectorized integrand with optional behavior hints.

    eval         real ndarray -> complex ndarray
    phase        instantaneous oscillation phase, strictly increasing where
                 used (e.g. b*x*sqrt(x^2+c^2)); enables lobe partitioning
    phase_real   set False when phase parameters are complex; the lobe
                 route is then skipped in favor of the mapped direct route
    tail_bound   X -> upper bound on integral of |f| over [X, inf)
    tail_power   p with |f| ~ x^-p at infinity (algebraic-tail route)
    origin_power alpha with f ~ x^alpha as x -> 0+; non-smooth alpha
                 triggers a power substitution that regularizes the origin
    decay_scale  e-folding scale of the envelope (initial panel sizing)
    """

    eval: Callable[[np.ndarray], np.ndarray]
    phase: Callable[[np.ndarray], np.ndarray] | None = None
    phase_real: bool = True
    tail_bound: Callable[[float], float] | None = None
    tail_power: float | None = None
    origin_power: float | None = None
    decay_scale: float | None = None


def _wrap(f) -> Integrand:
    return f if isinstance(f, Integrand) else Integrand(eval=f)


def _gk_panels(f, lo: np.ndarray, hi: np.ndarray):
    """Evaluate GK15 on a batch of panels; returns (values, errors)."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    xs = mid[:, None] + half[:, None] * _XGK[None, :]
    fx = np.asarray(f(xs.reshape(-1)), dtype=np.complex128).reshape(xs.shape)
    k15 = (fx @ _WGK) * half
    g7 = (fx[:, 1::2] @ _WG7) * half
    return k15, np.abs(k15 - g7)


def integrate_finite(f, lo: float, hi: float, tol: float, node_budget: int | None = None) -> QuadResult:
    """Adaptive Gauss-Kronrod integration of f over [lo, hi].

    Converged means the summed Kronrod-Gauss error estimate is below
    tol*max(1, |value|).  On budget exhaustion the best value is still
    returned with converged=False.
    """
    if not lo < hi:
        raise ValueError("integrate_finite: requires lo < hi")
    if not tol > 0:
        raise ValueError("integrate_finite: requires tol > 0")
    fn = _wrap(f).eval
    budget = node_budget if node_budget is not None else node_budget_default()

    los = np.array([float(lo)])
    his = np.array([float(hi)])
    vals, errs = _gk_panels(fn, los, his)
    n_evals = 15

    while True:
        total = complex(np.sum(vals))
        err = float(np.sum(errs))
        tol_eff = tol * max(1.0, abs(total))
        if err <= tol_eff:
            return QuadResult(total, err, n_evals, True)
        if n_evals >= budget:
            return QuadResult(total, err, n_evals, False)
        # split the worst offenders, batched
        order = np.argsort(errs)[::-1]
        n_bad = int(np.sum(errs[order] > tol_eff / max(len(errs), 1)))
        k = min(max(n_bad, 1), 256, max((budget - n_evals) // 30, 1))
        idx = order[:k]
        mid = 0.5 * (los[idx] + his[idx])
        new_lo = np.concatenate([los[idx], mid])
        new_hi = np.concatenate([mid, his[idx]])
        new_vals, new_errs = _gk_panels(fn, new_lo, new_hi)
        n_evals += 15 * len(new_lo)
        keep = np.ones(len(los), dtype=bool)
        keep[idx] = False
        los = np.concatenate([los[keep], new_lo])
        his = np.concatenate([his[keep], new_hi])
        vals = np.concatenate([vals[keep], new_vals])
        errs = np.concatenate([errs[keep], new_errs])


def accelerate(partials) -> tuple[complex, float]:
    """Wynn epsilon-algorithm extrapolation of a partial-sum sequence.

    Returns (extrapolated value, residual = |last two extrapolants'
    difference|).  On numerical breakdown (division by a near-zero table
    difference before any extrapolant exists) falls back to the final
    partial sum with residual = |last term|.
    """
    s = np.asarray(list(partials), dtype=np.complex128)
    n = len(s)
    if n < 4:
        raise ValueError("accelerate: needs at least 4 partial sums")
    last_term = abs(s[-1] - s[-2])
    # column k of the epsilon table; even columns estimate the limit
    prev_prev = np.zeros(n + 1, dtype=np.complex128)  # column -1
    prev = s.copy()  # column 0
    estimates = [s[-1]]
    exact_break = False
    for k in range(1, n):
        m = n - k
        diff = prev[1 : m + 1] - prev[:m]
        if np.any(np.abs(diff) < 1e-305):
            # a vanishing difference while differencing an even column
            # means that column is (numerically) constant, i.e. exact
            exact_break = k % 2 == 1
            break
        cur = prev_prev[1 : m + 1] + 1.0 / diff
        if k % 2 == 0:
            estimates.append(cur[-1])
        prev_prev, prev = prev, cur
    if len(estimates) == 1:
        # breakdown before the first extrapolant: plain partial sum
        return complex(s[-1]), float(last_term)
    value = estimates[-1]
    residual = abs(estimates[-1] - estimates[-2])
    if exact_break:
        residual = 1e-16 * (1.0 + abs(value))
    return complex(value), float(residual)


def _find_phase_root(theta, target: float, lo: float, hi_guess: float, budget: float = 1e18):
    """Bracketed bisection for theta(x) = target on a monotone phase."""
    lo_v = float(theta(np.array([lo]))[0])
    if lo_v >= target:
        return lo
    hi = hi_guess
    for _ in range(200):
        hi_v = float(theta(np.array([hi]))[0])
        if hi_v >= target:
            break
        hi = lo + 2.0 * (hi - lo)
        if hi > budget:
            raise ConvergenceError("phase-root bracketing failed (no sign change)")
    else:
        raise ConvergenceError("phase-root bracketing failed (expansion cap)")
    a, b = lo, hi
    for _ in range(120):
        m = 0.5 * (a + b)
        if float(theta(np.array([m]))[0]) < target:
            a = m
        else:
            b = m
        if b - a <= 1e-14 * max(1.0, abs(b)):
            break
    return 0.5 * (a + b)


def _power_substitute(g: Integrand, m: int) -> Integrand:
    """Return the integrand of the substitution x = u^m on [0, inf)."""

    def ev(u):
        u = np.asarray(u, dtype=np.float64)
        x = u**m
        return g.eval(x) * (m * u ** (m - 1))

    new_phase = None
    if g.phase is not None:
        base_phase = g.phase

        def new_phase(u):
            return base_phase(np.asarray(u, dtype=np.float64) ** m)

    tb = None
    if g.tail_bound is not None:
        base_tb = g.tail_bound

        def tb(U):
            return base_tb(U**m)

    tp = None
    if g.tail_power is not None:
        tp = m * (g.tail_power - 1.0) + 1.0
    ds = None
    if g.decay_scale is not None:
        ds = max(g.decay_scale, 1e-12) ** (1.0 / m)
    return Integrand(
        eval=ev,
        phase=new_phase,
        phase_real=g.phase_real,
        tail_bound=tb,
        tail_power=tp,
        origin_power=None,
        decay_scale=ds,
    )


def _needs_origin_sub(alpha: float | None) -> int:
    """Substitution power m for a x^alpha origin (m = 1 means none)."""
    if alpha is None:
        return 1
    if alpha >= 0 and float(alpha).is_integer():
        return 1
    if alpha <= -1:
        raise ValueError("origin_power <= -1 is not integrable")
    m = max(2, math.ceil((1.0 + 1e-9) / (1.0 + alpha)))
    return min(m, 12)


def _lobe_route(g: Integrand, tol: float, budget: int) -> QuadResult:
    theta = g.phase
    t0 = float(theta(np.array([0.0]))[0])
    n_evals = 0
    edges = [0.0]
    partials: list[complex] = []
    total = 0.0 + 0.0j
    quad_err = 0.0
    lobe_tol = 0.02 * tol
    width_guess = None
    small_streak = 0
    eps_hits = 0
    prev_extrap = None
    max_lobes = 400

    for k in range(1, max_lobes + 1):
        target = t0 + k * math.pi
        prev_edge = edges[-1]
        guess = prev_edge + (width_guess if width_guess else max(prev_edge, 1.0) * 0.5 + 0.5)
        try:
            edge = _find_phase_root(theta, target, prev_edge, guess, budget=1e9)
        except ConvergenceError:
            if k == 1:
                # phase never advances a half-turn: effectively non-oscillatory
                fallback = Integrand(
                    eval=g.eval,
                    tail_bound=g.tail_bound,
                    tail_power=g.tail_power,
                    decay_scale=g.decay_scale,
                )
                if fallback.tail_bound is not None:
                    return _truncated_route(fallback, tol, budget - n_evals)
                if fallback.tail_power is not None and fallback.tail_power > 1.0:
                    return _dyadic_route(fallback, tol, budget - n_evals)
                return _mapped_route(fallback, tol, budget - n_evals)
            return QuadResult(total, quad_err + abs(total) * 0.1 + 1.0, n_evals, False)
        if edge <= prev_edge * (1 + 1e-15) + 1e-300:
            edge = prev_edge + max(1e-12, abs(prev_edge) * 1e-12)
        width_guess = edge - prev_edge
        res = integrate_finite(g.eval, prev_edge, edge, max(lobe_tol, 1e-15), node_budget=max(budget - n_evals, 15))
        n_evals += res.n_evals
        total += res.value
        quad_err += res.err_abs
        edges.append(edge)
        partials.append(total)

        scale = max(1.0, abs(total))
        if abs(res.value) <= 0.05 * tol * scale:
            small_streak += 1
            if small_streak >= 2 and k >= 3:
                # absolutely summable: remaining lobes are below tolerance
                err = quad_err + abs(res.value)
                return QuadResult(total, err, n_evals, err <= tol * scale)
        else:
            small_streak = 0

        if k >= 8:
            value, resid = accelerate(partials)
            if resid <= 0.3 * tol * max(1.0, abs(value)):
                eps_hits += 1
                if eps_hits >= 2 and prev_extrap is not None and abs(value - prev_extrap) <= tol * max(1.0, abs(value)):
                    err = 2.0 * resid + quad_err
                    return QuadResult(value, err, n_evals, err <= tol * max(1.0, abs(value)))
            else:
                eps_hits = 0
            prev_extrap = value
        if n_evals >= budget:
            if len(partials) >= 8:
                value, resid = accelerate(partials)
                return QuadResult(value, resid + quad_err, n_evals, False)
            return QuadResult(total, quad_err + abs(total), n_evals, False)

    if len(partials) >= 8:
        value, resid = accelerate(partials)
        err = resid + quad_err
        return QuadResult(value, err, n_evals, err <= tol * max(1.0, abs(value)))
    return QuadResult(total, quad_err + 1.0, n_evals, False)


def _dyadic_route(g: Integrand, tol: float, budget: int) -> QuadResult:
    x0 = max(g.decay_scale or 1.0, 1.0)
    base = integrate_finite(g.eval, 0.0, x0, 0.02 * tol, node_budget=budget)
    n_evals = base.n_evals
    total = base.value
    quad_err = base.err_abs
    partials: list[complex] = []
    prev_extrap = None
    eps_hits = 0
    lo = x0
    for k in range(64):
        hi = lo * 2.0
        res = integrate_finite(g.eval, lo, hi, 0.02 * tol, node_budget=max(budget - n_evals, 15))
        n_evals += res.n_evals
        total += res.value
        quad_err += res.err_abs
        partials.append(total)
        lo = hi
        scale = max(1.0, abs(total))
        if abs(res.value) <= 0.02 * tol * scale and k >= 2:
            # fold a geometric bound on the remaining panels into the error
            err = quad_err + 2 * abs(res.value)
            return QuadResult(total, err, n_evals, err <= tol * scale)
        if k >= 7:
            value, resid = accelerate(partials)
            if resid <= 0.3 * tol * max(1.0, abs(value)):
                eps_hits += 1
                if eps_hits >= 2 and prev_extrap is not None and abs(value - prev_extrap) <= tol * max(1.0, abs(value)):
                    err = 2.0 * resid + quad_err
                    return QuadResult(value, err, n_evals, err <= tol * max(1.0, abs(value)))
            else:
                eps_hits = 0
            prev_extrap = value
        if n_evals >= budget:
            break
    if len(partials) >= 8:
        value, resid = accelerate(partials)
        return QuadResult(value, resid + quad_err, n_evals, False)
    return QuadResult(total, quad_err + 1.0, n_evals, False)


def _mapped_route(g: Integrand, tol: float, budget: int) -> QuadResult:
    scale = max(g.decay_scale or 1.0, 1e-8)

    def ev(t):
        t = np.asarray(t, dtype=np.float64)
        x = scale * t / (1.0 - t)
        w = scale / (1.0 - t) ** 2
        return g.eval(x) * w

    return integrate_finite(ev, 0.0, 1.0 - 1e-14, tol, node_budget=budget)


def _truncated_route(g: Integrand, tol: float, budget: int) -> QuadResult:
    bound = g.tail_bound
    x_hi = max(g.decay_scale or 1.0, 1.0)
    total = 0.0 + 0.0j
    quad_err = 0.0
    n_evals = 0
    x_lo = 0.0
    for _ in range(64):
        res = integrate_finite(g.eval, x_lo, x_hi, 0.1 * tol, node_budget=max(budget - n_evals, 15))
        n_evals += res.n_evals
        total += res.value
        quad_err += res.err_abs
        tail = float(bound(x_hi))
        if tail <= 0.01 * tol * max(1.0, abs(total)):
            err = quad_err + tail
            return QuadResult(total, err, n_evals, err <= tol * max(1.0, abs(total)))
        if n_evals >= budget or x_hi > 1e12:
            return QuadResult(total, quad_err + tail, n_evals, False)
        x_lo, x_hi = x_hi, x_hi * 2.0


def integrate_semiinf(f, tol: float, node_budget: int | None = None) -> QuadResult:
    """Integrate f over [0, inf).

    Route selection: oscillatory integrands with a real phase go through
    lobe partitioning at successive phase zeros with epsilon acceleration
    of the alternating lobe series; integrands with a declared tail bound
    are truncated once the bound drops below 1e-2*tol of the accumulated
    value; slow algebraic decay uses dyadic panels plus epsilon; everything
    else is mapped to (0, 1) by x = t/(1-t).
    """
    if not tol > 0:
        raise ValueError("integrate_semiinf: requires tol > 0")
    g = _wrap(f)
    budget = node_budget if node_budget is not None else node_budget_default()

    m = _needs_origin_sub(g.origin_power)
    if m > 1:
        g = _power_substitute(g, m)

    if g.phase is not None and g.phase_real:
        return _lobe_route(g, tol, budget)
    if g.tail_bound is not None:
        return _truncated_route(g, tol, budget)
    if g.tail_power is not None and g.tail_power > 1.0:
        return _dyadic_route(g, tol, budget)
    return _mapped_route(g, tol, budget)


def integrate_contour(f, z0: complex, z1: complex, tol: float, node_budget: int | None = None) -> QuadResult:
    """Integrate an analytic f along the straight segment [z0, z1]."""
    z0 = complex(z0)
    z1 = complex(z1)
    dz = z1 - z0
    if dz == 0:
        return QuadResult(0.0 + 0.0j, 0.0, 1, True)

    def ev(t):
        t = np.asarray(t, dtype=np.float64)
        return np.asarray(f(z0 + t * dz), dtype=np.complex128) * dz

    return integrate_finite(ev, 0.0, 1.0, tol, node_budget=node_budget)
