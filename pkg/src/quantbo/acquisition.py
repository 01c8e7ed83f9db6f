"""Quantile bounds for composite predictions and baseline acquisitions.

Posterior samples of h are pushed through the known outer functions with
one fixed standard-normal matrix z per outer iteration (common random
numbers), so every acquisition surface here is a deterministic function
of (model, z, x).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, ndtri
from scipy.stats import norm

from quantbo.gp import GpSurrogate, PosteriorMoments
from quantbo.softsort import empirical_quantile, empirical_quantile_batch

SIGMA_FLOOR = 1e-12


@dataclass(frozen=True)
class QuantileConfig:
    """Sample count, sort regularization, and probability-level schedule.

    Constant schedule: upper level alpha, lower level 1 - alpha.
    Theoretical schedule: level alpha_t = 6 delta / (pi^2 (t+1)^2 (n+1) |X|)
    with upper 1 - alpha_t/2 and lower alpha_t/2.
    """

    mc_samples: int = 50
    epsilon: float = 0.1
    alpha: float = 0.95
    schedule: str = "constant"
    delta: float = 0.05
    domain_cardinality: float = 1e4

    def __post_init__(self):
        if self.mc_samples < 1:
            raise ValueError("mc_samples must be >= 1")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.schedule not in ("constant", "theoretical"):
            raise ValueError("schedule must be 'constant' or 'theoretical'")
        if self.schedule == "theoretical":
            if not 0 < self.delta < 1:
                raise ValueError("delta must lie in (0, 1)")
            if self.domain_cardinality < 1:
                raise ValueError("domain_cardinality must be >= 1")

    def levels(self, t: int, n_constraints: int):
        """(lower, upper) probability levels at iteration t."""
        if self.schedule == "constant":
            return 1.0 - self.alpha, self.alpha
        a_t = (
            6.0
            * self.delta
            / (np.pi**2 * (t + 1) ** 2 * (n_constraints + 1) * self.domain_cardinality)
        )
        a_t = min(max(a_t, 1e-15), 1.0 - 1e-15)
        return a_t / 2.0, 1.0 - a_t / 2.0

    def draw_z(self, rng, m: int) -> np.ndarray:
        return rng.standard_normal((self.mc_samples, m))


@dataclass(frozen=True)
class LinearForm:
    """g(x, y) = a(x) . y + b(x) with x-derivatives of a and b.

    a maps (..., d) -> (..., m); b maps (..., d) -> (...);
    jac_a maps (d,) -> (m, d); grad_b maps (d,) -> (d,).
    """

    a: callable
    b: callable
    jac_a: callable
    grad_b: callable


class CompositeOuter:
    """Known, cheap outer function g(x, y) with analytic derivatives.

    eval/grad_x/grad_y broadcast over leading axes: x (..., d) against
    y (..., m) with compatible leading shapes.
    """

    linear_form: LinearForm | None = None

    def eval(self, x, y):
        raise NotImplementedError

    def grad_x(self, x, y):
        raise NotImplementedError

    def grad_y(self, x, y):
        raise NotImplementedError


class LinearOuter(CompositeOuter):
    """Outer function linear in y, built from its LinearForm."""

    def __init__(self, a, b, jac_a, grad_b):
        self.linear_form = LinearForm(a=a, b=b, jac_a=jac_a, grad_b=grad_b)

    def eval(self, x, y):
        lf = self.linear_form
        return np.sum(lf.a(x) * y, axis=-1) + lf.b(x)

    def grad_y(self, x, y):
        return np.broadcast_to(self.linear_form.a(x), np.shape(y)).copy()

    def grad_x(self, x, y):
        lf = self.linear_form
        return y @ lf.jac_a(x) + lf.grad_b(x)


class FuncOuter(CompositeOuter):
    """Outer function from plain callables (eval, grad_x, grad_y)."""

    def __init__(self, eval_fn, grad_x_fn, grad_y_fn):
        self._eval = eval_fn
        self._grad_x = grad_x_fn
        self._grad_y = grad_y_fn

    def eval(self, x, y):
        return self._eval(x, y)

    def grad_x(self, x, y):
        return self._grad_x(x, y)

    def grad_y(self, x, y):
        return self._grad_y(x, y)


def sample_paths(post: PosteriorMoments, z: np.ndarray) -> np.ndarray:
    """Whitened posterior samples: row l = mean + chol @ z_l."""
    return post.mean + z @ post.chol.T


# -- quantile bounds -----------------------------------------------------


def _posterior_sig(model, x):
    pm, dmu, dchol = model.posterior_with_gradients(x)
    sig = np.sqrt(np.diag(pm.cov))
    dsig = np.array([dchol[j, j, :] for j in range(len(sig))])
    return pm, sig, dmu, dsig


def _quantile_bound_grad(g, x, model, cfg, p, z):
    """One-sided quantile bound of g(x, h(x)) and its gradient in x."""
    x = np.asarray(x, dtype=float)
    pm, sig, dmu, dsig = _posterior_sig(model, x)
    lf = g.linear_form
    if lf is not None:
        a = lf.a(x)
        muY = float(a @ pm.mean + lf.b(x))
        s2 = float(np.sum(a**2 * sig**2))
        sY = np.sqrt(s2)
        beta = ndtri(p)
        val = muY + beta * sY
        dmuY = pm.mean @ lf.jac_a(x) + lf.grad_b(x) + a @ dmu
        if sY > SIGMA_FLOOR:
            dsY = (
                (a**2 * sig) @ dsig + (a * sig**2) @ lf.jac_a(x)
            ) / sY
        else:
            dsY = np.zeros_like(x)
        return val, dmuY + beta * dsY

    if np.all(sig == 0.0):
        mu = pm.mean
        val = float(g.eval(x[None, :], mu[None, :])[0])
        grad = (
            g.grad_x(x[None, :], mu[None, :])[0]
            + g.grad_y(x[None, :], mu[None, :])[0] @ dmu
        )
        return val, grad

    paths = pm.mean + z * sig
    xb = x[None, :]
    vals = np.asarray(g.eval(xb, paths), dtype=float)
    qr = empirical_quantile(vals, p, cfg.epsilon)
    w = qr.gradient
    gx = np.broadcast_to(
        np.asarray(g.grad_x(xb, paths), dtype=float), (len(vals), len(x))
    )
    gy = np.broadcast_to(np.asarray(g.grad_y(xb, paths), dtype=float), z.shape)
    c1 = (w[:, None] * gy).sum(axis=0)
    c2 = (w[:, None] * gy * z).sum(axis=0)
    grad = w @ gx + c1 @ dmu + c2 @ dsig
    return qr.value, grad


def upper_quantile(g, x, model: GpSurrogate, cfg: QuantileConfig, t: int, z,
                   n_constraints: int = 0):
    """Upper quantile bound u(x) of g(x, h(x)) and its gradient."""
    _, p_hi = cfg.levels(t, n_constraints)
    return _quantile_bound_grad(g, x, model, cfg, p_hi, z)


def lower_quantile(g, x, model: GpSurrogate, cfg: QuantileConfig, t: int, z,
                   n_constraints: int = 0):
    """Lower quantile bound l(x) of g(x, h(x)) and its gradient."""
    p_lo, _ = cfg.levels(t, n_constraints)
    return _quantile_bound_grad(g, x, model, cfg, p_lo, z)


def quantile_bound_batch(g, X, model: GpSurrogate, cfg: QuantileConfig, p: float,
                         z) -> np.ndarray:
    """Value-only quantile bounds at a batch of candidate points."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    mean, var = model.posterior_batch(X)
    lf = g.linear_form
    if lf is not None:
        a = lf.a(X)
        muY = np.sum(a * mean, axis=-1) + lf.b(X)
        sY = np.sqrt(np.sum(a**2 * var, axis=-1))
        return muY + ndtri(p) * sY
    sig = np.sqrt(var)
    paths = mean[:, None, :] + sig[:, None, :] * z[None, :, :]
    vals = np.asarray(g.eval(X[:, None, :], paths), dtype=float)
    return empirical_quantile_batch(vals, p, cfg.epsilon)


# -- baseline acquisitions ----------------------------------------------


def _ei_parts(mu, s, incumbent):
    if s <= 0:
        return max(mu - incumbent, 0.0), 0.0, 0.0
    u = (mu - incumbent) / s
    return s * (norm.pdf(u) + u * norm.cdf(u)), norm.cdf(u), norm.pdf(u)


def eic_acquisition(model_f: GpSurrogate, incumbent: float, x, need_grad=False):
    """Expected improvement times constraint-feasibility probabilities.

    model_f holds black-box surrogates fitted directly on the scalar
    observations f_0, f_1, ..., f_n.
    """
    x = np.asarray(x, dtype=float)
    if need_grad:
        pm, sig, dmu, dsig = _posterior_sig(model_f, x)
        mu = pm.mean
    else:
        mean, var = model_f.posterior_batch(x[None, :])
        mu, sig = mean[0], np.sqrt(var[0])
    ei, dei_dmu, dei_ds = _ei_parts(mu[0], sig[0], incumbent)
    pfs = []
    for i in range(1, len(mu)):
        pfs.append(
            norm.cdf(mu[i] / sig[i]) if sig[i] > 0 else float(mu[i] >= 0)
        )
    prod_pf = float(np.prod(pfs)) if pfs else 1.0
    value = ei * prod_pf
    if not need_grad:
        return value
    grad = (dei_dmu * dmu[0] + dei_ds * dsig[0]) * prod_pf
    for i in range(1, len(mu)):
        if sig[i] <= 0:
            continue
        r = mu[i] / sig[i]
        dpf = norm.pdf(r) * (dmu[i] / sig[i] - mu[i] * dsig[i] / sig[i] ** 2)
        others = ei * float(np.prod([p for j, p in enumerate(pfs) if j != i - 1]))
        grad = grad + others * dpf
    return value, grad


def eic_acquisition_batch(model_f: GpSurrogate, incumbent: float, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    mean, var = model_f.posterior_batch(X)
    sig = np.sqrt(var)
    mu0, s0 = mean[:, 0], sig[:, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(s0 > 0, (mu0 - incumbent) / np.where(s0 > 0, s0, 1.0), 0.0)
        ei = np.where(
            s0 > 0,
            s0 * (norm.pdf(u) + u * norm.cdf(u)),
            np.maximum(mu0 - incumbent, 0.0),
        )
        value = ei
        for i in range(1, mean.shape[1]):
            pf = np.where(
                sig[:, i] > 0,
                norm.cdf(mean[:, i] / np.where(sig[:, i] > 0, sig[:, i], 1.0)),
                (mean[:, i] >= 0).astype(float),
            )
            value = value * pf
    return value


def epbo_acquisition(model_f: GpSurrogate, rho: float, beta_sqrt: float, x,
                     need_grad=False):
    """Penalized upper confidence bound on black-box surrogates."""
    x = np.asarray(x, dtype=float)
    if need_grad:
        pm, sig, dmu, dsig = _posterior_sig(model_f, x)
        mu = pm.mean
    else:
        mean, var = model_f.posterior_batch(x[None, :])
        mu, sig = mean[0], np.sqrt(var[0])
    ucb = mu + beta_sqrt * sig
    value = ucb[0] - rho * np.sum(np.maximum(-ucb[1:], 0.0))
    if not need_grad:
        return float(value)
    ducb = dmu + beta_sqrt * dsig
    grad = ducb[0].copy()
    for i in range(1, len(mu)):
        if ucb[i] < 0:
            grad += rho * ducb[i]
    return float(value), grad


def epbo_acquisition_batch(model_f: GpSurrogate, rho: float, beta_sqrt: float,
                           X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    mean, var = model_f.posterior_batch(X)
    ucb = mean + beta_sqrt * np.sqrt(var)
    return ucb[:, 0] - rho * np.sum(np.maximum(-ucb[:, 1:], 0.0), axis=1)


# -- EIC with composite functions (MC smoothed indicator) ----------------

KAPPA = 100.0
KAPPA_PLUS = 100.0


def _softplus(v):
    return np.log1p(np.exp(-np.abs(v))) + np.maximum(v, 0.0)


def _eic_cf_terms(g_all, incumbent, x, paths):
    """Per-path smoothed improvement and feasibility factors."""
    vals0 = np.asarray(g_all[0].eval(x, paths), dtype=float)
    scale0 = max(np.ptp(vals0), 1e-8)
    t0 = KAPPA_PLUS * (vals0 - incumbent) / scale0
    improvement = _softplus(t0) * scale0 / KAPPA_PLUS
    d_improvement = expit(t0)
    feas, dfeas, cons_vals = [], [], []
    for g in g_all[1:]:
        vi = np.asarray(g.eval(x, paths), dtype=float)
        si = max(np.ptp(vi), 1e-8)
        fi = expit(KAPPA * vi / si)
        feas.append(fi)
        dfeas.append(KAPPA / si * fi * (1.0 - fi))
        cons_vals.append(vi)
    return improvement, d_improvement, feas, dfeas, cons_vals


def eic_cf_acquisition(model_h: GpSurrogate, g_all, incumbent: float,
                       cfg: QuantileConfig, z, x, need_grad=False):
    """MC expected improvement with smoothed feasibility indicators,
    evaluated on composite sample paths (grey-box EIC)."""
    x = np.asarray(x, dtype=float)
    pm, sig, dmu, dsig = _posterior_sig(model_h, x)
    paths = pm.mean + z * sig
    xb = x[None, :]
    improvement, d_impr, feas, dfeas, _ = _eic_cf_terms(g_all, incumbent, xb, paths)
    feas_prod = np.ones_like(improvement)
    for fi in feas:
        feas_prod = feas_prod * fi
    L = len(improvement)
    value = float(np.mean(improvement * feas_prod))
    if not need_grad:
        return value
    d = len(x)
    grad = np.zeros(d)

    def chain(weights, g):
        gx = np.broadcast_to(np.asarray(g.grad_x(xb, paths), dtype=float), (L, d))
        gy = np.broadcast_to(np.asarray(g.grad_y(xb, paths), dtype=float), z.shape)
        c1 = (weights[:, None] * gy).sum(axis=0)
        c2 = (weights[:, None] * gy * z).sum(axis=0)
        return weights @ gx + c1 @ dmu + c2 @ dsig

    w0 = d_impr * feas_prod / L
    grad += chain(w0, g_all[0])
    for i, g in enumerate(g_all[1:]):
        others = improvement / L
        for j, fj in enumerate(feas):
            if j != i:
                others = others * fj
        grad += chain(others * dfeas[i], g)
    return value, grad


def eic_cf_acquisition_batch(model_h: GpSurrogate, g_all, incumbent: float,
                             cfg: QuantileConfig, z, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    mean, var = model_h.posterior_batch(X)
    sig = np.sqrt(var)
    paths = mean[:, None, :] + sig[:, None, :] * z[None, :, :]
    xb = X[:, None, :]
    vals0 = np.asarray(g_all[0].eval(xb, paths), dtype=float)
    scale0 = np.maximum(np.ptp(vals0, axis=1, keepdims=True), 1e-8)
    improvement = _softplus(KAPPA_PLUS * (vals0 - incumbent) / scale0)
    improvement = improvement * scale0 / KAPPA_PLUS
    out = improvement
    for g in g_all[1:]:
        vi = np.asarray(g.eval(xb, paths), dtype=float)
        si = np.maximum(np.ptp(vi, axis=1, keepdims=True), 1e-8)
        out = out * expit(KAPPA * vi / si)
    return out.mean(axis=1)
