"""Multi-output GP regression with independent outputs.

Zero prior mean, Matern-3/2 ARD kernel, Gaussian noise, MLE fitting with
analytic gradients.  Outputs are standardized internally; all public
quantities are in original units.  Fitted surrogates are immutable and
safe to share across threads for read-only queries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize

SQRT3 = np.sqrt(3.0)

JITTER_START = 1e-10
JITTER_MAX = 1e-4
JITTER_GROWTH = 10.0


class NumericalError(RuntimeError):
    pass


@dataclass(frozen=True)
class KernelHyper:
    """Matern-3/2 ARD hyperparameters in original input/output units."""

    lengthscales: np.ndarray
    signal_variance: float
    noise_variance: float

    def __post_init__(self):
        ls = np.asarray(self.lengthscales, dtype=float)
        object.__setattr__(self, "lengthscales", ls)
        if not np.all(ls > 0):
            raise ValueError("lengthscales must be strictly positive")
        if not self.signal_variance > 0:
            raise ValueError("signal_variance must be positive")
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be non-negative")


@dataclass(frozen=True)
class Dataset:
    """Paired inputs (t, d) and observations (t, m)."""

    inputs: np.ndarray
    outputs: np.ndarray

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        Y = np.atleast_2d(np.asarray(self.outputs, dtype=float))
        if X.shape[0] != Y.shape[0]:
            raise ValueError("inputs and outputs must have equal length")
        object.__setattr__(self, "inputs", X)
        object.__setattr__(self, "outputs", Y)

    @property
    def count(self) -> int:
        return self.inputs.shape[0]

    def append(self, x, y) -> "Dataset":
        return Dataset(
            inputs=np.vstack([self.inputs, np.atleast_2d(x)]),
            outputs=np.vstack([self.outputs, np.atleast_2d(y)]),
        )


@dataclass(frozen=True)
class PosteriorMoments:
    """Joint posterior mean/covariance at one input (diagonal covariance)."""

    mean: np.ndarray
    cov: np.ndarray
    chol: np.ndarray


def kernel_eval(hyper: KernelHyper, x, x2) -> float:
    """Matern-3/2 ARD covariance between two points."""
    x = np.asarray(x, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if x.shape != x2.shape or x.shape[-1] != hyper.lengthscales.shape[0]:
        raise ValueError("dimension mismatch between points and lengthscales")
    r = np.sqrt(np.sum(((x - x2) / hyper.lengthscales) ** 2))
    return float(hyper.signal_variance * (1.0 + SQRT3 * r) * np.exp(-SQRT3 * r))


def _kernel_matrix(X, X2, ls, sv):
    diff = X[:, None, :] - X2[None, :, :]
    r = np.sqrt(np.sum((diff / ls) ** 2, axis=-1))
    return sv * (1.0 + SQRT3 * r) * np.exp(-SQRT3 * r)


def _chol_with_jitter(K, sv, index):
    jitter = JITTER_START * sv
    limit = JITTER_MAX * max(sv, 1.0)
    while True:
        try:
            L = cholesky(K + jitter * np.eye(K.shape[0]), lower=True)
            return L, jitter
        except np.linalg.LinAlgError:
            jitter *= JITTER_GROWTH
            if jitter > limit:
                raise NumericalError(
                    f"Cholesky failed for output {index} after max jitter"
                ) from None


def _nll_and_grad(params, X, y, fixed_log_noise):
    """Negative log marginal likelihood and gradient in log-hyperparameters."""
    d = X.shape[1]
    t = X.shape[0]
    log_ls = params[:d]
    log_sv = params[d]
    log_noise = params[d + 1] if fixed_log_noise is None else fixed_log_noise
    ls = np.exp(log_ls)
    sv = np.exp(log_sv)
    noise = np.exp(log_noise)

    diff = X[:, None, :] - X[None, :, :]
    scaled2 = (diff / ls) ** 2
    r = np.sqrt(np.sum(scaled2, axis=-1))
    E = np.exp(-SQRT3 * r)
    Kf = sv * (1.0 + SQRT3 * r) * E
    K = Kf + (noise + JITTER_START * sv) * np.eye(t)
    try:
        L = cholesky(K, lower=True)
    except np.linalg.LinAlgError:
        return 1e25, np.zeros_like(params)
    alpha = cho_solve((L, True), y)
    nll = (
        0.5 * float(y @ alpha)
        + float(np.sum(np.log(np.diag(L))))
        + 0.5 * t * np.log(2 * np.pi)
    )
    Kinv = cho_solve((L, True), np.eye(t))
    A = Kinv - np.outer(alpha, alpha)

    grad = np.zeros_like(params)
    W = 3.0 * sv * E
    AW = A * W
    for k in range(d):
        # dK/dlog ls_k = 3 sv exp(-sqrt3 r) * diff_k^2 / ls_k^2
        grad[k] = 0.5 * np.sum(AW * scaled2[:, :, k])
    grad[d] = 0.5 * np.sum(A * Kf)
    if fixed_log_noise is None:
        grad[d + 1] = 0.5 * noise * np.trace(A)
    return nll, grad


@dataclass(frozen=True)
class GpSurrogate:
    """Fitted multi-output GP with per-output independent posteriors."""

    data: Dataset
    hypers: tuple
    _y_mean: np.ndarray = field(repr=False)
    _y_scale: np.ndarray = field(repr=False)
    _std_hypers: tuple = field(repr=False)
    _chols: tuple = field(repr=False)
    _alphas: tuple = field(repr=False)
    _jitters: tuple = field(repr=False)

    # -- fitting ---------------------------------------------------------

    @staticmethod
    def from_hypers(data: Dataset, hypers) -> "GpSurrogate":
        """Build a surrogate with given hyperparameters (no fitting)."""
        X, Y = data.inputs, data.outputs
        m = Y.shape[1]
        hypers = tuple(hypers)
        if len(hypers) != m:
            raise ValueError("need one KernelHyper per output")
        y_mean = np.zeros(m)
        y_scale = np.ones(m)
        chols, alphas, jitters = [], [], []
        for j, h in enumerate(hypers):
            K = _kernel_matrix(X, X, h.lengthscales, h.signal_variance)
            K = K + h.noise_variance * np.eye(X.shape[0])
            L, jit = _chol_with_jitter(K, h.signal_variance, j)
            chols.append(L)
            alphas.append(cho_solve((L, True), Y[:, j]))
            jitters.append(jit)
        return GpSurrogate(
            data=data,
            hypers=hypers,
            _y_mean=y_mean,
            _y_scale=y_scale,
            _std_hypers=hypers,
            _chols=tuple(chols),
            _alphas=tuple(alphas),
            _jitters=tuple(jitters),
        )

    @staticmethod
    def fit_mle(
        data: Dataset,
        restarts: int = 8,
        seed: int = 0,
        fixed_noise: float | None = None,
        warm_start=None,
    ) -> "GpSurrogate":
        """Best-of-restarts MLE fit; deterministic given (data, seed, restarts).

        fixed_noise pins the noise variance (original units) instead of
        fitting it.  warm_start injects previous hyperparameters as an
        extra initialization.
        """
        X, Y = data.inputs, data.outputs
        t, d = X.shape
        m = Y.shape[1]
        if t < 2:
            raise ValueError("need at least two data points to fit")
        if not np.all(np.isfinite(Y)):
            raise ValueError("outputs must be finite")

        widths = X.max(axis=0) - X.min(axis=0)
        widths = np.where(widths > 1e-12, widths, 1.0)
        y_mean = Y.mean(axis=0)
        y_scale = Y.std(axis=0)
        y_scale = np.where(y_scale > 1e-12, y_scale, 1.0)

        lb = np.concatenate([np.log(1e-3 * widths), [np.log(1e-6)], [np.log(1e-8)]])
        ub = np.concatenate([np.log(1e3 * widths), [np.log(1e6)], [np.log(1e2)]])

        std_hypers = []
        hypers = []
        chols, alphas, jitters = [], [], []
        for j in range(m):
            y = (Y[:, j] - y_mean[j]) / y_scale[j]
            rng = np.random.default_rng(np.random.SeedSequence((seed, j)))
            if fixed_noise is None:
                fixed_log_noise = None
            else:
                std_noise = fixed_noise / y_scale[j] ** 2
                fixed_log_noise = np.log(max(std_noise, 1e-300))

            inits = [np.concatenate([np.log(widths), [0.0], [np.log(1e-2)]])]
            if warm_start is not None:
                w = warm_start[j]
                inits.append(
                    np.concatenate(
                        [
                            np.log(w.lengthscales),
                            [np.log(max(w.signal_variance / y_scale[j] ** 2, 1e-6))],
                            [np.log(max(w.noise_variance / y_scale[j] ** 2, 1e-8))],
                        ]
                    )
                )
            while len(inits) < restarts:
                inits.append(
                    np.concatenate(
                        [
                            np.log(widths) + rng.uniform(np.log(0.1), np.log(2.0), d),
                            [rng.uniform(np.log(0.1), np.log(10.0))],
                            [rng.uniform(np.log(1e-6), np.log(0.5))],
                        ]
                    )
                )

            best = None
            for x0 in inits:
                x0 = np.clip(x0, lb, ub)
                res = minimize(
                    _nll_and_grad,
                    x0,
                    args=(X, y, fixed_log_noise),
                    jac=True,
                    method="L-BFGS-B",
                    bounds=list(zip(lb, ub)),
                    options={"maxiter": 200},
                )
                if best is None or res.fun < best.fun:
                    best = res
            p = best.x
            ls = np.exp(p[:d])
            sv = float(np.exp(p[d]))
            if fixed_log_noise is None:
                noise = float(np.exp(p[d + 1]))
            else:
                noise = float(np.exp(fixed_log_noise)) if fixed_noise > 0 else 0.0
            std_h = KernelHyper(ls, sv, noise if noise > 0 else 0.0)
            std_hypers.append(std_h)
            hypers.append(
                KernelHyper(ls, sv * y_scale[j] ** 2, noise * y_scale[j] ** 2)
            )
            K = _kernel_matrix(X, X, ls, sv) + noise * np.eye(t)
            L, jit = _chol_with_jitter(K, sv, j)
            chols.append(L)
            alphas.append(cho_solve((L, True), y))
            jitters.append(jit)

        return GpSurrogate(
            data=data,
            hypers=tuple(hypers),
            _y_mean=y_mean,
            _y_scale=y_scale,
            _std_hypers=tuple(std_hypers),
            _chols=tuple(chols),
            _alphas=tuple(alphas),
            _jitters=tuple(jitters),
        )

    # -- prediction ------------------------------------------------------

    @property
    def n_outputs(self) -> int:
        return self.data.outputs.shape[1]

    def posterior_batch(self, X):
        """Latent posterior mean and variance at a batch of inputs.

        Returns (mean (N, m), var (N, m)) in original units.
        """
        X = np.atleast_2d(np.asarray(X, dtype=float))
        N = X.shape[0]
        m = self.n_outputs
        mean = np.empty((N, m))
        var = np.empty((N, m))
        Xt = self.data.inputs
        for j in range(m):
            h = self._std_hypers[j]
            ks = _kernel_matrix(X, Xt, h.lengthscales, h.signal_variance)
            mean[:, j] = ks @ self._alphas[j]
            V = solve_triangular(self._chols[j], ks.T, lower=True)
            var[:, j] = np.maximum(h.signal_variance - np.sum(V * V, axis=0), 0.0)
        mean = self._y_mean + self._y_scale * mean
        var = var * self._y_scale**2
        return mean, var

    def posterior(self, x) -> PosteriorMoments:
        mean, var = self.posterior_batch(np.atleast_2d(x))
        cov = np.diag(var[0])
        return PosteriorMoments(mean=mean[0], cov=cov, chol=np.diag(np.sqrt(var[0])))

    def posterior_with_gradients(self, x):
        """Posterior plus analytic d(mean)/dx (m, d) and d(chol)/dx (m, m, d)."""
        x = np.asarray(x, dtype=float)
        d = x.shape[0]
        m = self.n_outputs
        Xt = self.data.inputs
        mean = np.empty(m)
        var = np.empty(m)
        dmean = np.empty((m, d))
        dvar = np.empty((m, d))
        for j in range(m):
            h = self._std_hypers[j]
            diff = x[None, :] - Xt
            scaled2 = (diff / h.lengthscales) ** 2
            r = np.sqrt(np.sum(scaled2, axis=-1))
            E = np.exp(-SQRT3 * r)
            ks = h.signal_variance * (1.0 + SQRT3 * r) * E
            # dks/dx = -3 sv exp(-sqrt3 r) * diff / ls^2 per training point
            dks = -3.0 * h.signal_variance * E[:, None] * diff / h.lengthscales**2
            alpha = self._alphas[j]
            mean[j] = ks @ alpha
            dmean[j] = dks.T @ alpha
            Kinv_ks = cho_solve((self._chols[j], True), ks)
            var[j] = max(h.signal_variance - float(ks @ Kinv_ks), 0.0)
            dvar[j] = -2.0 * (dks.T @ Kinv_ks)

        floor = 1e-12 * np.array([h.signal_variance for h in self._std_hypers])
        sig = np.sqrt(np.maximum(var, floor))
        dsig = dvar / (2.0 * sig[:, None])

        mean_o = self._y_mean + self._y_scale * mean
        var_o = var * self._y_scale**2
        pm = PosteriorMoments(
            mean=mean_o, cov=np.diag(var_o), chol=np.diag(np.sqrt(var_o))
        )
        dmean_o = self._y_scale[:, None] * dmean
        dchol = np.zeros((m, m, d))
        for j in range(m):
            dchol[j, j, :] = self._y_scale[j] * dsig[j]
        return pm, dmean_o, dchol
