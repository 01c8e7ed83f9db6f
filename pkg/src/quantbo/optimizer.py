"""Multi-start box-constrained maximization of acquisition surfaces.

Sobol candidates score the surface cheaply; a Boltzmann draw picks the
local-ascent starts; scipy's bounded quasi-Newton solver polishes each
start (the penalty hinge is non-smooth, so iterates use the one-sided
subgradient at kinks).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc


class OptimizerError(RuntimeError):
    pass


@dataclass(frozen=True)
class MultiStartConfig:
    n_raw: int = 8192
    n_starts: int = 3
    eta: float = 1.0
    max_local_iters: int = 200
    convergence_tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.n_starts > self.n_raw:
            raise ValueError("n_starts must not exceed n_raw")
        if not (self.max_local_iters > 0 and self.convergence_tol > 0):
            raise ValueError("iteration budget and tolerance must be positive")


def sobol_candidates(box, n: int, seed: int) -> np.ndarray:
    """n scrambled-Sobol points inside the box; deterministic per seed."""
    box = np.asarray(box, dtype=float)
    d = box.shape[0]
    with warnings.catch_warnings():
        # Non-power-of-two sample counts only cost balance, not validity.
        warnings.simplefilter("ignore", UserWarning)
        sampler = qmc.Sobol(d, scramble=True, seed=seed)
        unit = sampler.random(n)
    return box[:, 0] + unit * (box[:, 1] - box[:, 0])


def boltzmann_select(values, n_opt: int, eta: float, seed) -> np.ndarray:
    """Indices sampled without replacement with p_i proportional to
    exp(eta * (v_i - mean) / std); std = 0 degenerates to uniform."""
    values = np.asarray(values, dtype=float)
    if np.isnan(values).any():
        raise ValueError("values contain NaN")
    if n_opt > len(values):
        raise ValueError("n_opt exceeds candidate count")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    std = values.std()
    if std == 0.0 or eta == 0.0:
        logits = np.zeros(len(values))
    else:
        logits = eta * (values - values.mean()) / std
    # Gumbel top-k draw: equivalent to sequential sampling without
    # replacement with p ~ exp(logits), but immune to exp underflow at
    # large eta.
    gumbel = -np.log(-np.log(rng.uniform(size=len(values))))
    return np.argsort(logits + gumbel)[::-1][:n_opt]


def maximize_penalized(surface, box, cfg: MultiStartConfig, surface_batch=None):
    """Best of n_starts local ascents from Boltzmann-selected Sobol starts.

    surface maps x to (value, gradient); surface_batch, when provided,
    maps an (N, d) array to N values and is used only for candidate
    scoring.  Returns (x, value) with x clipped to the box.
    """
    box = np.asarray(box, dtype=float)
    cands = sobol_candidates(box, cfg.n_raw, cfg.seed)
    if surface_batch is not None:
        values = np.asarray(surface_batch(cands), dtype=float)
    else:
        values = np.array([surface(c)[0] for c in cands])
    idx = boltzmann_select(values, cfg.n_starts, cfg.eta, cfg.seed)

    def negated(x):
        v, g = surface(x)
        return -v, -np.asarray(g, dtype=float)

    best_x, best_v = None, -np.inf
    failures = []
    for i in idx:
        x0 = cands[i]
        try:
            v0, _ = surface(x0)
            if v0 > best_v:
                best_x, best_v = x0, v0
            res = minimize(
                negated,
                x0,
                jac=True,
                method="L-BFGS-B",
                bounds=list(zip(box[:, 0], box[:, 1])),
                options={
                    "maxiter": cfg.max_local_iters,
                    "ftol": cfg.convergence_tol * 1e-3,
                    "gtol": cfg.convergence_tol,
                },
            )
        except Exception as exc:  # noqa: BLE001 - diagnostics gathered below
            failures.append((i, repr(exc)))
            continue
        xc = np.clip(res.x, box[:, 0], box[:, 1])
        vc, _ = surface(xc)
        if vc > best_v:
            best_x, best_v = xc, vc
    if best_x is None:
        raise OptimizerError(f"all local ascents failed: {failures}")
    return best_x, float(best_v)
