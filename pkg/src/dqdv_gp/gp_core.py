"""Exact GP regression over Q(V).

Conditioning on training data, log marginal likelihood with analytic
gradients in log-hyperparameter space, and multi-start quasi-Newton
hyperparameter optimization.

Inputs are centered and outputs standardized internally (jitter and
optimizer bounds then live on a unit scale); hyperparameters and all
returned values are in natural units.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize

from .errors import AllStartsFailed, FactorizationFailure, NonFinite
from .kernel import Hyperparams, jitter_for, kernel_matrix

__all__ = ["TrainingSet", "FittedGP", "log_marginal_likelihood", "fit", "posterior_mean"]

# large finite penalty returned to the optimizer when a Cholesky fails;
# keeps L-BFGS-B line searches well-behaved
_PENALTY = 1e25

_STD_FLOOR = 1e-12


@dataclass(frozen=True)
class TrainingSet:
    """Ordered (voltage, charge) training pairs with centering offsets."""

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        if xs.ndim != 1 or ys.ndim != 1 or len(xs) != len(ys):
            raise ValueError("xs and ys must be 1-d arrays of equal length")
        if len(xs) < 1:
            raise ValueError("training set must contain at least one point")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise ValueError("training data must be finite")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("xs must be strictly increasing (merge duplicates upstream)")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def x_mean(self):
        return float(self.xs.mean())

    @property
    def y_mean(self):
        return float(self.ys.mean())

    @property
    def y_std(self):
        return max(float(np.std(self.ys)), _STD_FLOOR)

    def __len__(self):
        return len(self.xs)


@dataclass(frozen=True)
class FittedGP:
    """Trained GP state: hyperparameters, Cholesky factor, and weights.

    The factorization lives in standardized units: chol is the lower factor
    of K(X,X) + (sigma_n^2 + jitter) I built from ``hp_internal`` over
    centered inputs, and alpha solves it against the standardized targets.
    Immutable and safe to share across threads.
    """

    hp: Hyperparams
    train: TrainingSet
    chol: np.ndarray
    alpha: np.ndarray
    lml: float

    @property
    def xs_centered(self):
        return self.train.xs - self.train.x_mean

    @property
    def hp_internal(self) -> Hyperparams:
        """Hyperparameters in standardized output units."""
        s = self.train.y_std
        return Hyperparams(self.hp.length_scale, self.hp.signal_std / s, self.hp.noise_std / s)


def _internal_hp(train, hp):
    s = train.y_std
    return Hyperparams(hp.length_scale, hp.signal_std / s, hp.noise_std / s)


def _noisy_gram(xs_c, hp_i):
    kf = kernel_matrix(xs_c, xs_c, hp_i, "VV")
    kn = kf + (hp_i.noise_std**2 + jitter_for(hp_i)) * np.eye(len(xs_c))
    return kf, kn


def _factorize(kn):
    try:
        return cholesky(kn, lower=True)
    except np.linalg.LinAlgError as exc:
        raise FactorizationFailure(str(exc)) from exc


def _scaled_state(train, hp):
    hp_i = _internal_hp(train, hp)
    xs_c = train.xs - train.x_mean
    ys_s = (train.ys - train.y_mean) / train.y_std
    kf, kn = _noisy_gram(xs_c, hp_i)
    chol = _factorize(kn)
    alpha = cho_solve((chol, True), ys_s)
    lml_scaled = (
        -0.5 * float(ys_s @ alpha)
        - float(np.sum(np.log(np.diag(chol))))
        - 0.5 * len(train) * np.log(2.0 * np.pi)
    )
    return hp_i, xs_c, ys_s, kf, chol, alpha, lml_scaled


def log_marginal_likelihood(train: TrainingSet, hp: Hyperparams):
    """LML of the centered data and its gradient w.r.t. log-hyperparameters.

    Returns (value, grad) with grad ordered (log l, log sigma_f, log sigma_n);
    the value is in natural units (standardization only changes it by the
    constant N log std).  Raises FactorizationFailure when the noisy Gram
    matrix is not positive definite after jitter.
    """
    hp_i, xs_c, ys_s, kf, chol, alpha, lml_scaled = _scaled_state(train, hp)
    n = len(train)
    lml = lml_scaled - n * np.log(train.y_std)

    # d LML / d theta = 0.5 tr((alpha alpha^T - Kn^-1) dKn/dtheta)
    kn_inv = cho_solve((chol, True), np.eye(n))
    inner = np.outer(alpha, alpha) - kn_inv

    sq = (xs_c[:, None] - xs_c[None, :]) ** 2 / hp.length_scale**2
    d_ell = kf * sq                        # dKn / d log l
    d_sf = 2.0 * kf                        # dKn / d log sigma_f
    d_sn_diag = 2.0 * hp_i.noise_std**2    # dKn / d log sigma_n (diagonal)

    grad = np.array(
        [
            0.5 * float(np.sum(inner * d_ell)),
            0.5 * float(np.sum(inner * d_sf)),
            0.5 * d_sn_diag * float(np.trace(inner)),
        ]
    )
    return lml, grad


def _condition(train: TrainingSet, hp: Hyperparams) -> FittedGP:
    _, _, _, _, chol, alpha, lml_scaled = _scaled_state(train, hp)
    lml = lml_scaled - len(train) * np.log(train.y_std)
    return FittedGP(hp=hp, train=train, chol=chol, alpha=alpha, lml=lml)


def default_inits(train: TrainingSet) -> list[Hyperparams]:
    """Multi-start initializations: length scales at fixed fractions of the
    voltage span, signal at the sample std of ys, noise at 1% of it."""
    span = float(train.xs[-1] - train.xs[0]) or 1.0
    s = train.y_std
    return [Hyperparams(f * span, s, 0.01 * s) for f in (0.02, 0.05, 0.10, 0.20, 0.40)]


def fit(train: TrainingSet, init=None, budget: int = 200) -> FittedGP:
    """Maximize the LML with L-BFGS-B in log-hyperparameter space.

    Runs one ascent per initialization and returns the conditioned model with
    the highest LML across starts (never worse than any initialization).
    """
    if len(train) < 4:
        raise ValueError("fit requires at least 4 training points")
    inits = list(init) if init is not None else default_inits(train)
    if not inits:
        raise ValueError("at least one initialization is required")
    if budget < 1:
        raise ValueError("budget must be >= 1")

    span = float(train.xs[-1] - train.xs[0]) or 1.0
    s = train.y_std
    bounds = [
        (np.log(1e-4 * span), np.log(10.0 * span)),
        (np.log(1e-6 * s), np.log(1e3 * s)),
        (np.log(1e-8 * s), np.log(1.0 * s)),
    ]

    def unpack(log_theta):
        ell, sf, sn = np.exp(log_theta)
        return Hyperparams(ell, sf, sn)

    def neg_lml(log_theta):
        if not np.all(np.isfinite(log_theta)):
            raise NonFinite("non-finite log-hyperparameters in optimization")
        try:
            val, grad = log_marginal_likelihood(train, unpack(log_theta))
        except FactorizationFailure:
            return _PENALTY, np.zeros(3)
        if not np.isfinite(val):
            return _PENALTY, np.zeros(3)
        return -val, -grad

    best = None
    n_failed = 0
    for hp0 in inits:
        x0 = np.clip(
            np.log([hp0.length_scale, hp0.signal_std, max(hp0.noise_std, 1e-8 * s)]),
            [b[0] for b in bounds],
            [b[1] for b in bounds],
        )
        f0, _ = neg_lml(x0)
        if f0 >= _PENALTY:
            n_failed += 1
            continue
        res = minimize(
            neg_lml,
            x0,
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
            options={"maxiter": budget, "gtol": 1e-6, "ftol": 1e-10},
        )
        # keep whichever of (optimized point, start point) is better
        cand = res.x if res.fun <= f0 else x0
        cand_f = min(res.fun, f0)
        if cand_f >= _PENALTY:
            n_failed += 1
            continue
        if best is None or cand_f < best[0]:
            best = (cand_f, cand)

    if best is None:
        if n_failed == len(inits):
            raise AllStartsFailed("every optimization start failed")
        raise NonFinite("optimization produced no finite objective value")
    return _condition(train, unpack(best[1]))


def posterior_mean(model: FittedGP, grid):
    """Posterior mean of Q at the given voltages, in natural units."""
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    ks = kernel_matrix(grid - model.train.x_mean, model.xs_centered, model.hp_internal, "VV")
    return model.train.y_std * (ks @ model.alpha) + model.train.y_mean


def posterior_value_variance(model: FittedGP, grid):
    """Pointwise posterior variance of the latent Q at the given voltages."""
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    hp_i = model.hp_internal
    ks = kernel_matrix(grid - model.train.x_mean, model.xs_centered, hp_i, "VV")
    v = solve_triangular(model.chol, ks.T, lower=True)
    var = hp_i.signal_std**2 - np.sum(v * v, axis=0)
    return model.train.y_std**2 * np.clip(var, 0.0, None)
