"""Squared-exponential kernel and its derivative blocks.

All functions are stationary in the input difference and vectorize over
numpy arrays.  Voltage is in volts, charge in ampere-hours; no unit
conversion happens here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Hyperparams",
    "k",
    "k_cross",
    "k_dd",
    "kernel_matrix",
    "jitter_for",
]


@dataclass(frozen=True)
class Hyperparams:
    """Kernel hyperparameters in natural units.

    length_scale : V, > 0
    signal_std   : Ah, > 0
    noise_std    : Ah, >= 0
    """

    length_scale: float
    signal_std: float
    noise_std: float

    def __post_init__(self):
        if not (np.isfinite(self.length_scale) and self.length_scale > 0):
            raise ValueError(f"length_scale must be finite and > 0, got {self.length_scale}")
        if not (np.isfinite(self.signal_std) and self.signal_std > 0):
            raise ValueError(f"signal_std must be finite and > 0, got {self.signal_std}")
        if not (np.isfinite(self.noise_std) and self.noise_std >= 0):
            raise ValueError(f"noise_std must be finite and >= 0, got {self.noise_std}")

    def to_dict(self):
        return {
            "length_scale": float(self.length_scale),
            "signal_std": float(self.signal_std),
            "noise_std": float(self.noise_std),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["length_scale"], d["signal_std"], d["noise_std"])


def k(x, x_prime, hp: Hyperparams):
    """Squared-exponential covariance sigma_f^2 * exp(-(x-x')^2 / (2 l^2))."""
    d = np.asarray(x, dtype=float) - np.asarray(x_prime, dtype=float)
    return hp.signal_std**2 * np.exp(-0.5 * (d / hp.length_scale) ** 2)


def k_cross(x, x_star, hp: Hyperparams):
    """Cross-covariance cov(f(x), f'(x*)) = k(x, x*) * (x - x*) / l^2.

    Antisymmetric under argument swap; zero on the diagonal.
    """
    d = np.asarray(x, dtype=float) - np.asarray(x_star, dtype=float)
    return k(x, x_star, hp) * d / hp.length_scale**2


def k_dd(x_star_i, x_star_j, hp: Hyperparams):
    """Derivative-derivative covariance cov(f'(a), f'(b)).

    k(a, b) * (1/l^2 - (a-b)^2 / l^4); equals sigma_f^2 / l^2 on the diagonal.
    """
    ell2 = hp.length_scale**2
    d = np.asarray(x_star_i, dtype=float) - np.asarray(x_star_j, dtype=float)
    return k(x_star_i, x_star_j, hp) * (1.0 / ell2 - d * d / ell2**2)


_BLOCK_FUNCS = {"VV": k, "VD": k_cross, "DD": k_dd}


def kernel_matrix(xs, xs2, hp: Hyperparams, block: str = "VV"):
    """Assemble a kernel block matrix with [i, j] = block_fn(xs[i], xs2[j]).

    block: "VV" (value-value), "VD" (value-derivative, i.e. cov(f(xs), f'(xs2))),
    or "DD" (derivative-derivative).
    """
    try:
        fn = _BLOCK_FUNCS[block]
    except KeyError:
        raise ValueError(f"unknown block {block!r}; expected one of {sorted(_BLOCK_FUNCS)}")
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    xs2 = np.atleast_1d(np.asarray(xs2, dtype=float))
    return fn(xs[:, None], xs2[None, :], hp)


def jitter_for(hp: Hyperparams) -> float:
    """Diagonal jitter added to VV Gram matrices before factorization."""
    return max(1e-10, 1e-12 * hp.signal_std**2)
