"""Synthetic ARMA count processes with an optional coupled external signal.

Models use the usual sign convention::

    X_t = c + sum_i phi_i (X_{t-i} - c) + e_t + sum_j theta_j e_{t-j} [+ S_t]

so the autoregressive characteristic polynomial is ``1 - sum phi_i z**i`` and
the moving-average one is ``1 + sum theta_j z**j``. A polynomial written as
``1 + sum alpha_i z**i`` (coefficients moved to the left-hand side) maps to
``phi = -alpha``. Both polynomials must have every root strictly outside the
unit disk.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .errors import ValidationError
from .sampling import make_rng
from .series import CountSeries

__all__ = [
    "ArimaModel",
    "CoupledPair",
    "poly_roots",
    "random_stationary_poly",
    "random_model",
    "default_burn_in",
    "generate_arima",
    "make_nonnegative",
    "generate_coupled_pair",
    "default_pair_spec",
    "pair_from_spec",
]

ROOT_TOL = 1e-9
NONNEG_MARGIN = 6.0
MAX_CLIP_FRACTION = 1e-3


def poly_roots(coeffs) -> np.ndarray:
    """Roots of ``1 + c_1 z + ... + c_k z**k``."""
    c = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
    if c.size == 0:
        return np.empty(0, dtype=complex)
    return np.roots(np.concatenate([c[::-1], [1.0]]))


def _outside_unit_disk(coeffs) -> bool:
    r = poly_roots(coeffs)
    return bool(np.all(np.abs(r) >= 1.0 + ROOT_TOL))


@dataclass(frozen=True)
class ArimaModel:
    """ARMA(k, l) model with an optional unit-weight external-signal term.

    ``noise_std`` may be 0, which gives the deterministic recursion.
    """

    ar_coeffs: tuple = ()
    ma_coeffs: tuple = ()
    noise_std: float = 1.0
    intercept: float = 0.0
    coupling: bool = False

    def __post_init__(self):
        ar = tuple(float(v) for v in np.atleast_1d(np.asarray(self.ar_coeffs, dtype=float)))
        ma = tuple(float(v) for v in np.atleast_1d(np.asarray(self.ma_coeffs, dtype=float)))
        object.__setattr__(self, "ar_coeffs", ar)
        object.__setattr__(self, "ma_coeffs", ma)
        if not (self.noise_std >= 0 and math.isfinite(self.noise_std)):
            raise ValidationError("noise_std must be finite and >= 0")
        if not _outside_unit_disk([-a for a in ar]):
            raise ValidationError(f"AR polynomial is not stationary: phi={ar}")
        if not _outside_unit_disk(ma):
            raise ValidationError(f"MA polynomial is not invertible: theta={ma}")

    @property
    def ar_order(self) -> int:
        return len(self.ar_coeffs)

    @property
    def ma_order(self) -> int:
        return len(self.ma_coeffs)

    def to_dict(self) -> dict:
        return {
            "ar": list(self.ar_coeffs),
            "ma": list(self.ma_coeffs),
            "noise_std": self.noise_std,
            "intercept": self.intercept,
            "coupling": self.coupling,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ArimaModel":
        return cls(
            tuple(d.get("ar", ())),
            tuple(d.get("ma", ())),
            float(d.get("noise_std", 1.0)),
            float(d.get("intercept", 0.0)),
            bool(d.get("coupling", False)),
        )


def random_stationary_poly(order: int, seed, modulus_range=(1.1, 2.0)) -> np.ndarray:
    """Coefficients ``(c_1, ..., c_k)`` of ``1 + c_1 z + ... + c_k z**k``.

    Root moduli are uniform on ``modulus_range``; complex roots come in
    conjugate pairs with uniform phase and an odd order gets one real root of
    random sign. Roots are drawn first and the coefficients expanded from
    them, so the result is stationary by construction.
    """
    order = int(order)
    if order < 0:
        raise ValidationError("order must be >= 0")
    if order == 0:
        return np.empty(0)
    lo, hi = modulus_range
    if lo <= 1.0:
        raise ValidationError("root moduli must exceed 1")
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    roots = []
    for _ in range(order // 2):
        r = rng.uniform(lo, hi)
        theta = rng.uniform(0.0, np.pi)
        z = r * np.exp(1j * theta)
        roots += [z, np.conj(z)]
    if order % 2:
        r = rng.uniform(lo, hi)
        roots.append(r if rng.random() < 0.5 else -r)
    poly = np.array([1.0 + 0j])
    for z in roots:
        poly = np.convolve(poly, [1.0, -1.0 / z])
    coeffs = poly.real[1:]
    assert _outside_unit_disk(coeffs)
    return coeffs


def random_model(
    ar_order: int, ma_order: int, seed: int, noise_std: float = 1.0, coupling: bool = False
) -> ArimaModel:
    rng = make_rng(seed)
    alpha = random_stationary_poly(ar_order, rng)
    beta = random_stationary_poly(ma_order, rng)
    return ArimaModel(tuple(-alpha), tuple(beta), noise_std, 0.0, coupling)


def default_burn_in(model: ArimaModel) -> int:
    return 10 * max(model.ar_order, model.ma_order, 1) * 20


def generate_arima(
    model: ArimaModel, length: int, burn_in: int | None = None, seed=0, external=None
) -> np.ndarray:
    """Simulate ``length`` values after discarding ``burn_in`` warm-up steps.

    The recursion starts from zeros and is driven by Gaussian innovations
    with standard deviation ``model.noise_std``. When the model is coupled,
    ``external`` must hold ``burn_in + length`` values; ``S_t`` enters the
    right-hand side unfiltered by the moving-average part.
    """
    length = int(length)
    burn = default_burn_in(model) if burn_in is None else int(burn_in)
    if length < 1 or burn < 0:
        raise ValidationError("length must be >= 1 and burn_in >= 0")
    total = burn + length
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    eps = model.noise_std * rng.standard_normal(total)
    a = np.concatenate([[1.0], -np.asarray(model.ar_coeffs)])
    b = np.concatenate([[1.0], np.asarray(model.ma_coeffs)])
    y = lfilter(b, a, eps)
    if model.coupling:
        if external is None:
            raise ValidationError("a coupled model needs an external series")
        s = np.asarray(external, dtype=float)
        if s.size != total:
            raise ValidationError(f"external series must have {total} values, got {s.size}")
        y = y + lfilter([1.0], a, s)
    return model.intercept + y[burn:]


def make_nonnegative(x, noise_std: float) -> tuple[np.ndarray, float, int]:
    """Shift a real series up so it can be thinned as counts.

    The shift is ``max(0, 6 * noise_std - min(x))``; an additive constant
    leaves every covariance unchanged. Values still negative afterwards are
    clipped to 0 and counted. Returns ``(values, shift, clipped)``.
    """
    x = np.asarray(x, dtype=float)
    shift = max(0.0, NONNEG_MARGIN * noise_std - float(x.min()))
    y = x + shift
    neg = y < 0
    clipped = int(neg.sum())
    if clipped > MAX_CLIP_FRACTION * y.size:
        raise ValidationError(f"{clipped} of {y.size} values clipped to zero")
    y[neg] = 0.0
    return y, shift, clipped


@dataclass(frozen=True)
class CoupledPair:
    external: np.ndarray
    ground: CountSeries
    shift: float
    clipped: int
    external_model: ArimaModel
    ground_model: ArimaModel
    length: int
    burn_in: int
    seed: int

    def spec(self) -> dict:
        return {
            "external": self.external_model.to_dict(),
            "ground": self.ground_model.to_dict(),
            "length": self.length,
            "burn_in": self.burn_in,
            "seed": self.seed,
        }


def generate_coupled_pair(
    external: ArimaModel, ground: ArimaModel, length: int, burn_in: int | None = None, seed: int = 0
) -> CoupledPair:
    """Generate an external signal ``S`` and a ground-truth ``X`` driven by it.

    ``S`` is simulated over the ground model's burn-in plus ``length`` so the
    coupling is active during warm-up; both series are then trimmed to
    ``length``. ``X`` is made non-negative with :func:`make_nonnegative`.
    """
    if not ground.coupling:
        raise ValidationError("ground model must have coupling enabled")
    burn = default_burn_in(ground) if burn_in is None else int(burn_in)
    total = burn + int(length)
    s_full = generate_arima(external, total, default_burn_in(external), make_rng(seed, 0))
    x = generate_arima(ground, length, burn, make_rng(seed, 1), external=s_full)
    x, shift, clipped = make_nonnegative(x, ground.noise_std)
    return CoupledPair(
        s_full[burn:], CountSeries(x, label="X"), shift, clipped,
        external, ground, int(length), burn, int(seed),
    )


def default_pair_spec(seed: int = 0, length: int = 365, noise_std: float = 1.0) -> dict:
    """Random external ARMA(3, 2) and coupled ground-truth ARMA(5, 1) models."""
    ext = random_model(3, 2, int(seed) * 2 + 1, noise_std)
    gt = random_model(5, 1, int(seed) * 2 + 2, noise_std, coupling=True)
    return {"external": ext.to_dict(), "ground": gt.to_dict(), "length": int(length),
            "burn_in": None, "seed": int(seed)}


def pair_from_spec(spec: dict) -> CoupledPair:
    if isinstance(spec, str):
        spec = json.loads(spec)
    return generate_coupled_pair(
        ArimaModel.from_dict(spec["external"]),
        ArimaModel.from_dict(spec["ground"]),
        int(spec["length"]),
        spec.get("burn_in"),
        int(spec.get("seed", 0)),
    )
