"""Polynomial regression from factor scores to counting confidence.

The model maps a six-factor score vector to predicted Jaccard counting
confidence through a full degree-2 monomial basis (28 terms for six
factors) fit by least squares, optionally ridge-stabilized on all
non-intercept terms. Factors are min-max normalized to [0, 1] with the
normalization constants frozen into the model; predictions are clamped to
[0, 1] with an out-of-range flag when clamping fired.

Ablation support refits the same pipeline on factor subsets and reports
train/test MSE and R^2 per subset.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import combinations_with_replacement
from pathlib import Path

import numpy as np

from .data import FACTOR_NAMES
from .errors import NumericalError, ValidationError

DEFAULT_DEGREE = 2
DEFAULT_RIDGE = 1e-6


def monomial_exponents(n_factors: int, degree: int) -> tuple[tuple[int, ...], ...]:
    """Exponent tuples for all monomials of total degree <= degree.

    Ordered by total degree, then by the combination order of the factor
    indices; the first tuple is the all-zero intercept term.
    """
    if n_factors < 1 or degree < 1:
        raise ValidationError("need n_factors >= 1 and degree >= 1")
    exponents: list[tuple[int, ...]] = []
    for total in range(degree + 1):
        for combo in combinations_with_replacement(range(n_factors), total):
            exp = [0] * n_factors
            for idx in combo:
                exp[idx] += 1
            exponents.append(tuple(exp))
    return tuple(exponents)


def design_matrix(x: np.ndarray, exponents: tuple[tuple[int, ...], ...]) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValidationError("design_matrix expects a 2-D sample array")
    cols = [np.prod([x[:, i] ** e for i, e in enumerate(exp)], axis=0) for exp in exponents]
    return np.stack(cols, axis=1)


@dataclass(frozen=True)
class Normalizer:
    """Per-factor min-max scaling constants learned from training data."""

    mins: tuple[float, ...]
    maxs: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.mins) != len(self.maxs):
            raise ValidationError("normalizer mins/maxs length mismatch")
        for lo, hi in zip(self.mins, self.maxs):
            if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
                raise ValidationError("normalizer constants must be finite with max >= min")

    @classmethod
    def fit(cls, x: np.ndarray) -> "Normalizer":
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] < 1:
            raise ValidationError("normalizer needs a non-empty 2-D sample array")
        if not np.all(np.isfinite(x)):
            raise ValidationError("normalizer input must be finite")
        return cls(
            mins=tuple(float(v) for v in x.min(axis=0)),
            maxs=tuple(float(v) for v in x.max(axis=0)),
        )

    def transform(self, x: np.ndarray) -> tuple[np.ndarray, bool]:
        """Scale to [0, 1]; constant columns map to 0. Flags out-of-range input."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != len(self.mins):
            raise ValidationError(
                f"expected {len(self.mins)} factor columns, got shape {x.shape}"
            )
        mins = np.array(self.mins)
        maxs = np.array(self.maxs)
        span = maxs - mins
        out = np.zeros_like(x)
        live = span > 0
        out[:, live] = (x[:, live] - mins[live]) / span[live]
        outside = bool(np.any(out < 0.0) or np.any(out > 1.0))
        return np.clip(out, 0.0, 1.0), outside


@dataclass(frozen=True)
class ConfidenceModel:
    """Fitted polynomial map from factor scores to counting confidence."""

    factors: tuple[str, ...]
    degree: int
    coefficients: tuple[float, ...]
    normalizer: Normalizer
    ridge: float

    def __post_init__(self) -> None:
        n_terms = len(monomial_exponents(len(self.factors), self.degree))
        if len(self.coefficients) != n_terms:
            raise ValidationError(
                f"expected {n_terms} coefficients for degree {self.degree}"
                f" over {len(self.factors)} factors, got {len(self.coefficients)}"
            )
        if len(self.normalizer.mins) != len(self.factors):
            raise ValidationError("normalizer width does not match factor count")

    def predict(self, x: np.ndarray) -> tuple[np.ndarray, dict[str, bool]]:
        """Predicted confidences in [0, 1] plus clamping/range flags."""
        xn, outside = self.normalizer.transform(x)
        basis = design_matrix(xn, monomial_exponents(len(self.factors), self.degree))
        raw = basis @ np.array(self.coefficients)
        clamped = bool(np.any(raw < 0.0) or np.any(raw > 1.0))
        flags = {"input_out_of_range": outside, "prediction_clamped": clamped}
        return np.clip(raw, 0.0, 1.0), flags

    def save(self, path: str | Path) -> None:
        payload = {
            "factors": list(self.factors),
            "degree": self.degree,
            "coefficients": list(self.coefficients),
            "normalizer": {"mins": list(self.normalizer.mins), "maxs": list(self.normalizer.maxs)},
            "ridge": self.ridge,
        }
        Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "ConfidenceModel":
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"model file {path} is not valid JSON: {exc}") from exc
        try:
            return cls(
                factors=tuple(payload["factors"]),
                degree=int(payload["degree"]),
                coefficients=tuple(float(c) for c in payload["coefficients"]),
                normalizer=Normalizer(
                    mins=tuple(float(v) for v in payload["normalizer"]["mins"]),
                    maxs=tuple(float(v) for v in payload["normalizer"]["maxs"]),
                ),
                ridge=float(payload.get("ridge", 0.0)),
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"model file {path} is missing field: {exc}") from exc


def fit_confidence_model(
    x: np.ndarray,
    y: np.ndarray,
    factors: tuple[str, ...] = FACTOR_NAMES,
    degree: int = DEFAULT_DEGREE,
    ridge: float = DEFAULT_RIDGE,
) -> ConfidenceModel:
    """Least-squares fit of the monomial model on normalized factors.

    Ridge > 0 augments the system with sqrt(ridge) rows on every
    non-intercept coefficient, which keeps the solve well-posed when
    factor columns are collinear.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise ValidationError("fit needs x (n, k) and y (n,) with matching n")
    if x.shape[1] != len(factors):
        raise ValidationError(f"expected {len(factors)} factor columns, got {x.shape[1]}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValidationError("fit inputs must be finite")
    if np.any(y < 0.0) or np.any(y > 1.0):
        raise ValidationError("confidence targets must lie in [0, 1]")
    if ridge < 0:
        raise ValidationError("ridge must be >= 0")
    exponents = monomial_exponents(len(factors), degree)
    if x.shape[0] <= len(exponents):
        raise ValidationError(
            f"need more than {len(exponents)} samples to fit {len(exponents)} terms,"
            f" got {x.shape[0]}"
        )
    if np.all(y == y[0]):
        raise NumericalError("confidence targets are constant; model is undetermined")

    normalizer = Normalizer.fit(x)
    xn, _ = normalizer.transform(x)
    basis = design_matrix(xn, exponents)
    if ridge > 0:
        penalty = math.sqrt(ridge) * np.eye(len(exponents))
        penalty[0, 0] = 0.0  # leave the intercept unpenalized
        a = np.vstack([basis, penalty])
        b = np.concatenate([y, np.zeros(len(exponents))])
    else:
        a, b = basis, y
    coef, _, rank, _ = np.linalg.lstsq(a, b, rcond=None)
    if ridge == 0 and rank < len(exponents):
        raise NumericalError(
            f"design matrix is rank deficient ({rank} < {len(exponents)}); use ridge > 0"
        )
    return ConfidenceModel(
        factors=tuple(factors),
        degree=degree,
        coefficients=tuple(float(c) for c in coef),
        normalizer=normalizer,
        ridge=ridge,
    )


@dataclass(frozen=True)
class FitMetrics:
    mse: float
    r2: float
    n: int


def evaluate_model(model: ConfidenceModel, x: np.ndarray, y: np.ndarray) -> FitMetrics:
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1 or y.size < 2:
        raise ValidationError("evaluation needs at least 2 targets")
    pred, _ = model.predict(x)
    resid = y - pred
    mse = float((resid**2).mean())
    if np.all(y == y[0]):
        raise NumericalError("evaluation targets are constant; R^2 undefined")
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot
    return FitMetrics(mse=mse, r2=r2, n=int(y.size))


ABLATION_SUBSETS: tuple[tuple[str, tuple[str, ...]], ...] = (
    ("pdu_only", ("pdu",)),
    ("mdcbb_only", ("mdcbb",)),
    ("agm_only", ("agm",)),
    ("ic_only", ("ic",)),
    ("iq_only", ("iq",)),
    ("pn_only", ("pn",)),
    ("baseline", ("mdcbb", "pn", "agm")),
    ("full", FACTOR_NAMES),
)


@dataclass(frozen=True)
class AblationRow:
    name: str
    factors: tuple[str, ...]
    train: FitMetrics
    test: FitMetrics


def run_ablation(
    x_train: np.ndarray,
    y_train: np.ndarray,
    x_test: np.ndarray,
    y_test: np.ndarray,
    factors: tuple[str, ...] = FACTOR_NAMES,
    degree: int = DEFAULT_DEGREE,
    ridge: float = DEFAULT_RIDGE,
    subsets: tuple[tuple[str, tuple[str, ...]], ...] = ABLATION_SUBSETS,
) -> list[AblationRow]:
    """Refit the model per factor subset and score train and test splits."""
    x_train = np.asarray(x_train, dtype=np.float64)
    x_test = np.asarray(x_test, dtype=np.float64)
    index = {name: i for i, name in enumerate(factors)}
    rows = []
    for name, subset in subsets:
        unknown = [f for f in subset if f not in index]
        if unknown:
            raise ValidationError(f"ablation subset {name!r} has unknown factors {unknown}")
        cols = [index[f] for f in subset]
        model = fit_confidence_model(
            x_train[:, cols], y_train, factors=tuple(subset), degree=degree, ridge=ridge
        )
        rows.append(
            AblationRow(
                name=name,
                factors=tuple(subset),
                train=evaluate_model(model, x_train[:, cols], y_train),
                test=evaluate_model(model, x_test[:, cols], y_test),
            )
        )
    return rows


def export_scatter(
    x: np.ndarray,
    y: np.ndarray,
    path: str | Path,
    factors: tuple[str, ...] = FACTOR_NAMES,
    normalizer: Normalizer | None = None,
) -> None:
    """Write per-factor (normalized score, confidence) series as CSV.

    One row per (factor, sample) pair; the normalizer defaults to a fresh
    min-max fit on the given samples, so exported x-values lie in [0, 1].
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0] or x.shape[0] == 0:
        raise ValidationError("scatter export needs nonempty x (n, k) and y (n,)")
    if x.shape[1] != len(factors):
        raise ValidationError(f"expected {len(factors)} factor columns, got {x.shape[1]}")
    if normalizer is None:
        normalizer = Normalizer.fit(x)
    xn, _ = normalizer.transform(x)
    lines = ["factor,normalized_score,confidence"]
    for j, name in enumerate(factors):
        for i in range(x.shape[0]):
            lines.append(f"{name},{float(xn[i, j])!r},{float(y[i])!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
