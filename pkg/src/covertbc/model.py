"""Channel and broadcast-with-warden model types plus JSON (de)serialization.

Probabilities are 64-bit floats. Alphabets are index sets 0..k-1; any symbol
labels in a model file are cosmetic and ignored by computation. Rows are
checked against a 1e-9 sum tolerance at load time and then renormalized
exactly so that downstream sums hold to machine precision.

All types are immutable after construction and safe to share across threads.
"""
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ModelFormatError

ROW_SUM_TOL = 1e-9
# Rows are renormalized at load only when the sum deviation exceeds this, so a
# save/load cycle after the first normalization is bit-exact.
_RENORM_EPS = 1e-13
_NEG_TOL = -1e-12


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Distribution:
    """A pmf on a finite alphabet: nonnegative entries summing to 1 (tol 1e-9)."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim != 1 or p.size == 0:
            raise ValueError(f"distribution must be a nonempty vector, got shape {p.shape}")
        if p.min() < _NEG_TOL:
            raise ValueError(f"negative probability {p.min()} at index {int(p.argmin())}")
        p = np.where(p < 0.0, 0.0, p)
        s = p.sum()
        if abs(s - 1.0) > ROW_SUM_TOL:
            raise ValueError(f"probabilities sum to {s!r}, not 1 (tol {ROW_SUM_TOL})")
        object.__setattr__(self, "probs", _freeze(p))

    @classmethod
    def normalized(cls, weights) -> "Distribution":
        """Build from nonnegative weights, dividing by their sum."""
        w = np.asarray(weights, dtype=np.float64)
        s = w.sum()
        if not s > 0.0:
            raise ValueError("weights must have positive sum")
        return cls(w / s)

    def __len__(self) -> int:
        return self.probs.size

    def __getitem__(self, i: int) -> float:
        return float(self.probs[i])


@dataclass(frozen=True)
class Channel:
    """Row-stochastic transition matrix: one conditional pmf per input symbol."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim != 2 or 0 in m.shape:
            raise ValueError(f"channel must be a nonempty matrix, got shape {m.shape}")
        for i in range(m.shape[0]):
            try:
                Distribution(m[i])
            except ValueError as exc:
                raise ValueError(f"row {i}: {exc}") from exc
        object.__setattr__(self, "matrix", _freeze(np.where(m < 0.0, 0.0, m)))

    @property
    def input_size(self) -> int:
        return self.matrix.shape[0]

    @property
    def output_size(self) -> int:
        return self.matrix.shape[1]

    def row(self, x: int) -> np.ndarray:
        return self.matrix[x]


@dataclass(frozen=True)
class BcWardenModel:
    """Two receiver channels and a warden channel over a common input alphabet.

    x0 designates the zero symbol sent when no communication takes place;
    the warden's null distribution is row x0 of q.
    """

    p1: Channel
    p2: Channel
    q: Channel
    x0: int
    labels: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        n = self.p1.input_size
        if self.p2.input_size != n or self.q.input_size != n:
            raise ValueError(
                f"input alphabet mismatch: |X| = {n}, {self.p2.input_size}, {self.q.input_size}"
            )
        if not (0 <= self.x0 < n):
            raise ValueError(f"x0 = {self.x0} outside input alphabet of size {n}")

    @property
    def input_size(self) -> int:
        return self.p1.input_size


def warden_null_distribution(model: BcWardenModel) -> Distribution:
    """The warden output when the zero symbol is sent: row x0 of q."""
    return Distribution(model.q.row(model.x0))


def _load_matrix(obj, key: str) -> np.ndarray:
    if key not in obj:
        raise ModelFormatError(f"missing key {key!r}")
    try:
        m = np.asarray(obj[key], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"{key}: not a numeric matrix ({exc})") from exc
    if m.ndim != 2:
        raise ModelFormatError(f"{key}: expected a matrix, got shape {m.shape}")
    if m.min(initial=0.0) < _NEG_TOL:
        raise ModelFormatError(f"{key}: negative entry {m.min()}")
    m = np.where(m < 0.0, 0.0, m)
    sums = m.sum(axis=1)
    bad = np.abs(sums - 1.0) > ROW_SUM_TOL
    if bad.any():
        i = int(np.argmax(bad))
        raise ModelFormatError(
            f"{key}: row {i} sums to {sums[i]!r}, deviation {sums[i] - 1.0:.3e} "
            f"exceeds tolerance {ROW_SUM_TOL}"
        )
    renorm = np.abs(sums - 1.0) > _RENORM_EPS
    if renorm.any():
        m = m.copy()
        m[renorm] /= sums[renorm, None]
    return m


def load_model(path) -> BcWardenModel:
    """Load a model file: JSON object with keys x0, P1, P2, Q (+ optional labels)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"cannot read model file {path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise ModelFormatError("model file must contain a JSON object")
    if "x0" not in obj:
        raise ModelFormatError("missing key 'x0'")
    try:
        x0 = int(obj["x0"])
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"x0: expected an integer ({exc})") from exc
    p1 = _load_matrix(obj, "P1")
    p2 = _load_matrix(obj, "P2")
    q = _load_matrix(obj, "Q")
    labels = obj.get("labels") or {}
    try:
        return BcWardenModel(Channel(p1), Channel(p2), Channel(q), x0, labels)
    except ValueError as exc:
        raise ModelFormatError(str(exc)) from exc


def save_model(model: BcWardenModel, path) -> None:
    """Write a model file that load_model round-trips bit-exactly."""
    obj = {
        "x0": model.x0,
        "P1": model.p1.matrix.tolist(),
        "P2": model.p2.matrix.tolist(),
        "Q": model.q.matrix.tolist(),
    }
    if model.labels:
        obj["labels"] = model.labels
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=1)
        fh.write("\n")
