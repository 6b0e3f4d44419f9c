"""Model vectors, the model space, and the evaluated-model cache.

A model is identified by a binary indicator vector gamma of length p.  The
canonical text form writes index 1 leftmost; the integer encoding is
little-endian in index, i.e. index 1 corresponds to bit 0 of the integer.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, Tuple

from .errors import InvalidArgumentError, ResourceLimitError

ENUMERATION_LIMIT = 25


class ModelVector:
    """Immutable fixed-length bit vector identifying one model.

    Stored as an integer bitmask plus the length p.  Equality and hashing
    are value-based on the full bit pattern.
    """

    __slots__ = ("bits", "p")

    def __init__(self, bits: int, p: int):
        if p < 1:
            raise InvalidArgumentError("p must be >= 1")
        if bits < 0 or bits >> p:
            raise InvalidArgumentError("bit pattern out of range for length p")
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "p", p)

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("ModelVector is immutable")

    @classmethod
    def from_string(cls, s: str) -> "ModelVector":
        """Parse the canonical text form (index 1 leftmost)."""
        if not s or any(c not in "01" for c in s):
            raise InvalidArgumentError(f"not a bit string: {s!r}")
        bits = 0
        for i, c in enumerate(s):
            if c == "1":
                bits |= 1 << i
        return cls(bits, len(s))

    @classmethod
    def from_indices(cls, p: int, included) -> "ModelVector":
        """Build a vector with the given 1-based indices set."""
        bits = 0
        for j in included:
            if not 1 <= j <= p:
                raise InvalidArgumentError(f"index {j} out of range 1..{p}")
            bits |= 1 << (j - 1)
        return cls(bits, p)

    @classmethod
    def zeros(cls, p: int) -> "ModelVector":
        return cls(0, p)

    @classmethod
    def ones(cls, p: int) -> "ModelVector":
        return cls((1 << p) - 1, p)

    def to_string(self) -> str:
        return "".join("1" if self.bits >> i & 1 else "0" for i in range(self.p))

    def get(self, index: int) -> int:
        """Value of gamma_index (1-based)."""
        if not 1 <= index <= self.p:
            raise InvalidArgumentError(f"index {index} out of range 1..{self.p}")
        return self.bits >> (index - 1) & 1

    def indices(self) -> Tuple[int, ...]:
        """1-based indices of included covariates."""
        return tuple(i + 1 for i in range(self.p) if self.bits >> i & 1)

    @property
    def size(self) -> int:
        """Number of included covariates |gamma|."""
        return bin(self.bits).count("1")

    def __len__(self) -> int:
        return self.p

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ModelVector)
            and self.bits == other.bits
            and self.p == other.p
        )

    def __hash__(self) -> int:
        return hash((self.bits, self.p))

    def __repr__(self) -> str:
        return f"ModelVector({self.to_string()!r})"


def swap(gamma: ModelVector, indices) -> ModelVector:
    """Flip exactly the bits at the given 1-based indices."""
    mask = 0
    for j in indices:
        if not 1 <= j <= gamma.p:
            raise InvalidArgumentError(f"index {j} out of range 1..{gamma.p}")
        mask |= 1 << (j - 1)
    return ModelVector(gamma.bits ^ mask, gamma.p)


def hamming(a: ModelVector, b: ModelVector) -> int:
    """Number of positions at which a and b differ."""
    if a.p != b.p:
        raise InvalidArgumentError("length mismatch")
    return bin(a.bits ^ b.bits).count("1")


def enumerate_all(p: int) -> Iterator[ModelVector]:
    """Yield every model of length p once, in integer-encoding order."""
    if p > ENUMERATION_LIMIT:
        raise ResourceLimitError(
            f"p={p} exceeds enumeration limit {ENUMERATION_LIMIT}"
        )
    for code in range(1 << p):
        yield ModelVector(code, p)


@dataclass
class ModelRecord:
    """Cached evaluation of one model.

    log_mlik and log_prior are fixed at first insertion; visit_count only
    increases.
    """

    log_mlik: float
    log_prior: float
    visit_count: int = 0

    @property
    def log_target(self) -> float:
        return self.log_mlik + self.log_prior


class ModelCache:
    """Map from ModelVector to ModelRecord that avoids recomputation.

    Concurrent lookup/insert is supported; under contention a duplicate
    computation may happen but the first inserted record wins.
    """

    def __init__(self):
        self._records: Dict[ModelVector, ModelRecord] = {}
        self._lock = threading.Lock()
        self.compute_count = 0

    def __len__(self) -> int:
        return len(self._records)

    def __contains__(self, gamma: ModelVector) -> bool:
        return gamma in self._records

    def get(self, gamma: ModelVector) -> ModelRecord | None:
        return self._records.get(gamma)

    def items(self):
        return self._records.items()

    def get_or_compute(
        self,
        gamma: ModelVector,
        scorer: Callable[[ModelVector], Tuple[float, float]],
    ) -> ModelRecord:
        """Return the record for gamma, computing and inserting if absent.

        Increments visit_count either way.  Scorer failures propagate
        without inserting a record.
        """
        rec = self._records.get(gamma)
        if rec is None:
            log_mlik, log_prior = scorer(gamma)
            with self._lock:
                rec = self._records.get(gamma)
                if rec is None:
                    rec = ModelRecord(log_mlik, log_prior, 0)
                    self._records[gamma] = rec
                    self.compute_count += 1
        rec.visit_count += 1
        return rec
