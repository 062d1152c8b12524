"""The refinement repository: successful refinement processes keyed by
constraint type, retrievable as few-shot demonstrations and persisted as
JSONL across runs.
"""

from __future__ import annotations

import json
import logging
import random
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from .constraints import ConstraintSpec, ConstraintType
from .verifiers import ContentSpec, instantiate, verify

log = logging.getLogger(__name__)

PER_TYPE_CAP = 10_000


class SchemaError(ValueError):
    """A persisted repository line does not fit the record schema."""


@dataclass(frozen=True)
class RefinementRecord:
    """One successful refinement: what was asked, what failed, what fixed it.

    The full originating spec is kept so records can be re-validated when
    loaded from disk.
    """

    spec: Union[ConstraintSpec, ContentSpec]
    instruction: str
    response_before: str
    feedback_text: str
    response_after: str
    created_at: float = field(default_factory=time.time)

    @property
    def constraint_type(self) -> str:
        if isinstance(self.spec, ConstraintSpec):
            return self.spec.type.value
        return self.spec.kind

    def to_json(self) -> dict:
        obj = self.spec.to_json()
        obj.update(
            instruction=self.instruction,
            response_before=self.response_before,
            feedback_text=self.feedback_text,
            response_after=self.response_after,
            created_at=self.created_at,
        )
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "RefinementRecord":
        try:
            type_id = obj["type"]
            if type_id in ("topic", "sentiment"):
                spec: Union[ConstraintSpec, ContentSpec] = ContentSpec.from_json(obj)
            else:
                spec = ConstraintSpec.from_json(obj)
            return cls(
                spec=spec,
                instruction=obj["instruction"],
                response_before=obj["response_before"],
                feedback_text=obj["feedback_text"],
                response_after=obj["response_after"],
                created_at=float(obj.get("created_at", 0.0)),
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise SchemaError(str(exc)) from exc


def _type_key(constraint_type: Union[ConstraintType, str]) -> str:
    return (
        constraint_type.value
        if isinstance(constraint_type, ConstraintType)
        else str(constraint_type)
    )


class RefinementRepository:
    """Append-only store of refinement records, one bucket per type.

    Single-writer, multi-reader: stores are serialized through one lock;
    concurrent retrievals are safe. Buckets are FIFO-capped.
    """

    def __init__(self, cap: int = PER_TYPE_CAP):
        self._buckets: dict[str, list[RefinementRecord]] = {}
        self._cap = cap
        self._lock = threading.Lock()
        self.load_errors: list[str] = []

    def store(self, record: RefinementRecord) -> None:
        """Append a record; the caller guarantees response_after passes the
        record's tool."""
        with self._lock:
            bucket = self._buckets.setdefault(record.constraint_type, [])
            bucket.append(record)
            if len(bucket) > self._cap:
                del bucket[: len(bucket) - self._cap]

    def retrieve(
        self,
        constraint_type: Union[ConstraintType, str],
        k: int,
        rng: random.Random,
    ) -> list[RefinementRecord]:
        """Up to k same-type records, sampled without replacement."""
        if k < 0:
            raise ValueError("k must be non-negative")
        with self._lock:
            bucket = list(self._buckets.get(_type_key(constraint_type), ()))
        if not bucket:
            return []
        return rng.sample(bucket, min(k, len(bucket)))

    def size(self, constraint_type: Optional[Union[ConstraintType, str]] = None) -> int:
        with self._lock:
            if constraint_type is None:
                return sum(len(b) for b in self._buckets.values())
            return len(self._buckets.get(_type_key(constraint_type), ()))

    def type_counts(self) -> dict[str, int]:
        with self._lock:
            return {t: len(b) for t, b in sorted(self._buckets.items())}

    def records(self) -> list[RefinementRecord]:
        with self._lock:
            return [rec for bucket in self._buckets.values() for rec in bucket]

    def save(self, path: Union[str, Path]) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as fh:
            for record in self.records():
                fh.write(json.dumps(record.to_json(), ensure_ascii=False) + "\n")

    @classmethod
    def load(cls, path: Union[str, Path], cap: int = PER_TYPE_CAP,
             revalidate: bool = True) -> "RefinementRepository":
        """Load a repository file; a missing file is an empty repository.

        Malformed lines are skipped and reported. When revalidating, a
        record whose response_after no longer passes its own tool is
        dropped; content records need a classifier and are kept as-is.
        """
        repo = cls(cap=cap)
        path = Path(path)
        if not path.exists():
            return repo
        with path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    record = RefinementRecord.from_json(json.loads(line))
                except (json.JSONDecodeError, SchemaError) as exc:
                    message = f"{path}:{lineno}: skipped malformed record: {exc}"
                    repo.load_errors.append(message)
                    log.warning(message)
                    continue
                if revalidate and isinstance(record.spec, ConstraintSpec):
                    verdict = verify(instantiate(record.spec), record.response_after)
                    if not verdict.satisfied:
                        message = (
                            f"{path}:{lineno}: dropped record whose refined response "
                            f"fails its {record.constraint_type} check"
                        )
                        repo.load_errors.append(message)
                        log.warning(message)
                        continue
                repo.store(record)
        return repo
