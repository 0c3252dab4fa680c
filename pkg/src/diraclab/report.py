"""Structured pass/fail records with witnesses.

Three-valued status: a check either passes, fails (the verified identity is
violated, with a witness), or its hypotheses are violated (the identity is
conditional and the condition does not hold, so no claim is made either way).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

PASS = "pass"
FAIL = "fail"
HYPOTHESIS_VIOLATED = "hypothesis-violated"


@dataclass(frozen=True)
class CheckRecord:
    check_id: str
    status: str
    detail: str = ""
    witness: dict | None = None
    ranks: tuple | None = None

    def to_json(self) -> dict:
        out: dict = {"check": self.check_id, "status": self.status}
        if self.detail:
            out["detail"] = self.detail
        if self.witness is not None:
            out["witness"] = self.witness
        if self.ranks is not None:
            out["ranks"] = list(self.ranks)
        return out


@dataclass
class VerificationReport:
    suite: str
    records: list[CheckRecord] = field(default_factory=list)

    def add(self, check_id: str, ok: bool, detail: str = "",
            witness: dict | None = None, ranks=None) -> None:
        status = PASS if ok else FAIL
        if ranks is not None:
            ranks = tuple(ranks)
        self.records.append(CheckRecord(check_id, status, detail, witness, ranks))

    def add_hypothesis_violation(self, check_id: str, detail: str = "",
                                 witness: dict | None = None) -> None:
        self.records.append(CheckRecord(check_id, HYPOTHESIS_VIOLATED, detail, witness))

    def merge(self, other: "VerificationReport") -> None:
        self.records.extend(other.records)

    @property
    def passed(self) -> bool:
        return all(r.status == PASS for r in self.records)

    @property
    def hypothesis_ok(self) -> bool:
        return all(r.status != HYPOTHESIS_VIOLATED for r in self.records)

    def failures(self) -> list[CheckRecord]:
        return [r for r in self.records if r.status != PASS]

    def status_of(self, check_id: str) -> list[str]:
        return [r.status for r in self.records if r.check_id == check_id]

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "records": [r.to_json() for r in self.records],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))


def witness_vector(v) -> dict:
    return {"vector": [str(x) for x in v]}


def witness_subspace(s) -> dict:
    return {"basis": [[str(x) for x in row] for row in s.basis],
            "ambient_dim": s.ambient_dim}
