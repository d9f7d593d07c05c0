"""Check results and reports with a JSON round trip."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

STATUSES = ("pass", "fail", "discrepancy")

TOOL_VERSION = "0.1.0"


@dataclass
class CheckResult:
    system: str
    check: str
    status: str
    computed: str = ""
    expected: str = ""
    source: str = ""
    diff: str = ""
    seconds: float = 0.0

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"bad status {self.status!r}")


@dataclass
class Report:
    systems: list
    results: list = field(default_factory=list)
    version: str = TOOL_VERSION
    timestamp: str = ""

    def add(self, r: CheckResult):
        self.results.append(r)

    @property
    def summary(self) -> dict:
        counts = dict.fromkeys(STATUSES, 0)
        for r in self.results:
            counts[r.status] += 1
        counts["total"] = len(self.results)
        return counts

    @property
    def failed(self) -> bool:
        return any(r.status == "fail" for r in self.results)

    def stamp(self) -> "Report":
        self.timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        return self

    # serialization
    def to_dict(self, timings: bool = False) -> dict:
        results = [asdict(r) for r in self.results]
        if not timings:
            for r in results:
                r.pop("seconds")
        return {
            "version": self.version,
            "timestamp": self.timestamp,
            "systems": list(self.systems),
            "summary": self.summary,
            "results": results,
        }

    def to_json(self, timings: bool = False) -> str:
        return json.dumps(self.to_dict(timings), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "Report":
        rep = cls(list(data["systems"]), [CheckResult(**r) for r in data["results"]],
                  data.get("version", TOOL_VERSION), data.get("timestamp", ""))
        if data.get("summary") and data["summary"] != rep.summary:
            raise ValueError("summary counts disagree with the result list")
        return rep

    @classmethod
    def from_json(cls, text: str) -> "Report":
        return cls.from_dict(json.loads(text))

    def to_text(self, timings: bool = False) -> str:
        lines = []
        for r in self.results:
            head = f"[{r.status.upper():<11}] {r.system:<6} {r.check}"
            if timings:
                head += f"  ({r.seconds:.3f}s)"
            lines.append(head)
            if r.status != "pass":
                for part in r.diff.splitlines():
                    lines.append(f"    {part}")
        s = self.summary
        lines.append(f"{s['total']} checks: {s['pass']} pass, {s['discrepancy']} discrepancy, {s['fail']} fail")
        return "\n".join(lines) + "\n"
