"""Scheduler-observable trace events and their JSON-lines encoding.

Field order is fixed (seq, kind, vm, method, details) and detail keys are
sorted, so two identical runs produce byte-identical trace files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

KINDS = ("Enqueue", "Deliver", "CallEnter", "CallExit", "Discharge",
         "Poison", "Throw", "Print")


@dataclass(frozen=True)
class TraceEvent:
    seq: int
    kind: str
    vm: str
    method: str
    details: dict = field(default_factory=dict)

    def to_json_line(self) -> str:
        return json.dumps({
            "seq": self.seq,
            "kind": self.kind,
            "vm": self.vm,
            "method": self.method,
            "details": dict(sorted(self.details.items())),
        })


def render_trace(events: list[TraceEvent]) -> str:
    return "".join(e.to_json_line() + "\n" for e in events)


def write_trace(events: list[TraceEvent], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_trace(events))


def parse_trace(text: str) -> list[TraceEvent]:
    events = []
    for line in text.splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        events.append(TraceEvent(obj["seq"], obj["kind"], obj["vm"],
                                 obj["method"], obj["details"]))
    return events
