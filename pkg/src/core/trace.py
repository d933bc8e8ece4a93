"""
Simulation traces and their two text formats.

`lines`: one event per line, `<time>\\t<kind>\\t<subject>\\t<detail>`, time
with six fractional digits and detail in inline tree syntax.
`structured`: the whole trace (events, final token counts, final outputs,
sim_time) as a canonical tree document.
"""

from dataclasses import dataclass, field
from decimal import Decimal
from typing import Any, Dict, List, Tuple

from constants.kinds import EventKind
from core.errors import F4msError
from core.model import Endpoint, Message
from sysdesc.tree import dumps, dumps_inline, loads
from utils.decimals import format_micro, from_micro, parse_micro, to_micro


TRACE_FORMATS = ("lines", "structured")


@dataclass(frozen=True)
class Event:
    """
    One trace event.

    Attributes:
        time: Simulated time in micro-units
        kind: Event kind
        subject: Component or connector id
        detail: Tree-syntax value with ports/labels/targets
    """
    time: int
    kind: EventKind
    subject: str
    detail: Dict[str, Any] = field(default_factory=dict)

    def to_line(self) -> str:
        return f"{format_micro(self.time)}\t{self.kind.value}\t{self.subject}\t{dumps_inline(self.detail)}"


@dataclass
class Trace:
    events: List[Event] = field(default_factory=list)
    final_state: Dict[str, int] = field(default_factory=dict)
    outputs: Dict[Endpoint, Message] = field(default_factory=dict)
    sim_time: int = 0

    def of_kind(self, kind: EventKind) -> List[Event]:
        return [e for e in self.events if e.kind == kind]

    def transfers(self, tags=None) -> List[Event]:
        """MessageTransfer events, optionally only those carrying one of `tags`."""
        return [e for e in self.of_kind(EventKind.MESSAGE_TRANSFER)
                if tags is None or e.detail.get("tag") in tags]

    def firings(self, component: str) -> int:
        return sum(1 for e in self.of_kind(EventKind.COMPONENT_START) if e.subject == component)

    def output(self, component: str, port: str) -> Message:
        return self.outputs[(component, port)]


class TraceFormatError(F4msError, ValueError):
    category = "TraceFormatError"


def _check_format(fmt: str):
    if fmt not in TRACE_FORMATS:
        raise TraceFormatError(f"unknown trace format {fmt!r} (expected lines or structured)")


def trace_to_tree(trace: Trace) -> Dict[str, Any]:
    return {
        "sim_time": from_micro(trace.sim_time),
        "events": [
            {"time": from_micro(e.time), "kind": e.kind.value, "subject": e.subject, "detail": e.detail}
            for e in trace.events
        ],
        "final_state": dict(sorted(trace.final_state.items())),
        "outputs": [
            {"component": c, "port": p, "tag": m.tag, "origin": list(m.origin), "payload": m.payload.hex()}
            for (c, p), m in sorted(trace.outputs.items())
        ],
    }


def trace_export(trace: Trace, fmt: str = "lines") -> str:
    """
    Render a trace as text.

    Args:
        trace: The trace
        fmt: "lines" or "structured"

    Returns:
        The rendered text ("" for an empty trace in lines format)
    """
    _check_format(fmt)
    if fmt == "lines":
        return "".join(e.to_line() + "\n" for e in trace.events)
    return dumps(trace_to_tree(trace))


def trace_import(text: str, fmt: str = "lines") -> Trace:
    """
    Read back a trace written by trace_export.

    The lines format carries events only; final_state and outputs come
    back empty and sim_time is the latest event time.
    """
    _check_format(fmt)
    if fmt == "lines":
        events = []
        for number, line in enumerate(text.splitlines(), start=1):
            if not line:
                continue
            parts = line.split("\t", 3)
            if len(parts) != 4:
                raise TraceFormatError(f"line {number}: expected 4 tab-separated fields")
            time, kind, subject, detail = parts
            events.append(Event(parse_micro(time), EventKind(kind), subject, loads(detail)))
        return Trace(events, {}, {}, max((e.time for e in events), default=0))

    tree = loads(text)
    events = [
        Event(to_micro(Decimal(e["time"])), EventKind(e["kind"]), e["subject"], e["detail"])
        for e in tree["events"]
    ]
    outputs = {
        (o["component"], o["port"]): Message(o["tag"], bytes.fromhex(o["payload"]), tuple(o["origin"]))
        for o in tree["outputs"]
    }
    return Trace(events, dict(tree["final_state"]), outputs, to_micro(Decimal(tree["sim_time"])))
