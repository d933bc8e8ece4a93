"""
Deterministic discrete-event engine for system models.

The engine moves control tokens along the scheduling graph and messages
along the interaction graph:

- one token sits at the initial component at t=0;
- a component is eligible when it holds a token and every input its
  behavior requires holds a message; its ready time is the latest of its
  earliest token, its own previous completion and those message arrivals;
- the eligible component with the smallest (ready time, id) fires next;
- a firing takes the mapped kind's time, emits messages along every
  interaction edge (zero delay) and routes tokens through its outgoing
  connectors.

Times are integer micro-units throughout.
"""

import logging
import zlib
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Any, Deque, Dict, Iterable, List, Optional, Tuple

import numpy as np

from constants.kinds import (
    ConnectorKind, DEFAULT_SEED, DEFAULT_STEP_LIMIT, EventKind, Kind,
)
from core.errors import (
    EngineError, GuardNoMatch, InvalidMapping, KindNotAllowed,
    StepLimitExceeded, TagDiscipline,
)
from core.graph import SchedulingConnector, SystemModel
from core.model import BehaviorCall, BehaviorRegistry, BehaviorResult, Endpoint, Message
from core.trace import Event, Trace


logger = logging.getLogger(__name__)

MAX_SEED = 2 ** 64 - 1


# =============================================================================
# Mapping and Configuration
# =============================================================================

@dataclass(frozen=True)
class Mapping:
    """A SW/HW assignment over components, stored sorted by component id."""
    assignment: Tuple[Tuple[str, Kind], ...]

    @classmethod
    def of(cls, kinds: Dict[str, Kind]) -> "Mapping":
        return cls(tuple(sorted((cid, Kind(kind)) for cid, kind in kinds.items())))

    @classmethod
    def all_software(cls, model: SystemModel) -> "Mapping":
        """Software wherever allowed, hardware for hardware-only components."""
        return cls.of({
            cid: Kind.SOFTWARE if Kind.SOFTWARE in spec.allowed_kinds else Kind.HARDWARE
            for cid, spec in model.components.items()
        })

    @classmethod
    def all_hardware_where_allowed(cls, model: SystemModel) -> "Mapping":
        return cls.of({
            cid: Kind.HARDWARE if Kind.HARDWARE in spec.allowed_kinds else Kind.SOFTWARE
            for cid, spec in model.components.items()
        })

    def as_dict(self) -> Dict[str, Kind]:
        return dict(self.assignment)

    def __getitem__(self, component: str) -> Kind:
        for cid, kind in self.assignment:
            if cid == component:
                return kind
        raise KeyError(component)

    def with_kind(self, component: str, kind: Kind) -> "Mapping":
        kinds = self.as_dict()
        kinds[component] = kind
        return Mapping.of(kinds)

    def hardware_count(self) -> int:
        return sum(1 for _, kind in self.assignment if kind == Kind.HARDWARE)

    def order_key(self) -> Tuple[int, ...]:
        """Lexicographic key over sorted component ids, SW < HW."""
        return tuple(0 if kind == Kind.SOFTWARE else 1 for _, kind in self.assignment)

    def check(self, model: SystemModel) -> "Mapping":
        """
        Check the mapping covers exactly the model's components with allowed kinds.

        Raises:
            InvalidMapping: If components are missing or unknown
            KindNotAllowed: If a component is mapped to a kind it does not allow
        """
        kinds = self.as_dict()
        missing = sorted(set(model.components) - set(kinds))
        extra = sorted(set(kinds) - set(model.components))
        if missing or extra:
            raise InvalidMapping(f"mapping misses {missing} / names unknown {extra}")
        for cid, kind in self.assignment:
            if kind not in model.components[cid].allowed_kinds:
                raise KindNotAllowed(f"component {cid!r} cannot be implemented as {kind.value}")
        return self

    def describe(self) -> str:
        return ", ".join(f"{cid}={kind.value}" for cid, kind in self.assignment)


@dataclass(frozen=True)
class SimConfig:
    seed: int = DEFAULT_SEED
    step_limit: int = DEFAULT_STEP_LIMIT
    mapping: Optional[Mapping] = None

    def __post_init__(self):
        if not isinstance(self.step_limit, int) or self.step_limit < 1:
            raise ValueError(f"step_limit must be a positive integer, got {self.step_limit!r}")
        if not 0 <= self.seed <= MAX_SEED:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")


@dataclass(frozen=True)
class StepResult:
    events: Tuple[Event, ...] = ()
    quiescent: bool = False


QUIESCENT = StepResult((), True)


def firing_seed(seed: int, component: str, index: int) -> np.random.SeedSequence:
    """Per-firing seed derived from (run seed, component id, firing index)."""
    return np.random.SeedSequence([seed, zlib.crc32(component.encode("utf-8")), index])


# =============================================================================
# Engine
# =============================================================================

@dataclass
class _Pending:
    time: int
    sender: str
    seq: int
    message: Message


class Engine:
    """
    One execution of a system model.

    Usage:
        engine = Engine(model, SimConfig(seed=1))
        while not engine.step().quiescent:
            pass
        trace = engine.trace()
    """

    def __init__(
        self,
        model: SystemModel,
        config: Optional[SimConfig] = None,
        initial_inputs: Optional[Dict[Endpoint, Message]] = None,
        initial_states: Optional[Dict[str, Any]] = None,
        registry: Optional[BehaviorRegistry] = None,
    ):
        """
        Initialize an engine run.

        Args:
            model: A validated system model
            config: Seed, step limit and mapping (all-SW mapping when None)
            initial_inputs: Messages placed on input ports at t=0
            initial_states: Initial behavior state per component id
            registry: Behavior registry (default builtins)
        """
        if registry is None:
            from core.behaviors import default_registry
            registry = default_registry()

        self.model = model
        self.config = config or SimConfig()
        self.mapping = (self.config.mapping or Mapping.all_software(model)).check(model)
        self.behaviors = {cid: registry.resolve(spec.behavior) for cid, spec in model.components.items()}

        self.tokens: Dict[str, List[int]] = {cid: [] for cid in model.components}
        self.busy_until: Dict[str, int] = defaultdict(int)
        self.inbox: Dict[Endpoint, List[_Pending]] = defaultdict(list)
        self.states: Dict[str, Any] = dict(initial_states or {})
        self.fired: Dict[str, int] = defaultdict(int)
        self.sync_arrivals: Dict[str, Dict[str, Deque[int]]] = defaultdict(lambda: defaultdict(deque))
        self.outputs: Dict[Endpoint, Message] = {}
        self.events: List[Tuple[int, int, Event]] = []
        self.firings = 0
        self._seq = 0
        self._quiescent = False

        self.tokens[model.spg.initial].append(0)
        for (cid, port), message in sorted((initial_inputs or {}).items()):
            spec = model.components.get(cid)
            in_port = spec.input_port(port) if spec else None
            if in_port is None:
                raise EngineError(f"initial input targets undeclared port {cid}.{port}")
            if in_port.tag != message.tag:
                raise TagDiscipline(f"initial input for {cid}.{port} has tag {message.tag!r}, "
                                    f"port expects {in_port.tag!r}")
            self.inbox[(cid, port)].append(_Pending(0, "", self._next_seq(), message))

    # -- bookkeeping ----------------------------------------------------------

    def _next_seq(self) -> int:
        self._seq += 1
        return self._seq

    def _emit(self, emitted: List[Event], time: int, kind: EventKind, subject: str, detail=None):
        event = Event(time, kind, subject, detail if detail is not None else {})
        self.events.append((time, self._next_seq(), event))
        emitted.append(event)

    def _required(self, cid: str):
        return self.behaviors[cid].required_inputs(self.model.components[cid])

    def ready_time(self, cid: str) -> Optional[int]:
        """Earliest start time of `cid`, or None if it cannot fire."""
        if not self.tokens[cid]:
            return None
        ready = max(min(self.tokens[cid]), self.busy_until[cid])
        for port in self._required(cid):
            pending = self.inbox.get((cid, port))
            if not pending:
                return None
            ready = max(ready, min(p.time for p in pending))
        return ready

    def _next_component(self) -> Optional[Tuple[int, str]]:
        candidates = []
        for cid in self.model.components:
            ready = self.ready_time(cid)
            if ready is not None:
                candidates.append((ready, cid))
        return min(candidates) if candidates else None

    # -- firing ---------------------------------------------------------------

    def _consume(self, cid: str, start: int, emitted: List[Event]) -> Dict[str, Message]:
        """Take the last writer per port among messages arrived by `start`."""
        consumed = {}
        for port in self.model.components[cid].inputs:
            pending = self.inbox.get((cid, port.name))
            if not pending:
                continue
            arrived = [p for p in pending if p.time <= start]
            if not arrived:
                continue
            arrived.sort(key=lambda p: (p.time, p.sender, p.seq))
            winner = arrived[-1]
            for loser in arrived[:-1]:
                logger.warning("input %s.%s: message from %s dropped (last writer wins)",
                               cid, port.name, loser.message.origin[0])
                self._emit(emitted, start, EventKind.MESSAGE_DROPPED, cid,
                           {"port": port.name, "from": list(loser.message.origin)})
            self.inbox[(cid, port.name)] = [p for p in pending if p.time > start]
            consumed[port.name] = winner.message
        return consumed

    def _check_outputs(self, cid: str, result: BehaviorResult):
        spec = self.model.components[cid]
        for port, message in result.outputs.items():
            out_port = spec.output_port(port)
            if out_port is None:
                raise TagDiscipline(f"{cid!r} emitted on undeclared output {port!r}")
            if message.tag != out_port.tag or message.origin != (cid, port):
                raise TagDiscipline(f"{cid}.{port} emitted tag {message.tag!r} from {message.origin}, "
                                    f"port declares {out_port.tag!r}")

    def _route(self, conn: SchedulingConnector, cid: str, end: int, result: BehaviorResult,
               emitted: List[Event]):
        if conn.kind in (ConnectorKind.SEQUENCE, ConnectorKind.PARALLEL):
            for target in conn.targets:
                self.tokens[target].append(end)
                self._emit(emitted, end, EventKind.TOKEN_MOVE, conn.id, {"to": target})

        elif conn.kind == ConnectorKind.EXCLUSIVE_CHOICE:
            guard = result.outputs.get(conn.guard_port[1]) if conn.guard_port else None
            label = guard.payload.decode("utf-8", errors="replace") if guard is not None else None
            target = conn.target_for(label)
            if target is None:
                raise GuardNoMatch(conn.id, label)
            self._emit(emitted, end, EventKind.CHOICE_TAKEN, conn.id, {"label": label, "target": target})
            self.tokens[target].append(end)
            self._emit(emitted, end, EventKind.TOKEN_MOVE, conn.id, {"to": target})

        else:
            arrivals = self.sync_arrivals[conn.id]
            arrivals[cid].append(end)
            if all(arrivals[source] for source in conn.sources):
                joined = max(arrivals[source].popleft() for source in conn.sources)
                target = conn.targets[0]
                self._emit(emitted, joined, EventKind.SYNC_COMPLETE, conn.id, {"target": target})
                self.tokens[target].append(joined)
                self._emit(emitted, joined, EventKind.TOKEN_MOVE, conn.id, {"to": target})

    def _fire(self, start: int, cid: str) -> List[Event]:
        spec = self.model.components[cid]
        kind = self.mapping[cid]
        end = start + spec.costs.time_micro(kind)
        emitted: List[Event] = []

        self.tokens[cid].remove(min(self.tokens[cid]))
        self._emit(emitted, start, EventKind.COMPONENT_START, cid, {"kind": kind.value})
        inputs = self._consume(cid, start, emitted)

        call = BehaviorCall(spec, inputs, self.states.get(cid),
                            firing_seed(self.config.seed, cid, self.fired[cid]))
        result = self.behaviors[cid](call)
        self._check_outputs(cid, result)

        self.states[cid] = result.state
        self.fired[cid] += 1
        self.firings += 1
        self.busy_until[cid] = end
        logger.debug("fired %s [%s] %d -> %d", cid, kind.value, start, end)
        self._emit(emitted, end, EventKind.COMPONENT_END, cid)

        for _, edge in self.model.ig.outgoing(cid):
            message = result.outputs.get(edge.source[1])
            if message is None:
                continue
            self.inbox[edge.target].append(_Pending(end, cid, self._next_seq(), message))
            self._emit(emitted, end, EventKind.MESSAGE_TRANSFER, cid,
                       {"from": list(edge.source), "to": list(edge.target), "tag": message.tag})

        if cid in self.model.spg.finals:
            for port, message in result.outputs.items():
                self.outputs[(cid, port)] = message

        for conn in self.model.spg.outgoing(cid):
            self._route(conn, cid, end, result, emitted)
        return emitted

    # -- public interface -----------------------------------------------------

    @property
    def quiescent(self) -> bool:
        return self._quiescent

    def step(self) -> StepResult:
        """
        Fire the eligible component with minimal (ready time, id).

        Returns:
            The events of that firing, or QUIESCENT when nothing can fire

        Raises:
            StepLimitExceeded: If step_limit firings happened and another is due
            GuardNoMatch, MissingInput, TagDiscipline: From the firing
        """
        if self._quiescent:
            return QUIESCENT
        chosen = self._next_component()
        if chosen is None:
            self._quiescent = True
            return QUIESCENT
        if self.firings >= self.config.step_limit:
            raise StepLimitExceeded(self.config.step_limit)
        start, cid = chosen
        return StepResult(tuple(self._fire(start, cid)), False)

    def run(self) -> Trace:
        while not self.step().quiescent:
            pass
        return self.trace()

    def trace(self) -> Trace:
        events = [event for _, _, event in sorted(self.events, key=lambda item: (item[0], item[1]))]
        return Trace(
            events=events,
            final_state={cid: len(tokens) for cid, tokens in sorted(self.tokens.items())},
            outputs=dict(self.outputs),
            sim_time=max((e.time for e in events), default=0),
        )


def run(
    model: SystemModel,
    config: Optional[SimConfig] = None,
    initial_inputs: Optional[Dict[Endpoint, Message]] = None,
    initial_states: Optional[Dict[str, Any]] = None,
    registry: Optional[BehaviorRegistry] = None,
) -> Trace:
    """Execute a model to quiescence and return the full trace."""
    return Engine(model, config, initial_inputs, initial_states, registry).run()


def step(engine: Engine) -> StepResult:
    return engine.step()
