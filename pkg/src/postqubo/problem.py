"""Problem configuration for the general time-indexed compiler.

A ProblemSpec selects the variant mix: endpoints, required-edge subset,
turn bonuses, service/traversal split, service ordering, postman count with
capacities, and the step budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

from .errors import SpecError, UnsupportedCombination
from .graphs import EdgeRef, Graph

ArcKey = tuple[int, int, str]  # (tail, head, kind)


@dataclass(frozen=True)
class TurnPenalty:
    """Bonus weight added whenever arc (j,k) is immediately followed by (k,r)."""

    in_tail: int
    in_head: int
    out_head: int
    bonus: float

    def __post_init__(self) -> None:
        if self.bonus < 0:
            raise SpecError("turn bonus weights must be non-negative")

    @property
    def arc_in(self) -> tuple[int, int]:
        return (self.in_tail, self.in_head)

    @property
    def arc_out(self) -> tuple[int, int]:
        return (self.in_head, self.out_head)


@dataclass(frozen=True)
class ServiceMode:
    """Service/traversal split: every arc doubles into a servicing variant
    (required edges must be serviced exactly once) and a plain traversal.

    Weights default to the graph's arc weights; overrides are (tail, head,
    kind, weight) tuples.
    """

    service_overrides: tuple[tuple[int, int, str, float], ...] = ()
    traverse_overrides: tuple[tuple[int, int, str, float], ...] = ()

    def service_map(self) -> dict[ArcKey, float]:
        return {(t, h, k): w for t, h, k, w in self.service_overrides}

    def traverse_map(self) -> dict[ArcKey, float]:
        return {(t, h, k): w for t, h, k, w in self.traverse_overrides}


@dataclass(frozen=True)
class Postmen:
    """Postman count with optional per-postman capacities and arc weights."""

    count: int = 1
    capacities: tuple[float, ...] | None = None
    weights: tuple[tuple[tuple[int, int, str, float], ...], ...] | None = None

    def __post_init__(self) -> None:
        if self.count < 1:
            raise SpecError("postman count must be >= 1")
        if self.capacities is not None and len(self.capacities) != self.count:
            raise SpecError("need one capacity per postman")
        if self.weights is not None and len(self.weights) != self.count:
            raise SpecError("need one weight table per postman")

    def weight_map(self, postman: int) -> dict[ArcKey, float]:
        if self.weights is None:
            return {}
        return {(t, h, k): w for t, h, k, w in self.weights[postman]}


def _is_integral(value: float) -> bool:
    return math.isfinite(value) and float(value) == int(value)


@dataclass(frozen=True)
class ProblemSpec:
    """One postman-problem instance for the general compiler.

    required_edges=None means every edge is required (the proper-subset case
    is the rural variant).  i_max=None defaults to twice the edge count.
    """

    graph: Graph
    start: int | None = None
    stop: int | None = None
    required_edges: frozenset[EdgeRef] | None = None
    turn_penalties: tuple[TurnPenalty, ...] = ()
    service: ServiceMode | None = None
    hierarchy: tuple[tuple[EdgeRef, EdgeRef], ...] = ()
    postmen: Postmen = field(default_factory=Postmen)
    forbid_edge_collisions: bool = False
    i_max: int | None = None

    def __post_init__(self) -> None:
        g = self.graph
        if self.start is not None and self.start not in g.vertices:
            raise SpecError(f"start vertex {self.start} not in graph")
        if self.stop is not None and self.stop not in g.vertices:
            raise SpecError(f"stop vertex {self.stop} not in graph")

        all_refs = set(g.edge_refs())
        if self.required_edges is not None:
            extra = set(self.required_edges) - all_refs
            if extra:
                raise SpecError(f"required edges not in graph: {sorted(map(str, extra))}")

        if self.i_max is not None and self.i_max < 1:
            raise SpecError("i_max must be a positive integer")

        arc_keys = {(a.tail, a.head) for a in g.arcs()}
        for t in self.turn_penalties:
            if t.arc_in not in arc_keys or t.arc_out not in arc_keys:
                raise SpecError(f"turn tuple references missing arcs: {t}")

        required = set(self.resolved_required())
        for first, second in self.hierarchy:
            if first not in required or second not in required:
                raise SpecError("hierarchy pairs must reference required edges")
            if first == second:
                raise SpecError("hierarchy pair relates an edge to itself")
        if self.hierarchy and self.service is None:
            raise SpecError("hierarchy ordering requires service mode")
        # closure must stay acyclic (partial order)
        closure = self.hierarchy_closure()
        for a, b in closure:
            if a == b:
                raise SpecError(f"hierarchy relation is cyclic through {a}")

        if self.service is not None and self.postmen.count > 1:
            raise UnsupportedCombination(
                "service/traversal mode with multiple postmen is not modeled"
            )
        if self.uses_rest_encoding and self.stop is not None:
            raise UnsupportedCombination(
                "rest-based formulations end walks freely; stop vertex unsupported"
            )
        if self.uses_rest_encoding and self.service is not None:
            raise UnsupportedCombination(
                "rest-based formulations do not combine with service mode"
            )

        for key, w in self._service_weight_overrides().items():
            self._check_arc_key(key)
            if w < 0:
                raise SpecError("service/traverse weights must be non-negative")
        if self.postmen.weights is not None:
            for a in range(self.postmen.count):
                for key, w in self.postmen.weight_map(a).items():
                    self._check_arc_key(key)
                    if w < 0:
                        raise SpecError("postman weights must be non-negative")

        if self.postmen.capacities is not None:
            for c in self.postmen.capacities:
                if not _is_integral(c) or c < 1:
                    raise SpecError("capacities must be positive integers")
            for a in range(self.postmen.count):
                for arc in g.arcs():
                    if not _is_integral(self.postman_weight(a, arc.tail, arc.head, arc.ref.kind)):
                        raise SpecError("capacitated problems need integer arc weights")

    def _check_arc_key(self, key: ArcKey) -> None:
        tail, head, kind = key
        ok = any(
            a.tail == tail and a.head == head and a.ref.kind == kind
            for a in self.graph.arcs()
        )
        if not ok:
            raise SpecError(f"weight override references missing arc {key}")

    def _service_weight_overrides(self) -> Mapping[ArcKey, float]:
        if self.service is None:
            return {}
        merged = dict(self.service.service_map())
        merged.update(self.service.traverse_map())
        return merged

    # -- derived views ----------------------------------------------------

    def resolved_required(self) -> tuple[EdgeRef, ...]:
        if self.required_edges is None:
            return tuple(sorted(self.graph.edge_refs()))
        return tuple(sorted(self.required_edges))

    @property
    def effective_i_max(self) -> int:
        return self.i_max if self.i_max is not None else 2 * self.graph.edge_count

    @property
    def uses_rest_encoding(self) -> bool:
        return (
            self.postmen.count > 1
            or self.postmen.capacities is not None
            or self.forbid_edge_collisions
        )

    def hierarchy_closure(self) -> frozenset[tuple[EdgeRef, EdgeRef]]:
        """Transitive closure of the must-precede pairs."""
        closure = set(self.hierarchy)
        changed = True
        while changed:
            changed = False
            for a, b in list(closure):
                for c, d in list(closure):
                    if b == c and (a, d) not in closure:
                        closure.add((a, d))
                        changed = True
        return frozenset(closure)

    def base_arc_weight(self, tail: int, head: int, kind: str) -> float:
        for arc in self.graph.arcs():
            if arc.tail == tail and arc.head == head and arc.ref.kind == kind:
                return arc.weight
        raise SpecError(f"no arc {tail}->{head} of kind {kind}")

    def postman_weight(self, postman: int, tail: int, head: int, kind: str) -> float:
        override = self.postmen.weight_map(postman).get((tail, head, kind))
        if override is not None:
            return override
        return self.base_arc_weight(tail, head, kind)

    def service_weight(self, tail: int, head: int, kind: str) -> float:
        if self.service is None:
            raise SpecError("service weights only exist in service mode")
        override = self.service.service_map().get((tail, head, kind))
        if override is not None:
            return override
        return self.base_arc_weight(tail, head, kind)

    def traverse_weight(self, tail: int, head: int, kind: str) -> float:
        if self.service is None:
            raise SpecError("traverse weights only exist in service mode")
        override = self.service.traverse_map().get((tail, head, kind))
        if override is not None:
            return override
        return self.base_arc_weight(tail, head, kind)

    def with_required(self, refs: Iterable[EdgeRef]) -> "ProblemSpec":
        return replace(self, required_edges=frozenset(refs))
