"""The in-memory netlist graph: gates, nets, endpoints, modules, groupings.

Identifiers are dense positive integers, never reused within a project;
names are labels and need not be unique.  Gate/net connectivity is stored on
both sides (gate connection maps and net driver/sink endpoint sets) and kept
consistent by the mutation API.  Multi-driven nets are representable during
construction and reported by :func:`lint`; analysis passes require a
lint-clean netlist.

Concurrency contract: mutations must be externally serialized (the API
server owns the write lock); analysis passes only read.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .errors import ConnectionError, HierarchyError, NetlistError, UnknownObjectError
from .library import INPUT, OUTPUT, PROP_SEQUENTIAL

PREDECESSORS = "predecessors"
SUCCESSORS = "successors"


class Marker(enum.Enum):
    """Pseudo-endpoints for nets crossing the netlist boundary."""

    GLOBAL_INPUT = "global_input"
    GLOBAL_OUTPUT = "global_output"

    def __repr__(self):
        return self.name


GLOBAL_INPUT = Marker.GLOBAL_INPUT
GLOBAL_OUTPUT = Marker.GLOBAL_OUTPUT


@dataclass(frozen=True, order=True)
class Endpoint:
    gate: int
    pin: str


class Gate:
    __slots__ = ("id", "name", "type_name", "type", "module", "connections")

    def __init__(self, gate_id, name, gate_type, module):
        self.id = gate_id
        self.name = name
        self.type_name = gate_type.name
        self.type = gate_type
        self.module = module
        self.connections = {}  # pin -> net id

    @property
    def is_sequential(self):
        return PROP_SEQUENTIAL in self.type.properties

    def __repr__(self):
        return f"Gate({self.id}, {self.name!r}, {self.type_name})"


class Net:
    __slots__ = ("id", "name", "drivers", "sinks", "global_input", "global_output")

    def __init__(self, net_id, name):
        self.id = net_id
        self.name = name
        self.drivers = set()  # endpoints (gate id, output pin)
        self.sinks = set()  # endpoints (gate id, input pin)
        self.global_input = False
        self.global_output = False

    @property
    def driver(self):
        """The unique driving endpoint, or None for an undriven net.

        Raises on multi-driven nets; run :func:`lint` first if the netlist
        may still be under construction.
        """
        if len(self.drivers) > 1:
            raise NetlistError(f"net {self.id} ({self.name!r}) has multiple drivers")
        return next(iter(self.drivers)) if self.drivers else None

    def __repr__(self):
        return f"Net({self.id}, {self.name!r})"


class Module:
    __slots__ = ("id", "name", "parent", "children", "gates", "_ports", "_ports_rev")

    def __init__(self, module_id, name, parent):
        self.id = module_id
        self.name = name
        self.parent = parent  # module id or None for the top module
        self.children = set()
        self.gates = set()
        self._ports = None
        self._ports_rev = -1

    def __repr__(self):
        return f"Module({self.id}, {self.name!r})"


class Grouping:
    __slots__ = ("id", "name", "color", "gates", "nets", "modules")

    def __init__(self, grouping_id, name, color):
        self.id = grouping_id
        self.name = name
        self.color = tuple(color)
        self.gates = set()
        self.nets = set()
        self.modules = set()

    def __repr__(self):
        return f"Grouping({self.id}, {self.name!r}, {self.color})"


@dataclass(frozen=True)
class LintIssue:
    kind: str  # multi_driver | undriven_net | unconnected_input
    object_kind: str
    object_id: int
    message: str


@dataclass(frozen=True)
class Cone:
    """Result of :func:`extract_cone`: a gate set plus entering nets."""

    gates: frozenset
    boundary_nets: frozenset


class Netlist:
    """Flat gate/net graph with an analyst-defined module tree on top."""

    def __init__(self, name, library):
        self.name = name
        self.library = library
        self.gates = {}
        self.nets = {}
        self.modules = {}
        self.groupings = {}
        self._next_gate = 1
        self._next_net = 1
        self._next_module = 2  # 1 is the top module
        self._next_grouping = 1
        self._membership = {}  # ("gate"|"net"|"module", id) -> grouping id
        self.revision = 0
        top = Module(1, name, None)
        self.modules[1] = top
        self.top_module = 1

    # -- lookups ------------------------------------------------------------

    def gate(self, gate_id) -> Gate:
        try:
            return self.gates[gate_id]
        except KeyError:
            raise UnknownObjectError(f"no gate with id {gate_id}") from None

    def net(self, net_id) -> Net:
        try:
            return self.nets[net_id]
        except KeyError:
            raise UnknownObjectError(f"no net with id {net_id}") from None

    def module(self, module_id) -> Module:
        try:
            return self.modules[module_id]
        except KeyError:
            raise UnknownObjectError(f"no module with id {module_id}") from None

    def grouping(self, grouping_id) -> Grouping:
        try:
            return self.groupings[grouping_id]
        except KeyError:
            raise UnknownObjectError(f"no grouping with id {grouping_id}") from None

    def net_by_name(self, name):
        for net in self.nets.values():
            if net.name == name:
                return net
        return None

    # -- construction -------------------------------------------------------

    def _touch(self):
        self.revision += 1

    def add_net(self, name) -> Net:
        net = Net(self._next_net, name)
        self.nets[net.id] = net
        self._next_net += 1
        self._touch()
        return net

    def add_gate(self, name, type_name, module=None) -> Gate:
        gate_type = self.library.get(type_name)
        if gate_type is None:
            raise NetlistError(f"unknown gate type {type_name!r}")
        module_id = self.top_module if module is None else module
        mod = self.module(module_id)
        gate = Gate(self._next_gate, name, gate_type, module_id)
        self.gates[gate.id] = gate
        mod.gates.add(gate.id)
        self._next_gate += 1
        self._touch()
        return gate

    def connect(self, gate_id, pin, net_id):
        gate = self.gate(gate_id)
        net = self.net(net_id)
        direction = gate.type.pin_direction(pin)
        if direction is None:
            raise ConnectionError(f"gate type {gate.type_name!r} has no pin {pin!r}")
        if pin in gate.connections:
            if direction == INPUT:
                raise ConnectionError(
                    f"input pin {pin!r} of gate {gate.id} is already driven"
                )
            raise ConnectionError(
                f"output pin {pin!r} of gate {gate.id} is already connected"
            )
        gate.connections[pin] = net.id
        ep = Endpoint(gate.id, pin)
        if direction == INPUT:
            net.sinks.add(ep)
        else:
            net.drivers.add(ep)
        self._touch()

    def disconnect(self, gate_id, pin):
        gate = self.gate(gate_id)
        if pin not in gate.connections:
            return
        net = self.net(gate.connections.pop(pin))
        ep = Endpoint(gate.id, pin)
        net.sinks.discard(ep)
        net.drivers.discard(ep)
        self._touch()

    def delete_gate(self, gate_id):
        gate = self.gate(gate_id)
        for pin in list(gate.connections):
            self.disconnect(gate_id, pin)
        self.module(gate.module).gates.discard(gate_id)
        self._remove_membership("gate", gate_id)
        del self.gates[gate_id]
        self._touch()

    def delete_net(self, net_id):
        net = self.net(net_id)
        if net.drivers or net.sinks:
            raise NetlistError(f"net {net_id} still has endpoints")
        self._remove_membership("net", net_id)
        del self.nets[net_id]
        self._touch()

    def set_global_input(self, net_id, flag=True):
        self.net(net_id).global_input = flag
        self._touch()

    def set_global_output(self, net_id, flag=True):
        self.net(net_id).global_output = flag
        self._touch()

    # -- module tree ----------------------------------------------------------

    def create_module(self, name, parent, gates=()) -> Module:
        parent_mod = self.module(parent)
        gate_ids = set(gates)
        for gid in gate_ids:
            gate = self.gate(gid)
            if gate.module != parent:
                raise HierarchyError(
                    f"gate {gid} belongs to module {gate.module}, not to parent {parent}"
                )
        mod = Module(self._next_module, name, parent)
        self._next_module += 1
        self.modules[mod.id] = mod
        parent_mod.children.add(mod.id)
        for gid in gate_ids:
            parent_mod.gates.discard(gid)
            mod.gates.add(gid)
            self.gates[gid].module = mod.id
        self._touch()
        return mod

    def move_gates(self, module_id, gate_ids):
        """Explicitly reparent gates into ``module_id`` from wherever they are."""
        mod = self.module(module_id)
        for gid in gate_ids:
            gate = self.gate(gid)
            self.module(gate.module).gates.discard(gid)
            mod.gates.add(gid)
            gate.module = module_id
        self._touch()

    def move_module(self, module_id, new_parent):
        if module_id == self.top_module:
            raise HierarchyError("cannot move the top module")
        mod = self.module(module_id)
        parent = self.module(new_parent)
        # walk up from the new parent; hitting the moved module means a cycle
        cursor = parent
        while cursor is not None:
            if cursor.id == module_id:
                raise HierarchyError(
                    f"moving module {module_id} under {new_parent} creates a cycle"
                )
            cursor = self.modules.get(cursor.parent) if cursor.parent else None
        self.module(mod.parent).children.discard(module_id)
        mod.parent = new_parent
        parent.children.add(module_id)
        self._touch()

    def module_subtree_gates(self, module_id):
        """All gate ids in the module and its descendants."""
        result = set()
        stack = [module_id]
        while stack:
            mod = self.module(stack.pop())
            result |= mod.gates
            stack.extend(mod.children)
        return result

    def module_ports(self, module_id):
        """Nets crossing the module boundary with inferred direction.

        Returns a sorted list of (net id, "input"|"output").  Cached per
        netlist revision.
        """
        mod = self.module(module_id)
        if mod._ports is not None and mod._ports_rev == self.revision:
            return mod._ports
        inside = self.module_subtree_gates(module_id)
        ports = []
        for net in self.nets.values():
            driven_inside = any(ep.gate in inside for ep in net.drivers)
            driven_outside = net.global_input or any(
                ep.gate not in inside for ep in net.drivers
            )
            consumed_inside = any(ep.gate in inside for ep in net.sinks)
            consumed_outside = net.global_output or any(
                ep.gate not in inside for ep in net.sinks
            )
            if driven_inside and consumed_outside:
                ports.append((net.id, OUTPUT))
            elif consumed_inside and driven_outside:
                ports.append((net.id, INPUT))
        ports.sort()
        mod._ports = ports
        mod._ports_rev = self.revision
        return ports

    # -- groupings ------------------------------------------------------------

    def create_grouping(self, name, color) -> Grouping:
        grouping = Grouping(self._next_grouping, name, color)
        self._next_grouping += 1
        self.groupings[grouping.id] = grouping
        self._touch()
        return grouping

    def _remove_membership(self, kind, object_id):
        gid = self._membership.pop((kind, object_id), None)
        if gid is not None and gid in self.groupings:
            grouping = self.groupings[gid]
            getattr(grouping, kind + "s").discard(object_id)

    def assign_to_grouping(self, grouping_id, kind, object_id):
        """Attach an object; membership is exclusive, reassignment moves it."""
        grouping = self.grouping(grouping_id)
        if kind == "gate":
            self.gate(object_id)
        elif kind == "net":
            self.net(object_id)
        elif kind == "module":
            self.module(object_id)
        else:
            raise NetlistError(f"unknown object kind {kind!r}")
        self._remove_membership(kind, object_id)
        getattr(grouping, kind + "s").add(object_id)
        self._membership[(kind, object_id)] = grouping_id
        self._touch()

    def grouping_of(self, kind, object_id):
        return self._membership.get((kind, object_id))

    def delete_grouping(self, grouping_id):
        grouping = self.grouping(grouping_id)
        for kind, members in (
            ("gate", grouping.gates),
            ("net", grouping.nets),
            ("module", grouping.modules),
        ):
            for oid in members:
                self._membership.pop((kind, oid), None)
        del self.groupings[grouping_id]
        self._touch()

    # -- traversal ------------------------------------------------------------

    def predecessors(self, obj):
        """Immediate fan-in endpoints of a Gate or Net, ascending id order."""
        return self._neighbors(obj, PREDECESSORS)

    def successors(self, obj):
        return self._neighbors(obj, SUCCESSORS)

    def _neighbors(self, obj, direction):
        if isinstance(obj, Gate):
            result = []
            markers = []
            if direction == PREDECESSORS:
                for pin, net_id in obj.connections.items():
                    if obj.type.pin_direction(pin) != INPUT:
                        continue
                    net = self.net(net_id)
                    result.extend(net.drivers)
                    if net.global_input:
                        markers.append(GLOBAL_INPUT)
            else:
                for pin, net_id in obj.connections.items():
                    if obj.type.pin_direction(pin) != OUTPUT:
                        continue
                    net = self.net(net_id)
                    result.extend(net.sinks)
                    if net.global_output:
                        markers.append(GLOBAL_OUTPUT)
        elif isinstance(obj, Net):
            markers = []
            if direction == PREDECESSORS:
                result = list(obj.drivers)
                if obj.global_input:
                    markers.append(GLOBAL_INPUT)
            else:
                result = list(obj.sinks)
                if obj.global_output:
                    markers.append(GLOBAL_OUTPUT)
        else:
            raise UnknownObjectError(f"cannot take neighbors of {obj!r}")
        return sorted(set(markers), key=lambda m: m.value) + sorted(set(result))

    def extract_cone(self, start, direction, depth=None, stop_at_sequential=False) -> Cone:
        """BFS closure of gates from ``start`` objects (gates and/or nets).

        ``depth`` counts gate hops (None = unbounded).  With
        ``stop_at_sequential``, sequential gates reached along the way are
        included but not expanded; start gates always expand.  Boundary nets
        are the nets entering the cone from outside.
        """
        if direction not in (PREDECESSORS, SUCCESSORS):
            raise NetlistError(f"bad direction {direction!r}")
        start_gates = []
        frontier = []
        for obj in start:
            if isinstance(obj, int):
                obj = self.gate(obj) if obj in self.gates else self.net(obj)
            if isinstance(obj, Gate):
                start_gates.append(obj.id)
            elif isinstance(obj, Net):
                eps = obj.drivers if direction == PREDECESSORS else obj.sinks
                frontier.extend(ep.gate for ep in eps)
            else:
                raise UnknownObjectError(f"bad start object {obj!r}")
        cone_gates = set()
        queue = [(gid, 0, True) for gid in start_gates]
        queue += [(gid, 1, False) for gid in frontier]
        while queue:
            next_queue = []
            for gid, dist, is_start in queue:
                if depth is not None and dist > depth:
                    continue
                if gid in cone_gates:
                    continue
                cone_gates.add(gid)
                gate = self.gate(gid)
                if stop_at_sequential and gate.is_sequential and not is_start:
                    continue
                for ep in self._neighbors(gate, direction):
                    if isinstance(ep, Endpoint):
                        next_queue.append((ep.gate, dist + 1, False))
            queue = next_queue
        boundary = set()
        for gid in cone_gates:
            gate = self.gates[gid]
            for pin, net_id in gate.connections.items():
                if gate.type.pin_direction(pin) != INPUT:
                    continue
                net = self.nets[net_id]
                if net.global_input or not net.drivers:
                    boundary.add(net_id)
                elif any(ep.gate not in cone_gates for ep in net.drivers):
                    boundary.add(net_id)
        return Cone(frozenset(cone_gates), frozenset(boundary))

    # -- consistency ----------------------------------------------------------

    def lint(self):
        """Structural problems that analyses refuse to work around."""
        issues = []
        for net in sorted(self.nets.values(), key=lambda n: n.id):
            driver_count = len(net.drivers) + (1 if net.global_input else 0)
            if driver_count > 1:
                issues.append(
                    LintIssue(
                        "multi_driver",
                        "net",
                        net.id,
                        f"net {net.id} ({net.name!r}) has {driver_count} drivers",
                    )
                )
            if net.sinks and driver_count == 0:
                issues.append(
                    LintIssue(
                        "undriven_net",
                        "net",
                        net.id,
                        f"net {net.id} ({net.name!r}) has sinks but no driver",
                    )
                )
        for gate in sorted(self.gates.values(), key=lambda g: g.id):
            for pin in gate.type.input_pins:
                if pin not in gate.connections:
                    issues.append(
                        LintIssue(
                            "unconnected_input",
                            "gate",
                            gate.id,
                            f"gate {gate.id} ({gate.name!r}) pin {pin} is unconnected",
                        )
                    )
        return issues

    def check_consistency(self):
        """Full-scan verification of the bidirectional endpoint invariant.

        Raises on any mismatch; meant for tests and load-time validation.
        """
        for gate in self.gates.values():
            if gate.module not in self.modules:
                raise NetlistError(f"gate {gate.id} references missing module")
            if gate.id not in self.modules[gate.module].gates:
                raise NetlistError(f"gate {gate.id} missing from its module set")
            for pin, net_id in gate.connections.items():
                direction = gate.type.pin_direction(pin)
                if direction is None:
                    raise NetlistError(f"gate {gate.id} uses unknown pin {pin}")
                net = self.nets.get(net_id)
                if net is None:
                    raise NetlistError(f"gate {gate.id} references missing net {net_id}")
                ep = Endpoint(gate.id, pin)
                side = net.sinks if direction == INPUT else net.drivers
                if ep not in side:
                    raise NetlistError(f"endpoint {ep} missing on net {net_id}")
        for net in self.nets.values():
            for ep in net.drivers | net.sinks:
                gate = self.gates.get(ep.gate)
                if gate is None:
                    raise NetlistError(f"net {net.id} references missing gate {ep.gate}")
                if gate.connections.get(ep.pin) != net.id:
                    raise NetlistError(f"endpoint {ep} not mirrored on gate side")
        seen = set()
        stack = [self.top_module]
        while stack:
            mid = stack.pop()
            if mid in seen:
                raise NetlistError("module tree contains a cycle")
            seen.add(mid)
            mod = self.modules[mid]
            for child in mod.children:
                if self.modules[child].parent != mid:
                    raise NetlistError(f"module {child} has wrong parent link")
                stack.append(child)
        if seen != set(self.modules):
            raise NetlistError("modules unreachable from the top module")
        owned = [gid for mid in self.modules for gid in self.modules[mid].gates]
        if len(owned) != len(set(owned)) or set(owned) != set(self.gates):
            raise NetlistError("gate/module ownership is not a partition")

    def summary(self):
        return {
            "name": self.name,
            "library": self.library.name,
            "gates": len(self.gates),
            "nets": len(self.nets),
            "modules": len(self.modules),
            "groupings": len(self.groupings),
            "global_inputs": sum(1 for n in self.nets.values() if n.global_input),
            "global_outputs": sum(1 for n in self.nets.values() if n.global_output),
            "sequential_gates": sum(1 for g in self.gates.values() if g.is_sequential),
        }
