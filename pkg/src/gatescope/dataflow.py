"""Word-level register recovery from the sea of gates.

Flip-flops are first seeded into groups by control signature (clock net,
enable nets, asynchronous control nets), then refined iteratively: groups
split when members disagree on their predecessor/successor group multisets
and merge when distinct groups agree on control and neighborhood, until a
fixpoint (or a round cap).  The result partitions every flip-flop into
exactly one register group; the register-to-register dataflow graph records
which groups reach which through purely combinational paths.

All tie-breaking uses ascending-id order, making recovery deterministic for
a fixed netlist and configuration.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import boolfunc as bf
from .equiv import EquivConfig, equivalent

_CTRL_EQUIV = EquivConfig(brute_force_max_vars=16)


@dataclass(frozen=True)
class DataflowConfig:
    expected_widths: frozenset | None = None
    max_rounds: int = 25

    @staticmethod
    def make(expected_widths=None, max_rounds=25):
        widths = frozenset(expected_widths) if expected_widths else None
        return DataflowConfig(widths, max_rounds)


@dataclass
class RegisterGroup:
    id: int
    name: str
    members: tuple  # FF gate ids; recovered bit order when ordered=True
    clock_net: int
    control_nets: frozenset
    ordered: bool = False

    @property
    def width(self):
        return len(self.members)


@dataclass
class DataflowGraph:
    groups: dict  # id -> RegisterGroup
    edges: dict  # (src id, dst id) -> tuple of (src ff, dst ff) bit paths
    unclustered: frozenset = frozenset()

    def group_of(self, ff_id):
        for group in self.groups.values():
            if ff_id in group.members:
                return group
        return None

    def edge_set(self):
        return set(self.edges)


def classify_ff_pins(gate):
    """Split a flip-flop's input pins into roles.

    Returns (clock_pins, async_pins, enable_pins, data_pins).  A next-state
    pin is enable-like when pinning it makes the next state collapse to the
    held state or to a constant while other influences remain.
    """
    spec = gate.type.ff
    clock_pins = set(bf.support(spec.clock))
    async_pins = set()
    if spec.clear is not None:
        async_pins |= bf.support(spec.clear)
    if spec.preset is not None:
        async_pins |= bf.support(spec.preset)
    next_pins = bf.support(spec.next_state) - {spec.state_var}
    enable_pins = set()
    data_pins = set()
    state = bf.var(spec.state_var)
    references_state = spec.state_var in bf.support(spec.next_state)
    for pin in sorted(next_pins):
        is_enable = False
        if references_state and len(next_pins) > 1:
            for value in (0, 1):
                cof = bf.cofactor(spec.next_state, pin, value)
                if cof == state or equivalent(cof, state, _CTRL_EQUIV).is_equal:
                    is_enable = True
                    break
        if is_enable:
            enable_pins.add(pin)
        else:
            data_pins.add(pin)
    return clock_pins, async_pins, enable_pins, data_pins


def control_signature(netlist, gate):
    """(clock net, frozenset of control nets) for a flip-flop."""
    clock_pins, async_pins, enable_pins, _ = classify_ff_pins(gate)
    clock_nets = sorted(
        gate.connections[p] for p in clock_pins if p in gate.connections
    )
    clock = clock_nets[0] if clock_nets else None
    controls = set()
    for pin in async_pins | enable_pins:
        nid = gate.connections.get(pin)
        if nid is not None:
            controls.add(nid)
    return clock, frozenset(controls)


def ff_data_adjacency(netlist):
    """src FF -> sorted dst FFs with a combinational path into a data pin.

    Also returns the reverse map.  A path may be a direct wire; it never
    passes through another sequential gate.
    """
    ffs = sorted(g.id for g in netlist.gates.values() if g.is_sequential)
    data_pins_of = {}
    for gid in ffs:
        gate = netlist.gate(gid)
        _, _, _, data_pins = classify_ff_pins(gate)
        data_pins_of[gid] = data_pins

    # map net -> FFs that consume it on a data pin
    data_sink = {}
    for gid in ffs:
        gate = netlist.gate(gid)
        for pin in data_pins_of[gid]:
            nid = gate.connections.get(pin)
            if nid is not None:
                data_sink.setdefault(nid, set()).add(gid)

    succ = {gid: set() for gid in ffs}
    pred = {gid: set() for gid in ffs}
    for src in ffs:
        gate = netlist.gate(src)
        start_nets = [
            gate.connections[p]
            for p in gate.type.ff.output_binding
            if p in gate.connections
        ]
        seen = set()
        stack = list(start_nets)
        while stack:
            nid = stack.pop()
            if nid in seen:
                continue
            seen.add(nid)
            for dst in data_sink.get(nid, ()):
                succ[src].add(dst)
                pred[dst].add(src)
            net = netlist.net(nid)
            for ep in net.sinks:
                sink_gate = netlist.gate(ep.gate)
                if sink_gate.is_sequential:
                    continue
                for pin, out_nid in sink_gate.connections.items():
                    if sink_gate.type.pin_direction(pin) == "output":
                        stack.append(out_nid)
    return (
        {g: tuple(sorted(s)) for g, s in succ.items()},
        {g: tuple(sorted(p)) for g, p in pred.items()},
    )


def _neighbor_groups(ff_ids, labels):
    # set of adjacent groups, not a count multiset: counting bit-level paths
    # splits carry-chain neighbors position by position
    return tuple(sorted({labels[f] for f in ff_ids}))


def _io_flags(netlist, ffs, data_pins_of):
    """(reads_external, drives_output) per FF.

    Static tie-breakers for register cycles that are symmetric under the
    group-set signature: whether the data cone reaches a global input or an
    undriven net, and whether the state output reaches a global output.
    """
    flags = {}
    for gid in ffs:
        gate = netlist.gate(gid)
        reads_external = False
        stack = [
            gate.connections[p] for p in data_pins_of[gid] if p in gate.connections
        ]
        seen = set()
        while stack:
            nid = stack.pop()
            if nid in seen:
                continue
            seen.add(nid)
            net = netlist.net(nid)
            driver = net.driver
            if net.global_input or driver is None:
                reads_external = True
                break
            drv = netlist.gate(driver.gate)
            if drv.is_sequential:
                continue
            stack.extend(
                drv.connections[p]
                for p in drv.type.input_pins
                if p in drv.connections
            )
        drives_output = False
        stack = [
            gate.connections[p]
            for p in gate.type.ff.output_binding
            if p in gate.connections
        ]
        seen = set()
        while stack:
            nid = stack.pop()
            if nid in seen:
                continue
            seen.add(nid)
            net = netlist.net(nid)
            if net.global_output:
                drives_output = True
                break
            for ep in net.sinks:
                sink = netlist.gate(ep.gate)
                if sink.is_sequential:
                    continue
                stack.extend(
                    sink.connections[p]
                    for p in sink.type.output_pins
                    if p in sink.connections
                )
        flags[gid] = (reads_external, drives_output)
    return flags


def _is_single_chain(members, succ, pred):
    """True when the members form exactly one single-bit chain or cycle.

    Chain bits take register data only from their chain predecessor; data
    may leave anywhere.  Such seeds are shift registers and survive
    refinement whole (their internal structure would otherwise split them
    position by position).
    """
    members = set(members)
    if len(members) < 2:
        return False
    heads = []
    for f in members:
        preds_f = set(pred[f])
        if not preds_f <= members:
            return False
        if len(preds_f) > 1:
            return False
        if len([d for d in succ[f] if d in members]) > 1:
            return False
        if not preds_f:
            heads.append(f)
    if len(heads) > 1:
        return False
    cursor = heads[0] if heads else min(members)
    seen = set()
    while cursor is not None and cursor not in seen:
        seen.add(cursor)
        internal = [d for d in succ[cursor] if d in members]
        nxt = internal[0] if internal else None
        if nxt in seen:
            break
        cursor = nxt
    return seen == members


def _canonical_labels(partition_members):
    """Relabel groups as 0..k-1 by ascending minimum member id."""
    ordered = sorted(partition_members, key=min)
    labels = {}
    for idx, members in enumerate(ordered):
        for f in members:
            labels[f] = idx
    return labels, ordered


def recover_registers(netlist, config=None, progress=None) -> DataflowGraph:
    """Partition all flip-flops into word-level register groups.

    Deterministic for fixed input and configuration; a purely combinational
    netlist yields an empty graph.
    """
    config = config or DataflowConfig()
    ffs = sorted(g.id for g in netlist.gates.values() if g.is_sequential)
    if not ffs:
        return DataflowGraph({}, {}, frozenset())

    control = {gid: control_signature(netlist, netlist.gate(gid)) for gid in ffs}
    succ, pred = ff_data_adjacency(netlist)
    data_pins_of = {
        gid: classify_ff_pins(netlist.gate(gid))[3] for gid in ffs
    }
    io_flags = _io_flags(netlist, ffs, data_pins_of)

    # seed: identical control signature; seeds that form one shift chain are
    # frozen (kept whole through all refinement rounds)
    seed = {}
    for gid in ffs:
        seed.setdefault(control[gid], []).append(gid)
    seed_sets = [frozenset(v) for v in seed.values()]
    frozen = {s for s in seed_sets if _is_single_chain(s, succ, pred)}
    labels, groups = _canonical_labels(seed_sets)

    reached_fixpoint = False
    previous_labels = None
    for round_no in range(config.max_rounds):
        if progress:
            progress((round_no + 1) / config.max_rounds)
        signature = {
            f: (
                control[f],
                io_flags[f],
                _neighbor_groups(pred[f], labels),
                _neighbor_groups(succ[f], labels),
            )
            for f in ffs
        }
        # split: members of one group with differing signatures part ways;
        # merge: distinct groups sharing a signature fuse (one signature
        # class per bucket), unless the width falls outside the expected set
        split = {}
        passthrough = []
        for members in groups:
            if members in frozen:
                passthrough.append(members)
                continue
            by_sig = {}
            for f in sorted(members):
                by_sig.setdefault(signature[f], []).append(f)
            for sig, part in by_sig.items():
                split.setdefault(sig, []).append(frozenset(part))
        merged = list(passthrough)
        for sig, parts in sorted(
            split.items(), key=lambda kv: min(min(p) for p in kv[1])
        ):
            parts = sorted(parts, key=min)
            total = sum(len(p) for p in parts)
            if len(parts) == 1:
                merged.extend(parts)
            elif config.expected_widths is None or total in config.expected_widths:
                merged.append(frozenset().union(*parts))
            else:
                merged.extend(parts)
        new_labels, new_groups = _canonical_labels(merged)
        if new_labels == labels:
            reached_fixpoint = True
            break
        previous_labels = labels
        labels, groups = new_labels, new_groups
    if not reached_fixpoint and previous_labels is not None:
        # round cap hit: flip-flops that were still moving become singletons
        changed = {f for f in ffs if previous_labels[f] != labels[f]}
        if changed:
            kept = [frozenset(m - changed) for m in groups if m - changed]
            kept += [frozenset({f}) for f in sorted(changed)]
            labels, groups = _canonical_labels(kept)

    result_groups = {}
    for idx, members in enumerate(groups, start=1):
        rep = min(members)
        clock, controls = control[rep]
        result_groups[idx] = RegisterGroup(
            id=idx,
            name=f"reg_{idx}",
            members=tuple(sorted(members)),
            clock_net=clock if clock is not None else -1,
            control_nets=controls,
            ordered=False,
        )
    edges = group_connections(netlist, result_groups, succ=succ)
    return DataflowGraph(result_groups, edges, frozenset())


def group_connections(netlist, groups, succ=None):
    """(src group, dst group) -> sorted bit-level (src ff, dst ff) paths."""
    if succ is None:
        succ, _ = ff_data_adjacency(netlist)
    group_of = {}
    for group in groups.values():
        for f in group.members:
            group_of[f] = group.id
    edges = {}
    for src_ff, dsts in succ.items():
        for dst_ff in dsts:
            key = (group_of[src_ff], group_of[dst_ff])
            edges.setdefault(key, set()).add((src_ff, dst_ff))
    return {k: tuple(sorted(v)) for k, v in sorted(edges.items())}


def serialize_graph(graph) -> dict:
    """JSON-shaped form stored in project analysis results."""
    return {
        "groups": [
            {
                "id": g.id,
                "name": g.name,
                "members": list(g.members),
                "clock_net": g.clock_net,
                "control_nets": sorted(g.control_nets),
                "ordered": g.ordered,
            }
            for g in sorted(graph.groups.values(), key=lambda g: g.id)
        ],
        "edges": [
            {
                "src": src,
                "dst": dst,
                "bits": [list(pair) for pair in bits],
            }
            for (src, dst), bits in sorted(graph.edges.items())
        ],
        "unclustered": sorted(graph.unclustered),
    }


def deserialize_graph(data) -> DataflowGraph:
    groups = {
        g["id"]: RegisterGroup(
            id=g["id"],
            name=g["name"],
            members=tuple(g["members"]),
            clock_net=g["clock_net"],
            control_nets=frozenset(g["control_nets"]),
            ordered=g.get("ordered", False),
        )
        for g in data["groups"]
    }
    edges = {
        (e["src"], e["dst"]): tuple(tuple(b) for b in e["bits"])
        for e in data["edges"]
    }
    return DataflowGraph(groups, edges, frozenset(data.get("unclustered", ())))
