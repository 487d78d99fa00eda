"""From netlist regions to Boolean functions.

``cone_functions`` composes the library's per-gate output functions through
the combinational fan-in of selected nets, stopping at flip-flop outputs,
global inputs, undriven nets and caller-given cut nets.  Boundary nets
become variables named ``n<net-id>``.

``sequential_unroll`` iterates flip-flop next-state functions for k cycles,
yielding symbolic state functions over the initial-state variables
``s<gate-id>`` and per-cycle input variables ``n<net-id>@<cycle>``.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import boolfunc as bf
from .errors import ClockingError, CombinationalCycleError, NetlistError


def net_var(net_id):
    return bf.var(f"n{net_id}")


def state_var(gate_id):
    return bf.var(f"s{gate_id}")


def cycle_var(net_id, cycle):
    return bf.var(f"n{net_id}@{cycle}")


def cone_functions(netlist, outputs, cut_nets=frozenset()):
    """Boolean functions of ``outputs`` over their stop-boundary nets.

    ``outputs`` is an iterable of net ids.  Traversal stops at sequential
    gate outputs, global inputs, undriven nets and any net in ``cut_nets``;
    those become variables ``n<net-id>``.  Raises on combinational cycles,
    reporting the nets along the cycle.
    """
    cut = set(cut_nets)
    cache = {}

    def is_boundary(net):
        if net.id in cut or net.global_input:
            return True
        driver = net.driver
        if driver is None:
            return True
        return netlist.gate(driver.gate).is_sequential

    result = {}
    for out in outputs:
        out_net = netlist.net(out)
        # iterative DFS with an explicit stack; grey marks detect cycles
        GREY, DONE = 0, 1
        state = {}
        stack = [out_net.id]
        path = []
        while stack:
            net_id = stack[-1]
            if net_id in cache or state.get(net_id) == DONE:
                stack.pop()
                continue
            net = netlist.net(net_id)
            if is_boundary(net):
                cache[net_id] = net_var(net_id)
                state[net_id] = DONE
                stack.pop()
                continue
            driver = net.driver
            gate = netlist.gate(driver.gate)
            dep_ids = []
            for pin in gate.type.input_pins:
                if pin not in gate.connections:
                    raise NetlistError(
                        f"gate {gate.id} ({gate.name!r}) input {pin} is unconnected; "
                        f"cannot extract a function through it"
                    )
                dep_ids.append(gate.connections[pin])
            if state.get(net_id) == GREY:
                # all dependencies resolved; compose
                pin_map = {
                    pin: cache[gate.connections[pin]] for pin in gate.type.input_pins
                }
                func = gate.type.output_functions[driver.pin]
                cache[net_id] = bf.substitute_all(func, pin_map)
                state[net_id] = DONE
                stack.pop()
                if path and path[-1] == net_id:
                    path.pop()
                continue
            state[net_id] = GREY
            path.append(net_id)
            for dep in dep_ids:
                if state.get(dep) == GREY:
                    # cycle: slice the grey path from the first occurrence
                    start = path.index(dep)
                    raise CombinationalCycleError(path[start:] + [dep])
                if dep not in cache:
                    stack.append(dep)
        result[out] = cache[out_net.id]
    return result


def cone_support(netlist, net_id, cut_nets=frozenset()):
    """Boundary net ids the given net combinationally depends on.

    Pure graph traversal; no function construction.  Cycles raise like
    :func:`cone_functions`.
    """
    cut = set(cut_nets)
    support = set()
    visited = set()
    on_path = set()
    order = []

    def is_boundary(net):
        if net.id in cut or net.global_input:
            return True
        driver = net.driver
        if driver is None:
            return True
        return netlist.gate(driver.gate).is_sequential

    stack = [(net_id, False)]
    while stack:
        nid, done = stack.pop()
        if done:
            on_path.discard(nid)
            order.pop()
            continue
        if nid in visited:
            continue
        net = netlist.net(nid)
        if is_boundary(net):
            visited.add(nid)
            support.add(nid)
            continue
        if nid in on_path:
            continue
        visited.add(nid)
        on_path.add(nid)
        order.append(nid)
        stack.append((nid, True))
        gate = netlist.gate(net.driver.gate)
        for pin in gate.type.input_pins:
            dep = gate.connections.get(pin)
            if dep is None:
                raise NetlistError(
                    f"gate {gate.id} ({gate.name!r}) input {pin} is unconnected"
                )
            if dep in on_path:
                start = order.index(dep)
                raise CombinationalCycleError(order[start:] + [dep])
            if dep not in visited:
                stack.append((dep, False))
    return support


def cone_gates(netlist, net_id, cut_nets=frozenset()):
    """Combinational gates feeding ``net_id`` up to the stop boundary."""
    cut = set(cut_nets)
    gates = set()
    seen = set()
    stack = [net_id]
    while stack:
        nid = stack.pop()
        if nid in seen:
            continue
        seen.add(nid)
        net = netlist.net(nid)
        if nid in cut or net.global_input:
            continue
        driver = net.driver
        if driver is None:
            continue
        gate = netlist.gate(driver.gate)
        if gate.is_sequential:
            continue
        gates.add(gate.id)
        for pin in gate.type.input_pins:
            dep = gate.connections.get(pin)
            if dep is not None:
                stack.append(dep)
    return gates


@dataclass(frozen=True)
class SymbolicState:
    """Flip-flop state functions after some number of cycles.

    ``functions`` maps FF gate id to a BooleanFunction over initial-state
    variables and per-cycle input variables.
    """

    cycle: int
    functions: dict

    def evaluate(self, initial_state, input_values=None):
        """Concrete FF values given initial state bits and input bits.

        ``initial_state`` maps FF gate id -> 0/1; ``input_values`` maps
        variable name (``n<id>@<cycle>``) -> 0/1 for symbolic inputs.
        """
        assignment = {f"s{gid}": v for gid, v in initial_state.items()}
        if input_values:
            assignment.update(input_values)
        return {
            gid: bf.evaluate(f, assignment) for gid, f in self.functions.items()
        }


def region_input_nets(netlist, region):
    """Nets consumed by region gates but not driven inside the region.

    Flip-flop output nets of region FFs are not inputs; they are state.
    """
    region = set(region)
    inputs = set()
    for gid in region:
        gate = netlist.gate(gid)
        for pin in gate.type.input_pins:
            nid = gate.connections.get(pin)
            if nid is None:
                continue
            net = netlist.net(nid)
            driver = net.driver
            if driver is None or driver.gate not in region:
                inputs.add(nid)
    return inputs


def single_clock_net(netlist, ffs):
    """The one clock net shared by all given FFs; raises otherwise."""
    clock_nets = set()
    for gate in ffs:
        pins = bf.support(gate.type.ff.clock)
        for pin in pins:
            nid = gate.connections.get(pin)
            if nid is None:
                raise ClockingError(
                    f"FF {gate.id} ({gate.name!r}) clock pin {pin} is unconnected"
                )
            clock_nets.add(nid)
    if len(clock_nets) > 1:
        raise ClockingError(
            f"region uses multiple clock nets: {sorted(clock_nets)}"
        )
    if not clock_nets:
        raise ClockingError("region has no clocked gates")
    return next(iter(clock_nets))


SYMBOLIC = "symbolic"


def sequential_unroll(netlist, region, cycles, input_policy=None):
    """Symbolically execute a single-clock region for ``cycles`` cycles.

    ``region`` is a gate-id set; ``input_policy`` maps region-input net ids
    to either ``"symbolic"`` (fresh variable per cycle, the default) or a
    sequence of 0/1 constants of length >= cycles.  Asynchronous clear and
    preset must resolve to constants each cycle; a constant 1 forces the
    state.  Returns ``cycles + 1`` states, index 0 being the initial
    variables ``s<gate-id>``.
    """
    region = set(region)
    input_policy = dict(input_policy or {})
    ffs = [netlist.gate(g) for g in sorted(region) if netlist.gate(g).is_sequential]
    if not ffs:
        raise ClockingError("region contains no flip-flops")
    clock_net = single_clock_net(netlist, ffs)

    inputs = region_input_nets(netlist, region)
    inputs.discard(clock_net)
    for nid, policy in input_policy.items():
        if policy != SYMBOLIC and len(policy) < cycles:
            raise ValueError(
                f"constant sequence for net {nid} shorter than {cycles} cycles"
            )

    # nets the cone extraction must not look through: everything that is not
    # driven by a combinational gate inside the region
    cut = set(inputs) | {clock_net}
    state_nets = {}
    for gate in ffs:
        for pin, binding in gate.type.ff.output_binding.items():
            nid = gate.connections.get(pin)
            if nid is not None:
                state_nets[nid] = (gate.id, binding)
    cut |= set(state_nets)

    def compose(gate, func):
        """A pin-level FF function composed over region cone functions."""
        pins = sorted(bf.support(func) - {gate.type.ff.state_var})
        needed = {}
        for pin in pins:
            nid = gate.connections.get(pin)
            if nid is None:
                raise NetlistError(
                    f"FF {gate.id} pin {pin} is unconnected"
                )
            needed[pin] = nid
        funcs = cone_functions(netlist, set(needed.values()), cut_nets=cut)
        return bf.substitute_all(func, {pin: funcs[nid] for pin, nid in needed.items()})

    next_fns = {}
    clear_fns = {}
    preset_fns = {}
    for gate in ffs:
        spec = gate.type.ff
        next_fns[gate.id] = compose(gate, spec.next_state)
        if spec.clear is not None:
            clear_fns[gate.id] = compose(gate, spec.clear)
        if spec.preset is not None:
            preset_fns[gate.id] = compose(gate, spec.preset)

    states = [SymbolicState(0, {g.id: state_var(g.id) for g in ffs})]
    for t in range(cycles):
        current = states[-1].functions
        # boundary variable n<id> -> function of the current cycle
        mapping = {}
        for nid, (gid, binding) in state_nets.items():
            f = current[gid]
            mapping[f"n{nid}"] = f if binding == "state" else bf.simplify(bf.not_(f))
        for nid in inputs:
            policy = input_policy.get(nid, SYMBOLIC)
            if policy == SYMBOLIC:
                mapping[f"n{nid}"] = cycle_var(nid, t)
            else:
                mapping[f"n{nid}"] = bf.const(int(policy[t]))
        new_state = {}
        for gate in ffs:
            forced = None
            for name, fns, value in (
                ("clear", clear_fns, 0),
                ("preset", preset_fns, 1),
            ):
                if gate.id not in fns:
                    continue
                ctrl = bf.simplify(bf.substitute_all(fns[gate.id], mapping))
                if not ctrl.is_constant:
                    raise ClockingError(
                        f"asynchronous {name} of FF {gate.id} is symbolic at "
                        f"cycle {t}; only constant async controls are supported"
                    )
                if ctrl.constant_value == 1:
                    if forced is not None and forced != value:
                        raise ClockingError(
                            f"FF {gate.id}: clear and preset both asserted at cycle {t}"
                        )
                    forced = value
            if forced is not None:
                new_state[gate.id] = bf.const(forced)
                continue
            f = bf.substitute_all(next_fns[gate.id], mapping)
            if gate.type.ff.state_var in bf.support(next_fns[gate.id]):
                f = bf.substitute(f, gate.type.ff.state_var, current[gate.id])
            new_state[gate.id] = bf.simplify(f)
        states.append(SymbolicState(t + 1, new_state))
    return states
