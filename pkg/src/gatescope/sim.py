"""Event-driven 3-valued simulation of netlist regions.

Zero-delay delta-cycle model: at each stimulus time, affected gates are
re-evaluated in waves with simultaneous commit until the region settles (cap
1000 iterations, then an oscillation error naming the unstable nets).
Values are ``0``, ``1`` and ``"X"``; a combinational output is X only when
the known inputs leave it undetermined.  Flip-flops sample their data input
when the cell's clock function rises 0 -> 1; asynchronous clear/preset
dominate the clock.  Everything initializes to X unless a stimulus overrides
it; a stimulus on a flip-flop output net sets the stored state.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from bisect import bisect_right

from . import boolfunc as bf
from .errors import OscillationError, SimulationError

X = "X"

DELTA_CAP = 1000
_EXACT_X_CAP = 16  # enumerate unknown completions up to this many X inputs


@dataclass(frozen=True)
class Stimulus:
    """Value schedule for one net.

    Either an explicit list of (time, value) changes with strictly
    increasing times, or a clock specification (period, duty, start value)
    expanded up to the simulation horizon.
    """

    net: int
    changes: tuple = ()
    clock_period: int | None = None
    clock_duty: float = 0.5
    clock_start: int = 0

    @staticmethod
    def values(net, changes):
        changes = tuple((int(t), v) for t, v in changes)
        times = [t for t, _ in changes]
        if any(t < 0 for t in times) or times != sorted(set(times)):
            raise SimulationError("stimulus times must be non-negative and strictly increasing")
        for _, v in changes:
            if v not in (0, 1, X):
                raise SimulationError(f"bad stimulus value {v!r}")
        return Stimulus(net=net, changes=changes)

    @staticmethod
    def clock(net, period, duty=0.5, start=0):
        if period < 2:
            raise SimulationError("clock period must be at least 2 ticks")
        if not 0 < duty < 1:
            raise SimulationError("duty cycle must be strictly between 0 and 1")
        if start not in (0, 1):
            raise SimulationError("clock start value must be 0 or 1")
        return Stimulus(net=net, clock_period=int(period), clock_duty=duty, clock_start=start)

    def expand(self, until):
        """Concrete (time, value) events up to and including ``until``."""
        if self.clock_period is None:
            return [(t, v) for t, v in self.changes if t <= until]
        period = self.clock_period
        high = max(1, min(period - 1, round(period * self.clock_duty)))
        low = period - high
        first = self.clock_start
        events = [(0, first)]
        t = 0
        value = first
        while t <= until:
            t += low if value == 0 else high
            value = 1 - value
            if t <= until:
                events.append((t, value))
        return events


class WaveformSet:
    """Per-net (time, value) change lists over a closed time range.

    Change lists store actual changes only; ``state_at`` resolves the value
    at any time in [0, end_time] with the closed-left convention (a change
    at t is visible at t).
    """

    def __init__(self, initial, changes, end_time, names):
        self.initial = dict(initial)
        self.changes = {n: list(c) for n, c in changes.items()}
        self.end_time = end_time
        self.names = dict(names)
        self._times = {n: [t for t, _ in c] for n, c in self.changes.items()}

    @property
    def nets(self):
        return sorted(self.initial)

    def value_at(self, net, t):
        if not 0 <= t <= self.end_time:
            raise SimulationError(f"time {t} outside [0, {self.end_time}]")
        times = self._times.get(net)
        if times is None:
            raise SimulationError(f"net {net} not in waveform set")
        idx = bisect_right(times, t)
        if idx == 0:
            return self.initial[net]
        return self.changes[net][idx - 1][1]

    def state_at(self, t):
        """Value of every net at time t."""
        return {net: self.value_at(net, t) for net in self.initial}


_support_cache = {}


def _cached_support(func):
    key = id(func)
    cached = _support_cache.get(key)
    if cached is None or cached[0] is not func:
        cached = (func, sorted(bf.support(func)))
        _support_cache[key] = cached
    return cached[1]


def _eval3(func, values):
    """Evaluate under a partial assignment; X only if truly undetermined."""
    names = _cached_support(func)
    known = {n: values[n] for n in names if values.get(n, X) != X}
    unknown = [n for n in names if n not in known]
    if not unknown:
        return bf.evaluate(func, known)
    if len(unknown) > _EXACT_X_CAP:
        return X  # pessimistic fallback; library cells never get here
    first = None
    for bits in itertools.product((0, 1), repeat=len(unknown)):
        assignment = dict(known)
        assignment.update(zip(unknown, bits))
        v = bf.evaluate(func, assignment)
        if first is None:
            first = v
        elif v != first:
            return X
    return first


class _FlipFlopState:
    __slots__ = ("state", "prev_clock")

    def __init__(self):
        self.state = X
        self.prev_clock = X


def simulate(netlist, stimuli, until, region=None) -> WaveformSet:
    """Run the region (default: whole netlist) up to time ``until``.

    Every net consumed by a region gate must be driven inside the region, be
    a global input, or carry a stimulus; anything else is a missing-driver
    error.  Returns the recorded waveforms including time 0 settling.
    """
    region = set(region) if region is not None else set(netlist.gates)
    for gid in region:
        netlist.gate(gid)
    stim_by_net = {}
    for st in stimuli:
        if st.net in stim_by_net:
            raise SimulationError(f"two stimuli target net {st.net}")
        netlist.net(st.net)
        stim_by_net[st.net] = st

    # nets of interest: anything touching a region gate, plus stimulated nets
    nets = set(stim_by_net)
    for gid in region:
        nets.update(netlist.gate(gid).connections.values())

    ff_runtime = {}
    state_override_nets = {}
    for gid in sorted(region):
        gate = netlist.gate(gid)
        if gate.is_sequential:
            ff_runtime[gid] = _FlipFlopState()
            for pin, binding in gate.type.ff.output_binding.items():
                nid = gate.connections.get(pin)
                if nid is not None:
                    state_override_nets[nid] = (gid, binding)

    # missing-driver check: consumed nets with an out-of-region driver and no
    # stimulus cannot be resolved
    for gid in sorted(region):
        gate = netlist.gate(gid)
        for pin in gate.type.input_pins:
            nid = gate.connections.get(pin)
            if nid is None:
                continue
            net = netlist.net(nid)
            driver = net.driver
            if driver is not None and driver.gate not in region and nid not in stim_by_net:
                raise SimulationError(
                    f"net {nid} ({net.name!r}) is driven outside the region and "
                    f"has no stimulus: missing driver"
                )

    events = {}
    for nid, st in stim_by_net.items():
        for t, v in st.expand(until):
            events.setdefault(t, []).append((nid, v))

    values = {nid: X for nid in nets}
    sinks_in_region = {}
    for nid in nets:
        net = netlist.net(nid)
        sinks_in_region[nid] = sorted(
            {ep.gate for ep in net.sinks if ep.gate in region}
        )

    initial = dict(values)
    waveform = {nid: [] for nid in nets}

    def gate_inputs(gate):
        out = {}
        for pin in gate.type.input_pins:
            nid = gate.connections.get(pin)
            out[pin] = values[nid] if nid is not None else X
        return out

    def eval_gate(gate):
        """New (net -> value) dict for a gate under current net values."""
        result = {}
        pins = gate_inputs(gate)
        if gate.is_sequential:
            rt = ff_runtime[gate.id]
            spec = gate.type.ff
            clk_now = _eval3(spec.clock, pins)
            state = rt.state
            clear = _eval3(spec.clear, pins) if spec.clear is not None else 0
            preset = _eval3(spec.preset, pins) if spec.preset is not None else 0
            if clear == 1 and preset == 1:
                state = X
            elif clear == 1:
                state = 0
            elif preset == 1:
                state = 1
            elif clear == X or preset == X:
                state = X
            elif rt.prev_clock == 0 and clk_now == 1:
                d = _eval3(spec.next_state, {**pins, spec.state_var: state})
                state = d
            rt.state = state
            rt.prev_clock = clk_now
            for pin, binding in spec.output_binding.items():
                nid = gate.connections.get(pin)
                if nid is None:
                    continue
                if binding == "state":
                    result[nid] = state
                else:
                    result[nid] = (1 - state) if state != X else X
        else:
            for pin, func in gate.type.output_functions.items():
                nid = gate.connections.get(pin)
                if nid is not None:
                    result[nid] = _eval3(func, pins)
        return result

    all_times = sorted(set(events) | {0})
    if all_times[-1] < until:
        all_times.append(until)

    def settle(pending, t):
        iterations = 0
        last_changed = set()
        while pending:
            iterations += 1
            if iterations > DELTA_CAP:
                raise OscillationError(t, sorted(last_changed))
            updates = {}
            for gid in sorted(pending):
                updates.update(eval_gate(netlist.gate(gid)))
            pending = set()
            last_changed = set()
            for nid, v in sorted(updates.items()):
                if (
                    nid in stim_by_net
                    and nid not in state_override_nets
                    and netlist.net(nid).drivers
                ):
                    # stimulus forces a driven net for the whole run
                    continue
                if values.get(nid, X) != v:
                    values[nid] = v
                    last_changed.add(nid)
                    pending.update(sinks_in_region.get(nid, ()))

    # time 0 settles the whole region before any override is applied
    pending = set(region)
    for t in all_times:
        if t > until:
            break
        step_start = dict(values)
        overrides = []
        for nid, v in events.get(t, []):
            if nid in state_override_nets:
                overrides.append((nid, v))
            elif values[nid] != v:
                values[nid] = v
                pending.update(sinks_in_region[nid])
        settle(pending, t)
        if overrides:
            # state overrides win over whatever the settle produced; commit
            # the stored state and its outputs directly, then settle fanout
            pending = set()
            for nid, v in overrides:
                gid, binding = state_override_nets[nid]
                if v == X:
                    ff_runtime[gid].state = X
                else:
                    ff_runtime[gid].state = v if binding == "state" else 1 - v
                gate = netlist.gate(gid)
                state = ff_runtime[gid].state
                for pin, bind in gate.type.ff.output_binding.items():
                    out_nid = gate.connections.get(pin)
                    if out_nid is None:
                        continue
                    if state == X:
                        out_v = X
                    else:
                        out_v = state if bind == "state" else 1 - state
                    if values[out_nid] != out_v:
                        values[out_nid] = out_v
                        pending.update(sinks_in_region.get(out_nid, ()))
            settle(pending, t)
        pending = set()

        for nid in nets:
            if values[nid] != step_start.get(nid, X):
                waveform[nid].append((t, values[nid]))

    names = {nid: netlist.net(nid).name for nid in nets}
    return WaveformSet(initial, waveform, until, names)


def state_at(waveforms, t):
    """Net values at time t (module-level convenience)."""
    return waveforms.state_at(t)
