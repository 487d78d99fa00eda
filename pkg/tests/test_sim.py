import itertools
import random

import pytest

from gatescope import boolfunc as bf
from gatescope import gen
from gatescope.cones import cone_functions, sequential_unroll
from gatescope.errors import OscillationError, SimulationError
from gatescope.gen import Builder
from gatescope.sim import Stimulus, X, simulate


def test_inverter_zero_delay():
    b = Builder("inv")
    x = b.input("x")
    y = b.output(b.not_(x))
    wf = simulate(b.netlist, [Stimulus.values(x.id, [(0, 0), (10, 1)])], until=20)
    assert wf.value_at(y.id, 0) == 1
    assert wf.value_at(y.id, 9) == 1
    assert wf.value_at(y.id, 10) == 0  # same tick, delta semantics
    assert wf.value_at(y.id, 20) == 0


def test_dff_samples_on_rising_edge():
    b = Builder("dff")
    clk = b.input("clk")
    d = b.input("d")
    q = b.net("q")
    b.cell("DFF", D=d, CK=clk, Q=q)
    wf = simulate(
        b.netlist,
        [
            Stimulus.values(clk.id, [(0, 0), (20, 1), (30, 0), (40, 1)]),
            Stimulus.values(d.id, [(0, 1), (25, 0)]),
        ],
        until=50,
    )
    assert wf.value_at(q.id, 10) == X  # not clocked yet
    assert wf.value_at(q.id, 19) == X
    assert wf.value_at(q.id, 20) == 1  # sampled at the edge, not earlier
    assert wf.value_at(q.id, 39) == 1
    assert wf.value_at(q.id, 40) == 0


def test_ff_chain_shifts_one_per_edge():
    nl, info = gen.shift_register(3)
    stimuli = [
        Stimulus.clock(info["clock"].id, 10),
        Stimulus.values(info["serial_in"].id, [(0, 1), (14, 0)]),
    ]
    for i, g in enumerate(info["gates"]):
        stimuli.append(Stimulus.values(info["q_nets"][i].id, [(0, 0)]))
    wf = simulate(nl, stimuli, until=60)
    q = [n.id for n in info["q_nets"]]
    # rising edges at 5, 15, 25, ...
    assert [wf.value_at(n, 6) for n in q] == [1, 0, 0]
    assert [wf.value_at(n, 16) for n in q] == [0, 1, 0]
    assert [wf.value_at(n, 26) for n in q] == [0, 0, 1]
    assert [wf.value_at(n, 36) for n in q] == [0, 0, 0]


def test_counter_counts_from_reset():
    nl, info = gen.up_counter(4)
    q = [n.id for n in info["q_nets"]]
    stimuli = [
        Stimulus.clock(info["clock"].id, 10),
        Stimulus.values(info["reset_n"].id, [(0, 0), (8, 1)]),
    ]
    wf = simulate(nl, stimuli, until=210)
    # async clear puts 0 everywhere before the first counted edge at t=15
    assert [wf.value_at(n, 4) for n in q] == [0, 0, 0, 0]
    values = []
    for edge in range(15, 206, 10):
        values.append(sum(wf.value_at(q[i], edge + 1) << i for i in range(4)))
    # oracle: direct next-state iteration from the reset value
    expect = [(k + 1) % 16 for k in range(len(values))]
    assert values == expect


def test_x_propagation_is_gate_exact():
    # X resolution is per gate function: a MUX with equal data inputs is
    # determined even when its select is X, but a cross-gate tautology stays X
    b = Builder("xprop")
    s = b.input("s")
    x = b.input("x")
    y = b.input("y")
    one = b.const(1)
    m = b.output(b.mux(s, one, one))
    w = b.output(b.and_(x, y))
    taut = b.output(b.or_(x, b.not_(x)))
    wf = simulate(b.netlist, [Stimulus.values(y.id, [(0, 0)])], until=5)
    assert wf.value_at(m.id, 1) == 1  # select X cannot matter
    assert wf.value_at(w.id, 1) == 0  # y=0 determines the AND
    assert wf.value_at(taut.id, 1) == X  # pessimism across two gates
    wf2 = simulate(b.netlist, [Stimulus.values(y.id, [(0, 1)])], until=5)
    assert wf2.value_at(w.id, 1) == X


def test_oscillation_detected():
    # a ring closed through a MUX: select high seeds a definite value, then
    # closing the loop makes it toggle forever within one timestep
    b = Builder("osc")
    sel = b.input("sel")
    seed = b.const(0)
    loop = b.netlist.add_net("loop")
    m = b.cell("MUX2", A=None, B=seed, S=sel)
    mout = b.net("mout")
    b.netlist.connect(m.id, "Y", mout.id)
    b.cell("INV", A=mout, Y=loop)
    b.netlist.connect(m.id, "A", loop.id)
    with pytest.raises(OscillationError) as exc:
        simulate(
            b.netlist,
            [Stimulus.values(sel.id, [(0, 1), (10, 0)])],
            until=20,
        )
    assert exc.value.time == 10
    assert set(exc.value.nets) <= {loop.id, mout.id}


def test_missing_driver_error():
    b = Builder("missing")
    x = b.input("x")
    inner = b.not_(x)
    out = b.output(b.not_(inner))
    inv2 = b.netlist.net(out.id).driver.gate
    with pytest.raises(SimulationError) as exc:
        simulate(b.netlist, [], until=5, region={inv2})
    assert "missing driver" in str(exc.value)
    # giving the boundary net a stimulus fixes it
    wf = simulate(
        b.netlist, [Stimulus.values(inner.id, [(0, 1)])], until=5, region={inv2}
    )
    assert wf.value_at(out.id, 1) == 0


def test_state_override_via_ff_output_stimulus():
    nl, info = gen.shift_register(2)
    q = info["q_nets"]
    stimuli = [
        Stimulus.clock(info["clock"].id, 10),
        Stimulus.values(info["serial_in"].id, [(0, 0)]),
        Stimulus.values(q[0].id, [(0, 1)]),
        Stimulus.values(q[1].id, [(0, 0)]),
    ]
    wf = simulate(nl, stimuli, until=20)
    assert wf.value_at(q[0].id, 0) == 1
    assert wf.value_at(q[1].id, 0) == 0
    assert wf.value_at(q[1].id, 6) == 1  # shifted at the t=5 edge


def test_state_at_conventions():
    b = Builder("conv")
    x = b.input("x")
    y = b.output(b.op("BUF", x))
    wf = simulate(b.netlist, [Stimulus.values(x.id, [(5, 1), (9, 0)])], until=10)
    assert wf.state_at(0)[y.id] == X  # before first change: initial value
    assert wf.state_at(5)[y.id] == 1  # closed-left: change visible at t
    assert wf.state_at(10)[y.id] == 0  # end time
    with pytest.raises(SimulationError):
        wf.state_at(11)
    with pytest.raises(SimulationError):
        wf.state_at(-1)


def test_waveform_changes_deduplicated():
    b = Builder("dedupe")
    x = b.input("x")
    y = b.output(b.op("BUF", x))
    wf = simulate(
        b.netlist,
        [Stimulus.values(x.id, [(0, 1), (5, 1), (7, 0)])],
        until=10,
    )
    assert wf.changes[y.id] == [(0, 1), (7, 0)]


def exhaustive_comb_check(rng, n_inputs, n_gates):
    """Drive all 2^n vectors through one event-driven run and compare with
    boolean cone functions evaluated per vector."""
    nl, inputs, outputs = gen.random_combinational(rng, n_inputs, n_gates)
    funcs = cone_functions(nl, [n.id for n in outputs])
    stimuli = []
    for i, net in enumerate(inputs):
        changes = []
        prev = None
        for t, vec in enumerate(range(1 << n_inputs)):
            v = (vec >> i) & 1
            if v != prev:
                changes.append((t, v))
                prev = v
        stimuli.append(Stimulus.values(net.id, changes))
    until = (1 << n_inputs) - 1
    wf = simulate(nl, stimuli, until=until)
    for vec in range(1 << n_inputs):
        env = {f"n{inputs[i].id}": (vec >> i) & 1 for i in range(n_inputs)}
        for net in outputs:
            assert wf.value_at(net.id, vec) == bf.evaluate(funcs[net.id], env), (
                vec,
                net.id,
            )


def test_simulation_matches_cone_functions_exhaustively():
    rng = random.Random(99)
    for _ in range(5):
        exhaustive_comb_check(rng, rng.randint(3, 8), rng.randint(10, 60))


def test_sequential_matches_unroll():
    rng = random.Random(7)
    nl, info = gen.random_sequential(rng, 6, 30)
    region = set(nl.gates)
    ffs = info["ffs"]
    inputs = info["inputs"]
    const_inputs = {net.id: [rng.randint(0, 1)] * 8 for net in inputs}
    states = sequential_unroll(nl, region, 8, input_policy=const_inputs)
    stimuli = [Stimulus.clock(info["clock"].id, 10)]
    for net in inputs:
        stimuli.append(Stimulus.values(net.id, [(0, const_inputs[net.id][0])]))
    init = {g.id: rng.randint(0, 1) for g in ffs}
    for g in ffs:
        qnet = g.connections.get("Q")
        stimuli.append(Stimulus.values(qnet, [(0, init[g.id])]))
    wf = simulate(nl, stimuli, until=100)
    # rising edges at 5, 15, 25...: state k is visible just after edge k
    for k in range(9):
        want = states[k].evaluate(init)
        t = 1 + 5 + 10 * (k - 1) if k > 0 else 1
        for g in ffs:
            got = wf.value_at(g.connections["Q"], t)
            assert got == want[g.id], (k, g.id)
