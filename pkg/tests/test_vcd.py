from gatescope import gen
from gatescope.sim import Stimulus, X, simulate
from gatescope.vcd import read_vcd, write_vcd


def counter_waveforms():
    nl, info = gen.up_counter(4)
    stimuli = [
        Stimulus.clock(info["clock"].id, 10),
        Stimulus.values(info["reset_n"].id, [(0, 0), (8, 1)]),
    ]
    return simulate(nl, stimuli, until=100), info


def test_single_toggle():
    b = gen.Builder("one")
    x = b.input("x")
    y = b.output(b.op("BUF", x))
    wf = simulate(b.netlist, [Stimulus.values(x.id, [(3, 1)])], until=10)
    text = write_vcd(wf)
    assert "$timescale 1ns $end" in text
    assert "#3" in text
    data = read_vcd(text)
    assert data.changes[wf.names[y.id]] == [(3, 1)]
    assert data.initial[wf.names[y.id]] == X


def test_same_tick_changes_grouped_in_id_order():
    b = gen.Builder("two")
    x = b.input("x")
    y1 = b.output(b.op("BUF", x))
    y2 = b.output(b.not_(x))
    wf = simulate(b.netlist, [Stimulus.values(x.id, [(0, 0), (5, 1)])], until=10)
    text = write_vcd(wf)
    lines = text.splitlines()
    at5 = lines.index("#5")
    block = lines[at5 + 1 : at5 + 4]
    assert len([l for l in block if not l.startswith("#")]) == 3
    data = read_vcd(text)
    assert data.changes[wf.names[y1.id]] == [(0, 0), (5, 1)]
    assert data.changes[wf.names[y2.id]] == [(0, 1), (5, 0)]


def test_counter_round_trip_change_lists():
    wf, info = counter_waveforms()
    text = write_vcd(wf, comment="counter fixture")
    data = read_vcd(text)
    assert data.timescale == "1ns"
    for nid in wf.nets:
        name = wf.names[nid]
        assert data.changes[name] == wf.changes[nid], name
        assert data.initial[name] == wf.initial[nid]
    assert data.end_time == wf.end_time


def test_deterministic_output():
    wf1, _ = counter_waveforms()
    wf2, _ = counter_waveforms()
    assert write_vcd(wf1) == write_vcd(wf2)


def test_x_emitted_lowercase():
    b = gen.Builder("xv")
    x = b.input("x")
    b.output(b.not_(x))
    wf = simulate(b.netlist, [], until=5)
    text = write_vcd(wf)
    dump = text.split("$dumpvars")[1].split("$end")[0]
    assert "x" in dump
