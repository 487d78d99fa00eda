"""S-box detection and cipher identification.

Candidates are combinational cones between register stages (or global
I/O): output nets are grouped by identical boundary support, and a group of
n outputs over n inputs (3 <= n <= 8) is a candidate substitution.
Identification tries every input bit permutation and matches output columns
as a multiset against each known cipher table; a hit reports the exact
permutations, which re-verify by construction.  Everything is deterministic:
candidates sort by their lowest output net id, permutations enumerate in
lexicographic order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import boolfunc as bf
from .cones import cone_functions, cone_gates, cone_support
from .sboxes import builtin_sbox_entries

MIN_WIDTH = 3
MAX_WIDTH = 8

MATCH = "match"
BIJECTIVE_UNKNOWN = "bijective_unknown"
NOT_BIJECTIVE = "not_bijective"


@dataclass(frozen=True)
class SBoxCandidate:
    """A same-support slice of combinational logic between stages.

    ``table[x]`` packs the output-net values (in ``output_nets`` order) for
    the input assignment x (bit i of x drives ``input_nets[i]``).
    """

    input_nets: tuple
    output_nets: tuple
    gates: frozenset
    table: tuple

    @property
    def n(self):
        return len(self.input_nets)


@dataclass(frozen=True)
class Identification:
    status: str
    cipher: str | None = None
    input_perm: tuple | None = None
    output_perm: tuple | None = None


@dataclass(frozen=True)
class ScanHit:
    candidate: SBoxCandidate
    identification: Identification
    module: int
    near_groups: tuple


def _data_input_nets(netlist):
    """Nets feeding flip-flop data pins or global outputs: stage sinks."""
    from .dataflow import classify_ff_pins

    sinks = set()
    for gate in netlist.gates.values():
        if not gate.is_sequential:
            continue
        _, _, _, data_pins = classify_ff_pins(gate)
        for pin in data_pins:
            nid = gate.connections.get(pin)
            if nid is not None:
                sinks.add(nid)
    for net in netlist.nets.values():
        if net.global_output:
            sinks.add(net.id)
    return sinks


def enumerate_candidates(netlist, progress=None):
    """Equal-support output slices with n inputs and n outputs, n in [3,8]."""
    sinks = sorted(_data_input_nets(netlist))
    by_support = {}
    for idx, nid in enumerate(sinks):
        if progress:
            progress(0.5 * (idx + 1) / max(len(sinks), 1))
        support = frozenset(cone_support(netlist, nid))
        if MIN_WIDTH <= len(support) <= MAX_WIDTH:
            by_support.setdefault(support, []).append(nid)
    candidates = []
    items = sorted(by_support.items(), key=lambda kv: min(kv[1]))
    for idx, (support, outputs) in enumerate(items):
        if progress:
            progress(0.5 + 0.5 * (idx + 1) / max(len(items), 1))
        n = len(support)
        if len(outputs) != n:
            continue
        input_nets = tuple(sorted(support))
        output_nets = tuple(sorted(outputs))
        funcs = cone_functions(netlist, output_nets)
        order = [f"n{nid}" for nid in input_nets]
        columns = [bf.truth_table_int(funcs[nid], order) for nid in output_nets]
        table = []
        for x in range(1 << n):
            table.append(sum(((columns[j] >> x) & 1) << j for j in range(n)))
        gates = frozenset().union(
            *(cone_gates(netlist, nid) for nid in output_nets)
        )
        candidates.append(
            SBoxCandidate(input_nets, output_nets, gates, tuple(table))
        )
    return candidates


@lru_cache(maxsize=4)
def _perm_tables(n):
    """All input-bit permutations as a row-index matrix.

    Row p maps permuted input x to the candidate's own input index:
    ``xc[p, x] = sum_k bit_k(x) << perm_p[k]``.
    """
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    xs = np.arange(1 << n, dtype=np.int64)
    bits = (xs[:, None] >> np.arange(n)) & 1  # (2^n, n)
    weights = (1 << perms).astype(np.int64)  # (n!, n)
    xc = bits @ weights.T  # (2^n, n!)
    return perms, xc.T.astype(np.int64)  # (n!, 2^n)


def _column_keys(tables_2d, n):
    """Per-row sorted column fingerprints: (rows, n) array of void views."""
    bits = ((tables_2d[..., None] >> np.arange(n)) & 1).astype(np.uint8)
    packed = np.packbits(bits, axis=1)  # (rows, 2^n/8, n)
    packed = np.ascontiguousarray(np.swapaxes(packed, 1, 2))  # (rows, n, bytes)
    void = packed.reshape(packed.shape[0], n, -1).view(
        np.dtype((np.void, packed.shape[2]))
    )
    return void.reshape(packed.shape[0], n)


def _popcounts(table, n):
    arr = np.asarray(table, dtype=np.int64)
    return sorted(
        int(((arr >> j) & 1).sum()) for j in range(n)
    )


def identify(candidate, entries=None, progress=None) -> Identification:
    """Match a candidate against known substitutions up to bit permutations.

    ``input_perm[k]`` is the candidate input index playing library input bit
    k; ``output_perm[j]`` the candidate output index carrying library output
    bit j.  Non-matches are values, never errors.
    """
    entries = builtin_sbox_entries() if entries is None else entries
    n = candidate.n
    table = np.asarray(candidate.table, dtype=np.int64)
    if len(set(candidate.table)) != len(candidate.table):
        return Identification(NOT_BIJECTIVE)
    my_pops = _popcounts(candidate.table, n)
    for entry in entries:
        if entry.n != n:
            continue
        # column popcounts are invariant under input permutation
        if _popcounts(entry.table, n) != my_pops:
            continue
        lib_keys = _column_keys(np.asarray([entry.table], dtype=np.int64), n)[0]
        lib_sorted = np.sort(lib_keys)
        perms, xc = _perm_tables(n)
        chunk = 2048
        for start in range(0, len(perms), chunk):
            if progress:
                progress(start / len(perms))
            rows = xc[start : start + chunk]
            permuted = table[rows]  # (chunk, 2^n)
            keys = _column_keys(permuted, n)
            hit_rows = np.nonzero(
                (np.sort(keys, axis=1) == lib_sorted[None, :]).all(axis=1)
            )[0]
            for row in hit_rows:
                perm = tuple(int(v) for v in perms[start + row])
                out_perm = _match_columns(keys[row], lib_keys)
                if out_perm is not None:
                    return Identification(MATCH, entry.cipher, perm, out_perm)
    return Identification(BIJECTIVE_UNKNOWN)


def _match_columns(cand_keys, lib_keys):
    """output_perm[j] = candidate column index equal to library column j."""
    available = {}
    for i, key in enumerate(cand_keys):
        available.setdefault(key.tobytes(), []).append(i)
    out = []
    for j in range(len(lib_keys)):
        pool = available.get(lib_keys[j].tobytes())
        if not pool:
            return None
        out.append(pool.pop(0))
    return tuple(out)


def verify_identification(candidate, entry, identification) -> bool:
    """Re-check a claimed match by direct table application."""
    if identification.status != MATCH:
        return False
    p = identification.input_perm
    q = identification.output_perm
    n = candidate.n
    for x in range(1 << n):
        xc = 0
        for k in range(n):
            xc |= ((x >> k) & 1) << p[k]
        y = candidate.table[xc]
        got = 0
        for j in range(n):
            got |= ((y >> q[j]) & 1) << j
        if got != entry.table[x]:
            return False
    return True


def _owning_module(netlist, gates):
    if not gates:
        return netlist.top_module
    counts = {}
    for gid in gates:
        counts[netlist.gate(gid).module] = counts.get(netlist.gate(gid).module, 0) + 1
    best = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0]
    return best[0]


def _near_groups(netlist, candidate, dataflow_graph):
    if dataflow_graph is None:
        return ()
    ffs = set()
    for nid in candidate.input_nets:
        net = netlist.net(nid)
        driver = net.driver
        if driver is not None and netlist.gate(driver.gate).is_sequential:
            ffs.add(driver.gate)
    for nid in candidate.output_nets:
        for ep in netlist.net(nid).sinks:
            if netlist.gate(ep.gate).is_sequential:
                ffs.add(ep.gate)
    hits = set()
    for group in dataflow_graph.groups.values():
        if ffs & set(group.members):
            hits.add(group.id)
    return tuple(sorted(hits))


_CONFIDENCE = {MATCH: 0, BIJECTIVE_UNKNOWN: 1, NOT_BIJECTIVE: 2}


def scan(netlist, dataflow_graph=None, entries=None, progress=None):
    """Enumerate, identify and locate; hits sorted by confidence."""
    candidates = enumerate_candidates(
        netlist, progress=(lambda f: progress(f * 0.4)) if progress else None
    )
    hits = []
    for i, cand in enumerate(candidates):
        if progress:
            progress(0.4 + 0.6 * (i + 1) / max(len(candidates), 1))
        ident = identify(cand, entries)
        hits.append(
            ScanHit(
                candidate=cand,
                identification=ident,
                module=_owning_module(netlist, cand.gates),
                near_groups=_near_groups(netlist, cand, dataflow_graph),
            )
        )
    hits.sort(
        key=lambda h: (
            _CONFIDENCE[h.identification.status],
            h.candidate.output_nets[0],
        )
    )
    return hits


def serialize_scan(hits) -> dict:
    return {
        "hits": [
            {
                "inputs": list(h.candidate.input_nets),
                "outputs": list(h.candidate.output_nets),
                "width": h.candidate.n,
                "status": h.identification.status,
                "cipher": h.identification.cipher,
                "input_perm": list(h.identification.input_perm or ()),
                "output_perm": list(h.identification.output_perm or ()),
                "module": h.module,
                "near_groups": list(h.near_groups),
            }
            for h in hits
        ]
    }
