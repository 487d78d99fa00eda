"""Value-change-dump export plus a minimal reader used as a test oracle.

Output is the 1-bit-wire subset of the VCD format: ``$timescale 1ns``,
deterministic identifier codes assigned in ascending net-id order, a
``$dumpvars`` block with the initial values, and time-ordered change
records.  Unknowns are emitted as ``x``.
"""

from __future__ import annotations

from .sim import X

_ID_FIRST, _ID_LAST = 33, 126  # printable VCD identifier range '!'..'~'


def _id_code(index):
    span = _ID_LAST - _ID_FIRST + 1
    code = ""
    index += 1
    while index > 0:
        index -= 1
        code = chr(_ID_FIRST + index % span) + code
        index //= span
    return code


def _value_char(value):
    if value == X:
        return "x"
    return str(value)


def _sanitize(name):
    return name.replace(" ", "_")


def write_vcd(waveforms, *, date="", comment="", scope="top") -> str:
    """Serialize a WaveformSet; identical inputs give identical output."""
    nets = waveforms.nets
    codes = {nid: _id_code(i) for i, nid in enumerate(nets)}
    lines = []
    if date:
        lines += ["$date", f"    {date}", "$end"]
    if comment:
        lines += ["$comment", f"    {comment}", "$end"]
    lines += ["$timescale 1ns $end", f"$scope module {_sanitize(scope)} $end"]
    for nid in nets:
        name = _sanitize(waveforms.names.get(nid, f"net{nid}"))
        lines.append(f"$var wire 1 {codes[nid]} {name} $end")
    lines += ["$upscope $end", "$enddefinitions $end", "$dumpvars"]
    for nid in nets:
        lines.append(f"{_value_char(waveforms.initial[nid])}{codes[nid]}")
    lines.append("$end")
    by_time = {}
    for nid in nets:
        for t, v in waveforms.changes[nid]:
            by_time.setdefault(t, []).append((nid, v))
    for t in sorted(by_time):
        lines.append(f"#{t}")
        for nid, v in sorted(by_time[t]):
            lines.append(f"{_value_char(v)}{codes[nid]}")
    if waveforms.end_time not in by_time:
        lines.append(f"#{waveforms.end_time}")
    return "\n".join(lines) + "\n"


class VcdData:
    """Parsed subset-VCD content, keyed by variable reference name."""

    def __init__(self):
        self.timescale = None
        self.names = {}  # id code -> name
        self.initial = {}  # name -> value
        self.changes = {}  # name -> [(time, value)]
        self.end_time = 0


def _parse_value(ch):
    if ch in "xX":
        return X
    if ch in "01":
        return int(ch)
    raise ValueError(f"unsupported VCD value {ch!r}")


def read_vcd(text) -> VcdData:
    """Parse what :func:`write_vcd` emits (1-bit wires, scalar changes)."""
    data = VcdData()
    tokens = text.split()
    i = 0
    in_dump = False
    now = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok == "$timescale":
            parts = []
            i += 1
            while tokens[i] != "$end":
                parts.append(tokens[i])
                i += 1
            data.timescale = " ".join(parts)
        elif tok == "$var":
            # $var wire 1 <code> <name> $end
            kind, width, code = tokens[i + 1], tokens[i + 2], tokens[i + 3]
            name_parts = []
            i += 4
            while tokens[i] != "$end":
                name_parts.append(tokens[i])
                i += 1
            if kind != "wire" or width != "1":
                raise ValueError("reader supports 1-bit wires only")
            name = " ".join(name_parts)
            data.names[code] = name
            data.changes[name] = []
        elif tok in ("$date", "$comment", "$scope", "$upscope", "$enddefinitions"):
            while tokens[i] != "$end":
                i += 1
        elif tok == "$dumpvars":
            in_dump = True
        elif tok == "$end":
            in_dump = False
        elif tok.startswith("#"):
            now = int(tok[1:])
            data.end_time = max(data.end_time, now)
        else:
            value = _parse_value(tok[0])
            code = tok[1:]
            name = data.names[code]
            if in_dump:
                data.initial[name] = value
            else:
                data.changes[name].append((now, value))
        i += 1
    return data
