"""Project save/load: one versioned JSON document.

The file embeds the gate library (or references it by path and SHA-256),
the full netlist including ids, module tree and groupings, analysis result
blobs keyed by pass name, and free-form metadata.  Keys are written in a
fixed order, so identical projects serialize byte-identically.  Loading
validates the version and the netlist invariants before returning; nothing
is partially loaded.
"""

from __future__ import annotations

import hashlib
import io
import json
import os
from dataclasses import dataclass, field

from . import boolfunc as bf
from .errors import ProjectFormatError
from .library import INPUT, FlipFlopSpec, GateLibrary, GateType, parse_liberty
from .netlist import Grouping, Module, Netlist

FORMAT_NAME = "gatescope-project"
FORMAT_VERSION = 1


@dataclass
class Project:
    netlist: Netlist
    analysis_results: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    @property
    def library(self):
        return self.netlist.library


def _library_to_dict(library):
    cells = []
    for gt in library:
        cell = {
            "name": gt.name,
            "pins": [[p, d] for p, d in gt.pins],
            "functions": {
                pin: bf.to_string(f) for pin, f in sorted(gt.output_functions.items())
            },
        }
        if gt.ff is not None:
            ff = {
                "state_var": gt.ff.state_var,
                "state_var_neg": gt.ff.state_var_neg,
                "next_state": bf.to_string(gt.ff.next_state),
                "clocked_on": bf.to_string(gt.ff.clock),
            }
            if gt.ff.clear is not None:
                ff["clear"] = bf.to_string(gt.ff.clear)
            if gt.ff.preset is not None:
                ff["preset"] = bf.to_string(gt.ff.preset)
            ff["output_binding"] = dict(sorted(gt.ff.output_binding.items()))
            cell["ff"] = ff
        cell["properties"] = sorted(gt.properties)
        cells.append(cell)
    return {"name": library.name, "cells": cells}


def _library_from_dict(data):
    gate_types = {}
    for cell in data["cells"]:
        ff = None
        if "ff" in cell:
            fd = cell["ff"]
            ff = FlipFlopSpec(
                state_var=fd["state_var"],
                state_var_neg=fd["state_var_neg"],
                next_state=bf.parse(fd["next_state"]),
                clock=bf.parse(fd["clocked_on"]),
                clear=bf.parse(fd["clear"]) if "clear" in fd else None,
                preset=bf.parse(fd["preset"]) if "preset" in fd else None,
                output_binding=dict(fd["output_binding"]),
            )
        gt = GateType(
            name=cell["name"],
            pins=tuple((p, d) for p, d in cell["pins"]),
            output_functions={
                pin: bf.parse(text) for pin, text in cell["functions"].items()
            },
            ff=ff,
            properties=frozenset(cell["properties"]),
        )
        gate_types[gt.name] = gt
    return GateLibrary(data["name"], gate_types)


def netlist_to_dict(netlist) -> dict:
    """Canonical JSON-shaped form (also the structural-identity witness)."""
    return {
        "name": netlist.name,
        "top_module": netlist.top_module,
        "next_ids": {
            "gate": netlist._next_gate,
            "net": netlist._next_net,
            "module": netlist._next_module,
            "grouping": netlist._next_grouping,
        },
        "gates": [
            {
                "id": g.id,
                "name": g.name,
                "type": g.type_name,
                "module": g.module,
                "connections": {pin: nid for pin, nid in sorted(g.connections.items())},
            }
            for g in sorted(netlist.gates.values(), key=lambda g: g.id)
        ],
        "nets": [
            {
                "id": n.id,
                "name": n.name,
                "global_input": n.global_input,
                "global_output": n.global_output,
            }
            for n in sorted(netlist.nets.values(), key=lambda n: n.id)
        ],
        "modules": [
            {
                "id": m.id,
                "name": m.name,
                "parent": m.parent,
                "gates": sorted(m.gates),
            }
            for m in sorted(netlist.modules.values(), key=lambda m: m.id)
        ],
        "groupings": [
            {
                "id": grp.id,
                "name": grp.name,
                "color": list(grp.color),
                "gates": sorted(grp.gates),
                "nets": sorted(grp.nets),
                "modules": sorted(grp.modules),
            }
            for grp in sorted(netlist.groupings.values(), key=lambda g: g.id)
        ],
    }


def _netlist_from_dict(data, library):
    netlist = Netlist(data["name"], library)
    netlist.modules.clear()
    for m in data["modules"]:
        mod = Module(m["id"], m["name"], m["parent"])
        mod.gates = set(m["gates"])
        netlist.modules[mod.id] = mod
    netlist.top_module = data["top_module"]
    for m in netlist.modules.values():
        if m.parent is not None:
            netlist.modules[m.parent].children.add(m.id)
    for n in data["nets"]:
        from .netlist import Net

        net = Net(n["id"], n["name"])
        net.global_input = n["global_input"]
        net.global_output = n["global_output"]
        netlist.nets[net.id] = net
    for g in data["gates"]:
        gate_type = library.get(g["type"])
        if gate_type is None:
            raise ProjectFormatError(
                f"gate {g['id']} uses type {g['type']!r} missing from the library"
            )
        from .netlist import Endpoint, Gate

        gate = Gate(g["id"], g["name"], gate_type, g["module"])
        netlist.gates[gate.id] = gate
        for pin, nid in g["connections"].items():
            direction = gate_type.pin_direction(pin)
            if direction is None:
                raise ProjectFormatError(f"gate {g['id']} has unknown pin {pin!r}")
            gate.connections[pin] = nid
            net = netlist.nets.get(nid)
            if net is None:
                raise ProjectFormatError(f"gate {g['id']} references missing net {nid}")
            ep = Endpoint(gate.id, pin)
            if direction == INPUT:
                net.sinks.add(ep)
            else:
                net.drivers.add(ep)
    for grp_data in data["groupings"]:
        grp = Grouping(grp_data["id"], grp_data["name"], tuple(grp_data["color"]))
        grp.gates = set(grp_data["gates"])
        grp.nets = set(grp_data["nets"])
        grp.modules = set(grp_data["modules"])
        netlist.groupings[grp.id] = grp
        for kind, members in (
            ("gate", grp.gates),
            ("net", grp.nets),
            ("module", grp.modules),
        ):
            for oid in members:
                netlist._membership[(kind, oid)] = grp.id
    ids = data["next_ids"]
    netlist._next_gate = ids["gate"]
    netlist._next_net = ids["net"]
    netlist._next_module = ids["module"]
    netlist._next_grouping = ids["grouping"]
    netlist.revision = 0
    return netlist


def project_to_dict(project, *, library_ref=None) -> dict:
    doc = {
        "format": FORMAT_NAME,
        "format_version": FORMAT_VERSION,
        "metadata": project.metadata,
    }
    if library_ref is not None:
        doc["library_ref"] = library_ref
    else:
        doc["library"] = _library_to_dict(project.library)
    doc["netlist"] = netlist_to_dict(project.netlist)
    doc["analysis_results"] = {
        name: project.analysis_results[name] for name in sorted(project.analysis_results)
    }
    return doc


def save_project(project, destination, *, library_path=None) -> None:
    """Write the project as JSON to a path or text file object.

    With ``library_path``, the library is referenced by that liberty file's
    path and SHA-256 instead of being embedded; the path is stored relative
    to the project file when possible.
    """
    library_ref = None
    if library_path is not None:
        with open(library_path, "rb") as fh:
            digest = hashlib.sha256(fh.read()).hexdigest()
        stored = os.fspath(library_path)
        if isinstance(destination, (str, os.PathLike)):
            stored = os.path.relpath(library_path, os.path.dirname(os.path.abspath(destination)) or ".")
        library_ref = {"path": stored, "sha256": digest}
    doc = project_to_dict(project, library_ref=library_ref)
    text = json.dumps(doc, indent=2)
    if isinstance(destination, (str, os.PathLike)):
        with open(destination, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        destination.write(text + "\n")


def load_project(source) -> Project:
    """Read and validate a project; raises before returning anything partial."""
    if isinstance(source, (str, os.PathLike)):
        base_dir = os.path.dirname(os.path.abspath(source))
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    else:
        base_dir = "."
        text = source.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProjectFormatError(f"corrupted project file: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_NAME:
        raise ProjectFormatError("not a gatescope project file")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ProjectFormatError(
            f"unsupported format_version {version!r}; this build reads {FORMAT_VERSION}"
        )
    try:
        if "library_ref" in doc:
            ref = doc["library_ref"]
            path = ref["path"]
            if not os.path.isabs(path):
                path = os.path.join(base_dir, path)
            with open(path, "rb") as fh:
                raw = fh.read()
            digest = hashlib.sha256(raw).hexdigest()
            if digest != ref["sha256"]:
                raise ProjectFormatError(
                    f"library hash mismatch for {ref['path']!r}: "
                    f"expected {ref['sha256']}, found {digest}"
                )
            library = parse_liberty(raw.decode("utf-8"), os.path.basename(path))
        else:
            library = _library_from_dict(doc["library"])
        netlist = _netlist_from_dict(doc["netlist"], library)
        netlist.check_consistency()
        project = Project(
            netlist=netlist,
            analysis_results=dict(doc.get("analysis_results", {})),
            metadata=dict(doc.get("metadata", {})),
        )
    except ProjectFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ProjectFormatError(f"malformed project document: {exc!r}") from None
    return project


def dumps_project(project) -> str:
    buf = io.StringIO()
    save_project(project, buf)
    return buf.getvalue()


def projects_identical(a, b) -> bool:
    """Structural identity: ids, names, tree, groupings, results, metadata."""
    return project_to_dict(a) == project_to_dict(b)
