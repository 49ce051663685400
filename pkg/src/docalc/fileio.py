"""File formats: graphs, models, transition matrices, DCN specs,
candidate sets, cost models, discovery reports and trajectory CSV.

All emitters are deterministic (sorted keys, fixed float rendering) so
that identical inputs produce byte-identical outputs.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence, Union

import numpy as np

from .alcam import CostModel
from .dcn import DcnMechanism, DcnSpec, SliceCpt, SliceExo
from .errors import InvalidInputError
from .factors import Factor, TransitionMatrix
from .graphs import Admg, Var
from .scm import Cpt, Exogenous, Scm

__all__ = [
    "load_graph", "save_graph", "load_model", "load_matrix", "save_matrix",
    "load_dcn_spec", "load_candidates", "load_costs",
    "trajectory_csv", "canonical_json",
]

PathLike = Union[str, Path]


def _read(path: PathLike) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _vars_from(items: Sequence[Mapping[str, Any]]) -> tuple[Var, ...]:
    return tuple(Var(d["name"], int(d.get("domain", 2))) for d in items)


def graph_from_dict(d: Mapping[str, Any]) -> Admg:
    return Admg(
        _vars_from(d["vars"]),
        [tuple(e) for e in d.get("edges", [])],
        [tuple(c) for c in d.get("confounders", [])],
    )


def graph_to_dict(g: Admg) -> dict:
    return {
        "vars": [{"name": v.name, "domain": v.domain} for v in g.vars],
        "edges": sorted([a, b] for a, b in g.directed),
        "confounders": sorted(sorted(p) for p in g.bidirected),
    }


def load_graph(path: PathLike) -> Admg:
    return graph_from_dict(_read(path))


def save_graph(g: Admg, path: PathLike) -> None:
    Path(path).write_text(canonical_json(graph_to_dict(g)), encoding="utf-8")


def model_from_dict(d: Mapping[str, Any]) -> Scm:
    g = graph_from_dict(d)
    exo = []
    for e in d.get("exogenous", []):
        exo.append(Exogenous(
            Var(e["name"], len(e["prior"])),
            tuple(float(x) for x in e["prior"]),
            frozenset(e["feeds"]),
        ))
    cpts = {}
    for name, c in d["cpts"].items():
        parents = tuple(c.get("parents", []))
        exo_parents = tuple(c.get("exo_parents", []))
        shape = tuple(g.var(p).domain for p in parents)
        shape += tuple(len(e["prior"]) for en in exo_parents
                       for e in d.get("exogenous", []) if e["name"] == en)
        shape += (g.var(name).domain,)
        table = np.asarray(c["table"], dtype=float).reshape(shape)
        cpts[name] = Cpt(name, parents, exo_parents, table)
    return Scm(g, cpts, exo)


def load_model(path: PathLike) -> Scm:
    return model_from_dict(_read(path))


def model_to_dict(m: Scm) -> dict:
    out = graph_to_dict(m.graph)
    out["exogenous"] = [
        {"name": e.var.name, "prior": [float(x) for x in e.prior],
         "feeds": sorted(e.feeds)}
        for e in m.exogenous
    ]
    out["cpts"] = {
        name: {
            "parents": list(c.parents),
            "exo_parents": list(c.exo_parents),
            "table": [float(x) for x in np.ravel(np.asarray(c.table))],
        }
        for name, c in sorted(m.cpts.items())
    }
    return out


def matrix_from_dict(d: Mapping[str, Any]) -> TransitionMatrix:
    sv = _vars_from(d["state_vars"])
    entries = np.asarray(d["entries"], dtype=float)
    orientation = d.get("orientation", "row")
    if orientation == "row":
        return TransitionMatrix.from_rows(sv, entries)
    if orientation == "col":
        return TransitionMatrix(sv, entries)
    raise InvalidInputError(f"orientation must be 'row' or 'col', got {orientation!r}")


def load_matrix(path: PathLike) -> TransitionMatrix:
    return matrix_from_dict(_read(path))


def save_matrix(t: TransitionMatrix, path: PathLike, orientation: str = "col") -> None:
    entries = t.matrix if orientation == "col" else t.matrix.T
    obj = {
        "state_vars": [{"name": v.name, "domain": v.domain} for v in t.state_vars],
        "orientation": orientation,
        "entries": [[float(x) for x in row] for row in entries],
    }
    Path(path).write_text(canonical_json(obj), encoding="utf-8")


def dcn_spec_from_dict(d: Mapping[str, Any]) -> tuple[DcnSpec, Optional[dict]]:
    """Returns the spec plus the raw schedule block (if present)."""
    mech = None
    if "mechanism" in d:
        m = d["mechanism"]
        exos = tuple(
            SliceExo(e["name"], tuple(float(x) for x in e["prior"]),
                     e["earlier"], e["later"], int(e.get("lag", 0)))
            for e in m.get("exos", [])
        )
        cpts = []
        for name, c in m["cpts"].items():
            intra = tuple(c.get("intra_parents", []))
            cross = tuple((p, int(k)) for p, k in c.get("cross_parents", []))
            exo_p = tuple(c.get("exo_parents", []))
            cpts.append(SliceCpt(name, intra, cross, exo_p,
                                 np.asarray(c["table"], dtype=float)))
        mech = DcnMechanism(tuple(cpts), exos)
    spec = DcnSpec(
        _vars_from(d["slice_vars"]),
        tuple(tuple(e) for e in d.get("intra_edges", [])),
        tuple((a, b, int(k)) for a, b, k in d.get("cross_edges", [])),
        tuple(frozenset(c) for c in d.get("intra_confounders", [])),
        tuple((a, b, int(k)) for a, b, k in d.get("cross_confounders", [])),
        mech,
    )
    return spec, d.get("schedule")


def load_dcn_spec(path: PathLike) -> tuple[DcnSpec, Optional[dict]]:
    return dcn_spec_from_dict(_read(path))


def schedule_from_block(block: Optional[dict], base: Path):
    """Resolve a schedule block into a callable t -> TransitionMatrix.

    Block format: {"matrices": {name: matrix-dict-or-path}, "pattern":
    [name, ...]} (the pattern repeats; entry t is the transition from
    slice t to t+1) or {"matrices": {...}, "default": name}.
    """
    if block is None:
        return None
    mats = {}
    for name, m in block["matrices"].items():
        if isinstance(m, str):
            mats[name] = load_matrix(base / m)
        else:
            mats[name] = matrix_from_dict(m)
    if "pattern" in block:
        pattern = [mats[n] for n in block["pattern"]]
        return lambda t: pattern[t % len(pattern)]
    return mats[block["default"]]


def load_candidates(path: PathLike) -> list[Admg]:
    d = _read(path)
    base = Path(path).parent
    out = []
    for item in d["graphs"]:
        if isinstance(item, str):
            out.append(load_graph(base / item))
        else:
            out.append(graph_from_dict(item))
    return out


def load_costs(path: PathLike) -> CostModel:
    d = _read(path)
    return CostModel.per_variable(
        d.get("intervention", {}),
        d.get("observation", {}),
        float(d.get("default_intervention", 1.0)),
        float(d.get("default_observation", 1.0)),
    )


def trajectory_csv(
    series: Sequence[Factor],
    t0: int = 0,
    full_joint: bool = False,
) -> str:
    """CSV of per-slice marginals: time column, then P(var=k) per variable
    value k >= 1, optionally followed by the full joint cells."""
    if not series:
        return "t\n"
    names = series[0].names()
    header = ["t"]
    for v in series[0].scope:
        for k in range(1, v.domain):
            header.append(f"P({v.name}={k})")
    if full_joint:
        for idx in np.ndindex(*[v.domain for v in series[0].scope]):
            header.append("P(" + ",".join(f"{v.name}={i}" for v, i in zip(series[0].scope, idx)) + ")")
    lines = [",".join(header)]
    for t, f in enumerate(series):
        f = f.reorder(names)
        row = [str(t0 + t)]
        for i, v in enumerate(f.scope):
            axes = tuple(j for j in range(len(f.scope)) if j != i)
            marg = f.table.sum(axis=axes) if axes else f.table
            for k in range(1, v.domain):
                row.append(f"{marg[k]:.12g}")
        if full_joint:
            for x in np.ravel(f.table):
                row.append(f"{x:.12g}")
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"
