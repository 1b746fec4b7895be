"""Net files: a JSON document with 17-significant-digit coordinates.

::

    {"dimension": 2,
     "center": [0, 0],
     "vertices": [{"id": "o", "pos": [0, 0], "leaf": false}, ...],
     "edges": [["o", "e"], ...],
     "meta": {...}}

Coordinates are written with ``%.17g`` so reading a written file restores
every position bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .net import Net, NetError, build_net


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _vec(v) -> str:
    return "[" + ", ".join(fmt(t) for t in v) + "]"


def dumps(net: Net) -> str:
    lines = ["{", f'  "dimension": {net.dimension},', f'  "center": {_vec(net.center)},',
             '  "vertices": [']
    vs = [
        f'    {{"id": {json.dumps(vid)}, "pos": {_vec(net.positions[i])}, '
        f'"leaf": {"true" if net.leaf[i] else "false"}}}'
        for i, vid in enumerate(net.ids)
    ]
    lines.append(",\n".join(vs))
    lines.append("  ],")
    lines.append('  "edges": [')
    es = [f"    [{json.dumps(net.ids[i])}, {json.dumps(net.ids[j])}]" for i, j in net.edges]
    lines.append(",\n".join(es))
    lines.append("  ],")
    lines.append(f'  "meta": {json.dumps(_plain(net.meta), sort_keys=True)}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _plain(x: Any) -> Any:
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if hasattr(x, "tolist"):
        return x.tolist()
    return x


def loads(text: str) -> Net:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise NetError(f"net file is not valid JSON: {err}") from None
    try:
        k = int(doc["dimension"])
        verts = [
            {"id": v["id"], "pos": [float(t) for t in v["pos"]], "leaf": v.get("leaf")}
            for v in doc["vertices"]
        ]
        edges = [tuple(e) for e in doc["edges"]]
    except (KeyError, TypeError, ValueError) as err:
        raise NetError(f"malformed net file: {err!r}") from None
    return build_net(k, verts, edges, center=doc.get("center"), meta=doc.get("meta") or {})


def read_net(path: str | Path) -> Net:
    return loads(Path(path).read_text())


def write_net(net: Net, path: str | Path) -> None:
    Path(path).write_text(dumps(net))
