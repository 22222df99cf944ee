"""On-disk formats: graph JSON, workload JSON, and the GraphML subset.

GraphML output is deterministic for a fixed input: elements are emitted
sorted by id and property keys sorted by name, so golden-file tests are
byte-stable. View files additionally store the view pattern and traversal
order as graph-level data under the reserved keys ``vp.pattern`` and
``vp.order``.
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from pathlib import Path
from typing import TYPE_CHECKING, Any, Union

from .model import (
    Atom,
    Edge,
    GraphError,
    PatternEdge,
    PatternNode,
    PatternQuery,
    Predicate,
    PropertyGraph,
    PropertyValue,
    Vertex,
    value_kind,
)

if TYPE_CHECKING:  # pragma: no cover
    from .views import ExtendedGraphView

PathLike = Union[str, Path]


class FormatError(GraphError):
    """Raised when a file does not conform to one of the declared formats."""


# ---------------------------------------------------------------------------
# Graph JSON


def _check_scalar(value: Any, where: str) -> PropertyValue:
    if not isinstance(value, (str, int, float, bool)):
        raise FormatError(f"{where}: property values must be scalars, got {value!r}")
    return value


def graph_to_json(graph: PropertyGraph) -> dict:
    return {
        "vertices": [
            {"id": v.id, "label": v.label, "props": dict(v.props)}
            for v in (graph.vertices[k] for k in sorted(graph.vertices))
        ],
        "edges": [
            {
                "id": e.id,
                "src": e.src,
                "dst": e.dst,
                "label": e.label,
                "props": dict(e.props),
            }
            for e in (graph.edges[k] for k in sorted(graph.edges))
        ],
    }


def graph_from_json(doc: Any) -> PropertyGraph:
    if not isinstance(doc, dict):
        raise FormatError("graph document must be a JSON object")
    vertices = []
    for i, vd in enumerate(doc.get("vertices", [])):
        try:
            props = {
                k: _check_scalar(v, f"vertex[{i}].props.{k}")
                for k, v in vd.get("props", {}).items()
            }
            vertices.append(Vertex(id=str(vd["id"]), label=str(vd["label"]), props=props))
        except KeyError as exc:
            raise FormatError(f"vertex[{i}] missing field {exc}") from exc
    edges = []
    for i, ed in enumerate(doc.get("edges", [])):
        try:
            props = {
                k: _check_scalar(v, f"edge[{i}].props.{k}")
                for k, v in ed.get("props", {}).items()
            }
            edges.append(
                Edge(
                    id=str(ed["id"]),
                    src=str(ed["src"]),
                    dst=str(ed["dst"]),
                    label=str(ed["label"]),
                    props=props,
                )
            )
        except KeyError as exc:
            raise FormatError(f"edge[{i}] missing field {exc}") from exc
    return PropertyGraph(vertices, edges)


def load_graph(path: PathLike, format: str = "json") -> PropertyGraph:
    """Load a property graph from JSON or the GraphML subset."""
    path = Path(path)
    if format == "json":
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
        return graph_from_json(doc)
    if format == "graphml":
        graph, _meta = _read_graphml(path)
        return graph
    raise FormatError(f"unknown graph format {format!r}")


def save_graph(graph: PropertyGraph, path: PathLike, format: str = "json") -> None:
    path = Path(path)
    if format == "json":
        path.write_text(json.dumps(graph_to_json(graph), indent=2) + "\n")
    elif format == "graphml":
        path.write_bytes(graphml_bytes(graph))
    else:
        raise FormatError(f"unknown graph format {format!r}")


# ---------------------------------------------------------------------------
# Workload JSON


_OPS = {"=", "!=", "<", "<=", ">", ">="}


def _parse_predicate(raw: Any, where: str) -> Predicate:
    if raw in (None, []):
        return Predicate()
    if not isinstance(raw, list):
        raise FormatError(f"{where}: predicate must be a list of atoms")
    atoms = []
    for i, atom in enumerate(raw):
        if not isinstance(atom, dict) or not {"key", "op", "value"} <= set(atom):
            raise FormatError(f"{where}: atom[{i}] must have key/op/value")
        if atom["op"] not in _OPS:
            raise FormatError(f"{where}: atom[{i}] has unknown comparator {atom['op']!r}")
        value = _check_scalar(atom["value"], f"{where}: atom[{i}]")
        atoms.append(Atom(key=str(atom["key"]), op=atom["op"], value=value))
    return Predicate(tuple(atoms))


def parse_pattern_query(document: dict) -> PatternQuery:
    """Parse one workload entry into a PatternQuery.

    Node and edge order is preserved as written. Raises FormatError on
    unknown aliases, empty patterns, or malformed predicate atoms.
    """
    name = str(document.get("name", ""))
    where = f"query {name or '?'}"
    nodes = []
    for nd in document.get("nodes", []):
        if "alias" not in nd or "label" not in nd:
            raise FormatError(f"{where}: node missing alias/label")
        nodes.append(
            PatternNode(
                alias=str(nd["alias"]),
                label=str(nd["label"]),
                predicate=_parse_predicate(nd.get("pred"), where),
            )
        )
    declared = {n.alias for n in nodes}
    edges = []
    for ed in document.get("edges", []):
        if "from" not in ed or "to" not in ed or "label" not in ed:
            raise FormatError(f"{where}: edge missing from/to/label")
        for end in (ed["from"], ed["to"]):
            if end not in declared:
                raise FormatError(f"{where}: edge references unknown alias {end!r}")
        edges.append(
            PatternEdge(
                src=str(ed["from"]),
                dst=str(ed["to"]),
                label=str(ed["label"]),
                predicate=_parse_predicate(ed.get("pred"), where),
            )
        )
    if not edges:
        raise FormatError(f"{where}: pattern has no edges")
    weight = document.get("weight", 1.0)
    if not isinstance(weight, (int, float)) or isinstance(weight, bool):
        raise FormatError(f"{where}: weight must be a number")
    try:
        return PatternQuery(nodes, edges, weight=float(weight), name=name)
    except GraphError as exc:
        raise FormatError(f"{where}: {exc}") from exc


def load_workload(path: PathLike) -> list[PatternQuery]:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(doc, dict) or "queries" not in doc:
        raise FormatError(f"{path}: workload must be an object with a 'queries' list")
    return [parse_pattern_query(q) for q in doc["queries"]]


def pattern_to_json(pattern: PatternQuery) -> dict:
    """Inverse of parse_pattern_query (workload-JSON encoding of one pattern)."""

    def pred(p: Predicate) -> list:
        return [{"key": a.key, "op": a.op, "value": a.value} for a in p.atoms]

    return {
        "name": pattern.name,
        "weight": pattern.weight,
        "nodes": [
            {"alias": n.alias, "label": n.label, "pred": pred(n.predicate)}
            for n in (pattern.nodes[a] for a in sorted(pattern.nodes))
        ],
        "edges": [
            {"from": e.src, "to": e.dst, "label": e.label, "pred": pred(e.predicate)}
            for e in pattern.edges
        ],
    }


# ---------------------------------------------------------------------------
# GraphML subset

_GRAPHML_TYPES = {"string": str, "int": int, "double": float, "boolean": bool}
_KIND_TO_GRAPHML = {"string": "string", "int": "int", "float": "double", "bool": "boolean"}


def _encode_value(value: PropertyValue) -> str:
    kind = value_kind(value)
    if kind == "bool":
        return "true" if value else "false"
    if kind == "float":
        return repr(value)
    return str(value)


def _decode_value(text: str, attr_type: str) -> PropertyValue:
    if attr_type == "boolean":
        if text not in ("true", "false"):
            raise FormatError(f"invalid boolean value {text!r}")
        return text == "true"
    if attr_type == "int":
        return int(text)
    if attr_type == "double":
        return float(text)
    return text


def _build_graphml_tree(
    graph: PropertyGraph, graph_id: str, graph_data: dict[str, str]
) -> ET.Element:
    root = ET.Element("graphml")
    # one key per (domain, property name, type); ids enumerated deterministically
    keyspecs: list[tuple[str, str, str]] = []
    seen = set()

    def collect(domain: str, props) -> None:
        for k in props:
            kind = _KIND_TO_GRAPHML[value_kind(props[k])]
            spec = (domain, k, kind)
            if spec not in seen:
                seen.add(spec)
                keyspecs.append(spec)

    for vid in sorted(graph.vertices):
        collect("node", graph.vertices[vid].props)
    for eid in sorted(graph.edges):
        collect("edge", graph.edges[eid].props)
    keyspecs.sort()

    key_ids: dict[tuple[str, str, str], str] = {}
    for name in sorted(graph_data):
        el = ET.SubElement(root, "key")
        el.set("id", name)
        el.set("for", "graph")
        el.set("attr.name", name)
        el.set("attr.type", "string")
    for domain, label_key in (("node", "labelV"), ("edge", "labelE")):
        el = ET.SubElement(root, "key")
        el.set("id", label_key)
        el.set("for", domain)
        el.set("attr.name", label_key)
        el.set("attr.type", "string")
    for i, (domain, name, kind) in enumerate(keyspecs):
        kid = f"d{i}"
        key_ids[(domain, name, kind)] = kid
        el = ET.SubElement(root, "key")
        el.set("id", kid)
        el.set("for", domain)
        el.set("attr.name", name)
        el.set("attr.type", kind)

    gel = ET.SubElement(root, "graph")
    gel.set("id", graph_id)
    gel.set("edgedefault", "directed")
    for name in sorted(graph_data):
        d = ET.SubElement(gel, "data")
        d.set("key", name)
        d.text = graph_data[name]

    def emit_props(parent: ET.Element, domain: str, props) -> None:
        for k in sorted(props):
            kind = _KIND_TO_GRAPHML[value_kind(props[k])]
            d = ET.SubElement(parent, "data")
            d.set("key", key_ids[(domain, k, kind)])
            d.text = _encode_value(props[k])

    for vid in sorted(graph.vertices):
        v = graph.vertices[vid]
        nel = ET.SubElement(gel, "node")
        nel.set("id", v.id)
        lab = ET.SubElement(nel, "data")
        lab.set("key", "labelV")
        lab.text = v.label
        emit_props(nel, "node", v.props)
    for eid in sorted(graph.edges):
        e = graph.edges[eid]
        eel = ET.SubElement(gel, "edge")
        eel.set("id", e.id)
        eel.set("source", e.src)
        eel.set("target", e.dst)
        lab = ET.SubElement(eel, "data")
        lab.set("key", "labelE")
        lab.text = e.label
        emit_props(eel, "edge", e.props)
    return root


def _serialize(root: ET.Element) -> bytes:
    ET.indent(root)
    return ET.tostring(root, encoding="utf-8", xml_declaration=True) + b"\n"


def graphml_bytes(graph: PropertyGraph, graph_id: str = "G") -> bytes:
    return _serialize(_build_graphml_tree(graph, graph_id, {}))


def view_graphml_bytes(view: "ExtendedGraphView") -> bytes:
    """Serialize a view: its content graph plus pattern/order metadata."""
    graph_data = {
        "vp.pattern": json.dumps(pattern_to_json(view.vp.pattern), sort_keys=True),
        "vp.order": ",".join(str(i) for i in view.vp.order),
    }
    return _serialize(_build_graphml_tree(view.content, view.id, graph_data))


def save_view_graphml(view: "ExtendedGraphView", path: PathLike) -> None:
    Path(path).write_bytes(view_graphml_bytes(view))


def _read_graphml(path: Path) -> tuple[PropertyGraph, dict]:
    try:
        tree = ET.parse(path)
    except ET.ParseError as exc:
        raise FormatError(f"{path}: invalid XML: {exc}") from exc
    root = tree.getroot()
    if root.tag != "graphml":
        raise FormatError(f"{path}: root element is {root.tag!r}, expected 'graphml'")
    keys: dict[str, tuple[str, str]] = {}
    for kel in root.findall("key"):
        keys[kel.get("id", "")] = (kel.get("attr.name", ""), kel.get("attr.type", "string"))
    gel = root.find("graph")
    if gel is None:
        raise FormatError(f"{path}: no <graph> element")
    meta = {"id": gel.get("id", "G")}

    def read_data(el: ET.Element) -> tuple[str, dict[str, PropertyValue]]:
        label = ""
        props: dict[str, PropertyValue] = {}
        for d in el.findall("data"):
            kid = d.get("key", "")
            name, attr_type = keys.get(kid, (kid, "string"))
            text = d.text or ""
            if name in ("labelV", "labelE"):
                label = text
            else:
                props[name] = _decode_value(text, attr_type)
        return label, props

    for d in gel.findall("data"):
        kid = d.get("key", "")
        name, _t = keys.get(kid, (kid, "string"))
        meta[name] = d.text or ""

    vertices = []
    for nel in gel.findall("node"):
        nid = nel.get("id")
        if nid is None:
            raise FormatError(f"{path}: node without id")
        label, props = read_data(nel)
        vertices.append(Vertex(id=nid, label=label, props=props))
    edges = []
    for eel in gel.findall("edge"):
        eid, src, dst = eel.get("id"), eel.get("source"), eel.get("target")
        if eid is None or src is None or dst is None:
            raise FormatError(f"{path}: edge missing id/source/target")
        label, props = read_data(eel)
        edges.append(Edge(id=eid, src=src, dst=dst, label=label, props=props))
    return PropertyGraph(vertices, edges), meta


def load_view_graphml(path: PathLike) -> "ExtendedGraphView":
    """Load a view file written by save_view_graphml."""
    from .views import ExtendedGraphView, ViewPattern, whole_pattern_genes

    path = Path(path)
    graph, meta = _read_graphml(path)
    if "vp.pattern" not in meta or "vp.order" not in meta:
        raise FormatError(f"{path}: missing view metadata (vp.pattern / vp.order)")
    pattern = parse_pattern_query(json.loads(meta["vp.pattern"]))
    order = tuple(int(tok) for tok in meta["vp.order"].split(",") if tok != "")
    vp = ViewPattern(pattern, order)
    return ExtendedGraphView(
        id=meta["id"],
        vp=vp,
        content=graph,
        genes=whole_pattern_genes(vp),
        size_bytes=path.stat().st_size,
    )
