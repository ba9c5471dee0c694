"""Combinatorial diagrams of S1-oriented handlebody-links.

A diagram is stored as plain incidence data: semi-arcs with the two
complementary regions on their sides, crossings with four slots and a sign,
and trivalent vertices with three role-tagged legs.  Region data is explicit
in the file rather than inferred from an embedding; the parser cross-checks
it against the local patterns around every crossing and vertex, so a
transcription slip in a fixture is caught immediately.

Side convention: travelling along a semi-arc, ``region_source`` lies to the
right and ``region_target`` to the left (the normal obtained by rotating the
travel direction counterclockwise by a quarter turn points source-to-target).

Local patterns enforced at parse time, writing src/tgt for the two sides:

* positive crossing:  src(ui) = src(oo),  tgt(ui) = src(oi),
  tgt(oi) = tgt(uo),  src(uo) = tgt(oo);
* negative crossing:  src(ui) = tgt(oi),  src(oi) = src(uo),
  tgt(ui) = tgt(oo),  tgt(uo) = src(oo);
* vertex (either kind): src(a) = src(b), tgt(a) = src(c), tgt(c) = tgt(b).

The stored weight region is pinned to src(under_in) at positive crossings,
src(under_out) at negative ones, and src(b_leg) at vertices.
"""

import json
from dataclasses import dataclass, field

from .algebra import StructuralError

__all__ = [
    "SemiArc",
    "Crossing",
    "Vertex",
    "Diagram",
    "DiagramError",
    "SchemaError",
    "DanglingReference",
    "RegionInconsistency",
    "EulerCheckFailure",
    "parse_diagram",
    "diagram_from_dict",
    "diagram_to_dict",
    "serialize_diagram",
    "load_diagram",
    "mirror",
    "reverse",
    "diagram_stats",
]

VERTEX_KINDS = ("two_in_one_out", "one_in_two_out")


class DiagramError(StructuralError):
    pass


class SchemaError(DiagramError):
    """The JSON data does not have the documented shape."""


class DanglingReference(DiagramError):
    """A site references an unknown id, or a semi-arc end is unaccounted for."""


class RegionInconsistency(DiagramError):
    """Side data contradicts a local pattern or the pinned weight region."""


class EulerCheckFailure(DiagramError):
    """sites - semiarcs + regions != 2, so the data cannot be planar."""


@dataclass(frozen=True)
class SemiArc:
    id: str
    region_source: str
    region_target: str


@dataclass(frozen=True)
class Crossing:
    sign: int
    under_in: str
    under_out: str
    over_in: str
    over_out: str
    weight_region: str
    id: str = ""


@dataclass(frozen=True)
class Vertex:
    kind: str
    a_leg: str
    b_leg: str
    c_leg: str
    weight_region: str
    id: str = ""

    def in_legs(self):
        if self.kind == "two_in_one_out":
            return (self.a_leg, self.c_leg)
        return (self.b_leg,)

    def out_legs(self):
        if self.kind == "two_in_one_out":
            return (self.b_leg,)
        return (self.a_leg, self.c_leg)


@dataclass(frozen=True)
class Diagram:
    semiarcs: tuple
    crossings: tuple
    vertices: tuple
    regions: tuple
    closed_loops: frozenset
    name: str = ""
    arc_by_id: dict = field(default_factory=dict, compare=False, repr=False)

    def arc(self, arc_id):
        return self.arc_by_id[arc_id]

    def src(self, arc_id):
        return self.arc_by_id[arc_id].region_source

    def tgt(self, arc_id):
        return self.arc_by_id[arc_id].region_target

    def open_arcs(self):
        return [a for a in self.semiarcs if a.id not in self.closed_loops]


def _require(cond, exc, msg):
    if not cond:
        raise exc(msg)


def _str_field(entry, key, where):
    val = entry.get(key)
    _require(isinstance(val, str) and val, SchemaError,
             f"{where}: field {key!r} must be a non-empty string")
    return val


def diagram_from_dict(data):
    """Validate raw dict data and build a Diagram.

    Raises SchemaError, DanglingReference, RegionInconsistency or
    EulerCheckFailure, in that order of checking.
    """
    _require(isinstance(data, dict), SchemaError, "top level must be an object")
    for key in ("regions", "semiarcs", "crossings", "vertices"):
        _require(key in data, SchemaError, f"missing top-level key {key!r}")
    name = data.get("name", "")
    _require(isinstance(name, str), SchemaError, "name must be a string")

    regions = data["regions"]
    _require(isinstance(regions, list) and regions, SchemaError,
             "regions must be a non-empty list")
    _require(all(isinstance(r, str) and r for r in regions), SchemaError,
             "region ids must be non-empty strings")
    _require(len(set(regions)) == len(regions), SchemaError,
             "duplicate region id")
    region_set = set(regions)

    raw_arcs = data["semiarcs"]
    _require(isinstance(raw_arcs, list) and raw_arcs, SchemaError,
             "semiarcs must be a non-empty list")
    arcs = []
    for entry in raw_arcs:
        _require(isinstance(entry, dict), SchemaError, "semiarc must be an object")
        aid = _str_field(entry, "id", "semiarc")
        src = _str_field(entry, "region_source", f"semiarc {aid}")
        tgt = _str_field(entry, "region_target", f"semiarc {aid}")
        arcs.append(SemiArc(aid, src, tgt))
    ids = [a.id for a in arcs]
    _require(len(set(ids)) == len(ids), SchemaError, "duplicate semi-arc id")
    arc_by_id = {a.id: a for a in arcs}

    closed = data.get("closed", [])
    _require(isinstance(closed, list), SchemaError, "closed must be a list")
    for aid in closed:
        _require(isinstance(aid, str), SchemaError, "closed ids must be strings")
        _require(aid in arc_by_id, DanglingReference,
                 f"closed loop {aid!r} is not a listed semi-arc")
    closed = frozenset(closed)

    crossings = []
    for k, entry in enumerate(data["crossings"]):
        _require(isinstance(entry, dict), SchemaError, "crossing must be an object")
        cid = entry.get("id", f"crossing[{k}]")
        sign = entry.get("sign")
        _require(sign in (1, -1), SchemaError,
                 f"{cid}: sign must be 1 or -1, got {sign!r}")
        slots = {key: _str_field(entry, key, cid)
                 for key in ("under_in", "under_out", "over_in", "over_out")}
        wr = _str_field(entry, "weight_region", cid)
        crossings.append(Crossing(sign=sign, weight_region=wr, id=cid, **slots))

    vertices = []
    for k, entry in enumerate(data["vertices"]):
        _require(isinstance(entry, dict), SchemaError, "vertex must be an object")
        vid = entry.get("id", f"vertex[{k}]")
        kind = entry.get("kind")
        _require(kind in VERTEX_KINDS, SchemaError,
                 f"{vid}: kind must be one of {VERTEX_KINDS}, got {kind!r}")
        legs = {key: _str_field(entry, key, vid)
                for key in ("a_leg", "b_leg", "c_leg")}
        wr = _str_field(entry, "weight_region", vid)
        vertices.append(Vertex(kind=kind, weight_region=wr, id=vid, **legs))

    diagram = Diagram(
        semiarcs=tuple(arcs),
        crossings=tuple(crossings),
        vertices=tuple(vertices),
        regions=tuple(regions),
        closed_loops=closed,
        name=name,
        arc_by_id=arc_by_id,
    )
    _check_references(diagram, region_set)
    _check_endpoints(diagram)
    _check_regions(diagram, region_set)
    _check_euler(diagram)
    return diagram


def _check_references(diagram, region_set):
    arc_by_id = diagram.arc_by_id
    for arc in diagram.semiarcs:
        for reg in (arc.region_source, arc.region_target):
            _require(reg in region_set, DanglingReference,
                     f"semi-arc {arc.id}: unknown region {reg!r}")
    for c in diagram.crossings:
        for key in ("under_in", "under_out", "over_in", "over_out"):
            aid = getattr(c, key)
            _require(aid in arc_by_id, DanglingReference,
                     f"{c.id}: {key} references unknown semi-arc {aid!r}")
        _require(c.weight_region in region_set, DanglingReference,
                 f"{c.id}: unknown weight region {c.weight_region!r}")
    for v in diagram.vertices:
        for key in ("a_leg", "b_leg", "c_leg"):
            aid = getattr(v, key)
            _require(aid in arc_by_id, DanglingReference,
                     f"{v.id}: {key} references unknown semi-arc {aid!r}")
        _require(v.weight_region in region_set, DanglingReference,
                 f"{v.id}: unknown weight region {v.weight_region!r}")


def _check_endpoints(diagram):
    """Every open semi-arc leaves exactly one site and enters exactly one."""
    heads = {}
    tails = {}

    def take(store, aid, where):
        if aid in store:
            raise DanglingReference(
                f"semi-arc {aid} is claimed by both {store[aid]} and {where}")
        store[aid] = where

    for c in diagram.crossings:
        take(heads, c.under_in, f"{c.id}.under_in")
        take(heads, c.over_in, f"{c.id}.over_in")
        take(tails, c.under_out, f"{c.id}.under_out")
        take(tails, c.over_out, f"{c.id}.over_out")
    for v in diagram.vertices:
        for aid in v.in_legs():
            take(heads, aid, f"{v.id}(in)")
        for aid in v.out_legs():
            take(tails, aid, f"{v.id}(out)")

    for arc in diagram.semiarcs:
        if arc.id in diagram.closed_loops:
            _require(arc.id not in heads and arc.id not in tails,
                     DanglingReference,
                     f"closed loop {arc.id} is attached to a site")
        else:
            _require(arc.id in heads, DanglingReference,
                     f"semi-arc {arc.id} has no end endpoint")
            _require(arc.id in tails, DanglingReference,
                     f"semi-arc {arc.id} has no start endpoint")


def _check_regions(diagram, region_set):
    src, tgt = diagram.src, diagram.tgt
    if len(region_set) > 1:
        for arc in diagram.semiarcs:
            _require(arc.region_source != arc.region_target,
                     RegionInconsistency,
                     f"semi-arc {arc.id} has the same region on both sides")

    def match(site, label, left, right):
        _require(left == right, RegionInconsistency,
                 f"{site}: {label} sides disagree ({left!r} != {right!r})")

    for c in diagram.crossings:
        ui, uo, oi, oo = c.under_in, c.under_out, c.over_in, c.over_out
        if c.sign == 1:
            match(c.id, "under_in/over_out", src(ui), src(oo))
            match(c.id, "under_in/over_in", tgt(ui), src(oi))
            match(c.id, "over_in/under_out", tgt(oi), tgt(uo))
            match(c.id, "under_out/over_out", src(uo), tgt(oo))
            pinned = src(ui)
        else:
            match(c.id, "under_in/over_in", src(ui), tgt(oi))
            match(c.id, "over_in/under_out", src(oi), src(uo))
            match(c.id, "under_in/over_out", tgt(ui), tgt(oo))
            match(c.id, "under_out/over_out", tgt(uo), src(oo))
            pinned = src(uo)
        _require(c.weight_region == pinned, RegionInconsistency,
                 f"{c.id}: weight region {c.weight_region!r} is not the "
                 f"pinned region {pinned!r}")

    for v in diagram.vertices:
        match(v.id, "a_leg/b_leg", src(v.a_leg), src(v.b_leg))
        match(v.id, "a_leg/c_leg", tgt(v.a_leg), src(v.c_leg))
        match(v.id, "c_leg/b_leg", tgt(v.c_leg), tgt(v.b_leg))
        _require(v.weight_region == src(v.b_leg), RegionInconsistency,
                 f"{v.id}: weight region {v.weight_region!r} is not the "
                 f"pinned region {src(v.b_leg)!r}")


def _check_euler(diagram):
    # Each closed loop counts as a one-gon: one extra vertex on one edge.
    sites = (len(diagram.crossings) + len(diagram.vertices)
             + len(diagram.closed_loops))
    euler = sites - len(diagram.semiarcs) + len(diagram.regions)
    _require(euler == 2, EulerCheckFailure,
             f"Euler check failed: {sites} sites - {len(diagram.semiarcs)} "
             f"semi-arcs + {len(diagram.regions)} regions = {euler}, want 2")


def parse_diagram(text):
    """Parse and validate a UTF-8 JSON diagram."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from exc
    return diagram_from_dict(data)


def load_diagram(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_diagram(fh.read())


def diagram_to_dict(diagram):
    out = {
        "regions": list(diagram.regions),
        "semiarcs": [
            {"id": a.id, "region_source": a.region_source,
             "region_target": a.region_target}
            for a in diagram.semiarcs
        ],
        "crossings": [
            {"id": c.id, "sign": c.sign, "under_in": c.under_in,
             "under_out": c.under_out, "over_in": c.over_in,
             "over_out": c.over_out, "weight_region": c.weight_region}
            for c in diagram.crossings
        ],
        "vertices": [
            {"id": v.id, "kind": v.kind, "a_leg": v.a_leg, "b_leg": v.b_leg,
             "c_leg": v.c_leg, "weight_region": v.weight_region}
            for v in diagram.vertices
        ],
        "closed": sorted(diagram.closed_loops),
    }
    if diagram.name:
        out["name"] = diagram.name
    return out


def serialize_diagram(diagram):
    return json.dumps(diagram_to_dict(diagram), indent=2) + "\n"


def mirror(diagram):
    """The diagram of the mirrored link with its circle orientation reversed.

    Combinatorially: every semi-arc swaps sides, every crossing flips sign
    with slots remapped (under_in <-> over_out, under_out <-> over_in), and
    every vertex flips kind with the a/c roles exchanged.  Weight regions are
    re-pinned.  Applying mirror twice returns the original diagram.
    """
    arcs = tuple(SemiArc(a.id, a.region_target, a.region_source)
                 for a in diagram.semiarcs)
    sides = {a.id: a for a in arcs}

    crossings = []
    for c in diagram.crossings:
        ui, uo = c.over_out, c.over_in
        oi, oo = c.under_out, c.under_in
        sign = -c.sign
        pinned = sides[ui].region_source if sign == 1 else sides[uo].region_source
        crossings.append(Crossing(sign=sign, under_in=ui, under_out=uo,
                                  over_in=oi, over_out=oo,
                                  weight_region=pinned, id=c.id))

    vertices = []
    for v in diagram.vertices:
        kind = VERTEX_KINDS[1 - VERTEX_KINDS.index(v.kind)]
        vertices.append(Vertex(kind=kind, a_leg=v.c_leg, b_leg=v.b_leg,
                               c_leg=v.a_leg,
                               weight_region=sides[v.b_leg].region_source,
                               id=v.id))

    out = Diagram(
        semiarcs=arcs,
        crossings=tuple(crossings),
        vertices=tuple(vertices),
        regions=diagram.regions,
        closed_loops=diagram.closed_loops,
        name=diagram.name,
        arc_by_id=dict(sides),
    )
    _check_endpoints(out)
    _check_regions(out, set(out.regions))
    return out


def reverse(diagram):
    """Reverse the circle orientation of every component.

    Semi-arcs swap sides, crossings swap in/out within each strand keeping
    their sign, vertices flip kind with a/c exchanged.
    """
    arcs = tuple(SemiArc(a.id, a.region_target, a.region_source)
                 for a in diagram.semiarcs)
    sides = {a.id: a for a in arcs}

    crossings = []
    for c in diagram.crossings:
        ui, uo = c.under_out, c.under_in
        oi, oo = c.over_out, c.over_in
        pinned = (sides[ui].region_source if c.sign == 1
                  else sides[uo].region_source)
        crossings.append(Crossing(sign=c.sign, under_in=ui, under_out=uo,
                                  over_in=oi, over_out=oo,
                                  weight_region=pinned, id=c.id))

    vertices = []
    for v in diagram.vertices:
        kind = VERTEX_KINDS[1 - VERTEX_KINDS.index(v.kind)]
        vertices.append(Vertex(kind=kind, a_leg=v.c_leg, b_leg=v.b_leg,
                               c_leg=v.a_leg,
                               weight_region=sides[v.b_leg].region_source,
                               id=v.id))

    out = Diagram(
        semiarcs=arcs,
        crossings=tuple(crossings),
        vertices=tuple(vertices),
        regions=diagram.regions,
        closed_loops=diagram.closed_loops,
        name=diagram.name,
        arc_by_id=dict(sides),
    )
    _check_endpoints(out)
    _check_regions(out, set(out.regions))
    return out


def diagram_stats(diagram):
    pos = sum(1 for c in diagram.crossings if c.sign == 1)
    neg = len(diagram.crossings) - pos
    kinds = {kind: 0 for kind in VERTEX_KINDS}
    for v in diagram.vertices:
        kinds[v.kind] += 1
    return {
        "semiarcs": len(diagram.semiarcs),
        "closed_loops": len(diagram.closed_loops),
        "crossings": len(diagram.crossings),
        "crossings_positive": pos,
        "crossings_negative": neg,
        "vertices": len(diagram.vertices),
        "vertices_two_in_one_out": kinds["two_in_one_out"],
        "vertices_one_in_two_out": kinds["one_in_two_out"],
        "regions": len(diagram.regions),
    }
