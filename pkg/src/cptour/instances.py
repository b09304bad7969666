"""Benchmark instance families, the instance file format and solution records."""
from __future__ import annotations

import json
import math
import re
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .errors import GenerationError, InputError, ParseError
from .geometry import Point
from .sdgraph import SelfDeletingGraph

FAMILIES = ("hex", "hex_noisy", "mesh", "square")
MAX_REJECTIONS = 1_000_000
HEADER_KEYS = ("NAME", "TYPE", "DIMENSION", "EDGE_WEIGHT_TYPE")
TYPES = ("TSPSD", "TSPCP")


@dataclass
class InstanceSpec:
    family: str
    n: int
    spacing: float = 50.0
    noise: float | None = None
    seed: int = 0
    name: str | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InputError(f"unknown family {self.family!r}; expected one of {', '.join(FAMILIES)}")
        if self.n < 3:
            raise InputError("instances need at least three nodes")
        if not self.spacing > 0:
            raise InputError("spacing must be positive")
        if self.noise is None:
            self.noise = 0.3 * self.spacing
        if self.noise < 0:
            raise InputError("noise must be non-negative")
        if self.name is None:
            self.name = f"{self.family}-{self.n}-s{self.seed}"


def _hex_points(n: int, spacing: float) -> np.ndarray:
    k = int(math.ceil(math.sqrt(n))) + 2
    i, j = np.meshgrid(np.arange(-k, k + 1), np.arange(-k, k + 1), indexing="ij")
    x = (i + 0.5 * j).ravel() * spacing
    y = (j * math.sqrt(3) / 2).ravel() * spacing
    r = np.round(np.hypot(x, y) / spacing, 9)
    ang = np.round(np.mod(np.arctan2(y, x), 2 * np.pi), 9)
    keep = np.lexsort((ang, r))[:n]
    return np.stack([x[keep], y[keep]], axis=1)


def generate(spec: InstanceSpec) -> list[Point]:
    """Node coordinates of one benchmark family member; deterministic in the seed."""
    n, s = spec.n, spec.spacing
    rng = np.random.default_rng(spec.seed)
    if spec.family == "square":
        k = int(math.ceil(math.sqrt(n)))
        idx = np.arange(n)
        pts = np.stack([idx % k, idx // k], axis=1) * s
    elif spec.family == "hex":
        pts = _hex_points(n, s)
    elif spec.family == "hex_noisy":
        pts = _hex_points(n, s)
        rad = spec.noise * np.sqrt(rng.random(n))
        ang = 2 * np.pi * rng.random(n)
        pts = pts + np.stack([rad * np.cos(ang), rad * np.sin(ang)], axis=1)
    else:
        pts = _mesh_points(n, s, rng)
    return [Point(float(x) + 0.0, float(y) + 0.0) for x, y in pts]


def _mesh_points(n: int, spacing: float, rng: np.random.Generator) -> np.ndarray:
    side = 1.6 * spacing * math.sqrt(n)
    pts = np.empty((n, 2))
    count = 0
    rejections = 0
    while count < n:
        p = rng.random(2) * side
        if count and np.hypot(*(pts[:count] - p).T).min() < spacing:
            rejections += 1
            if rejections > MAX_REJECTIONS:
                raise GenerationError(f"mesh sampling gave up after {MAX_REJECTIONS} rejections")
            continue
        pts[count] = p
        count += 1
    return pts


def random_tspsd(n: int, density: float, seed: int = 0, side: float = 1000.0) -> SelfDeletingGraph:
    """Uniform points; each node deletes a Poisson(density) number of random directed edges."""
    if n < 3:
        raise InputError("instances need at least three nodes")
    if density < 0:
        raise InputError("delete density must be non-negative")
    rng = np.random.default_rng(seed)
    pts = rng.random((n, 2)) * side
    delete_sets = []
    for _ in range(n):
        count = min(int(rng.poisson(density)), n * (n - 1))
        picks = rng.choice(n * (n - 1), size=count, replace=False)
        edges = []
        for e in sorted(int(e) for e in picks):
            a, b = divmod(e, n - 1)
            edges.append((a, b + (b >= a)))
        delete_sets.append(edges)
    return SelfDeletingGraph.euclidean(pts.tolist(), delete_sets)


# --------------------------------------------------------------------------
# instance files
# --------------------------------------------------------------------------

@dataclass
class Instance:
    name: str
    type: str
    points: list[Point]
    delete_sets: list[list[tuple[int, int]]] | None = None

    @property
    def n(self) -> int:
        return len(self.points)

    def graph(self) -> SelfDeletingGraph:
        return SelfDeletingGraph.euclidean(self.points, self.delete_sets)

    @classmethod
    def from_graph(cls, name: str, graph: SelfDeletingGraph) -> "Instance":
        if graph.coords is None:
            raise InputError("only coordinate instances can be written")
        return cls(name, "TSPSD", list(graph.coords), [graph.delete_edges(v) for v in range(graph.n)])


_PAIR = re.compile(r"\(\s*(\S+)\s+(\S+)\s*\)")


def _int(tok: str, line: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"{what} must be an integer, got {tok!r}", line) from None


def _real(tok: str, line: int) -> float:
    try:
        x = float(tok)
    except ValueError:
        raise ParseError(f"bad coordinate {tok!r}", line) from None
    if not math.isfinite(x):
        raise ParseError(f"coordinate must be finite, got {tok!r}", line)
    return x


def parse_instance(text: str) -> Instance:
    header: dict[str, str] = {}
    coords: dict[int, Point] = {}
    deletes: dict[int, list[tuple[int, int]]] = {}
    section = None
    seen_eof = False
    n = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if seen_eof:
            raise ParseError("content after EOF", lineno)
        if line == "EOF":
            seen_eof = True
            continue
        if line in ("NODE_COORD_SECTION", "DELETE_SECTION"):
            missing = [k for k in HEADER_KEYS if k not in header]
            if missing:
                raise ParseError(f"{line} before header keys {', '.join(missing)}", lineno)
            if line == "NODE_COORD_SECTION" and coords or line == "DELETE_SECTION" and section == line:
                raise ParseError(f"repeated {line}", lineno)
            if line == "DELETE_SECTION" and header["TYPE"] != "TSPSD":
                raise ParseError("DELETE_SECTION only allowed in TSPSD instances", lineno)
            section = line
            continue
        if section is None:
            key, sep, value = line.partition(":")
            key, value = key.strip(), value.strip()
            if not sep or key not in HEADER_KEYS:
                raise ParseError(f"unknown keyword {key!r}", lineno)
            if key in header:
                raise ParseError(f"duplicate keyword {key}", lineno)
            if not value:
                raise ParseError(f"{key} needs a value", lineno)
            if key == "TYPE" and value not in TYPES:
                raise ParseError(f"TYPE must be TSPSD or TSPCP, got {value!r}", lineno)
            if key == "EDGE_WEIGHT_TYPE" and value != "EUC_2D":
                raise ParseError(f"only EUC_2D is supported, got {value!r}", lineno)
            if key == "DIMENSION":
                n = _int(value, lineno, "DIMENSION")
                if n < 2:
                    raise ParseError("DIMENSION must be at least 2", lineno)
            if key == "NAME" and len(value.split()) != 1:
                raise ParseError("NAME must be a single token", lineno)
            header[key] = value
        elif section == "NODE_COORD_SECTION":
            toks = line.split()
            if len(toks) != 3:
                raise ParseError("expected '<id> <x> <y>'", lineno)
            vid = _int(toks[0], lineno, "node id")
            if not 1 <= vid <= n:
                raise ParseError(f"node id {vid} outside 1..{n}", lineno)
            if vid in coords:
                raise ParseError(f"duplicate node id {vid}", lineno)
            coords[vid] = Point(_real(toks[1], lineno), _real(toks[2], lineno))
        else:
            head, sep, rest = line.partition(":")
            if not sep:
                raise ParseError("expected '<id> : (<a> <b>) ...'", lineno)
            vid = _int(head.strip(), lineno, "node id")
            if not 1 <= vid <= n:
                raise ParseError(f"node id {vid} outside 1..{n}", lineno)
            if vid in deletes:
                raise ParseError(f"duplicate delete entry for node {vid}", lineno)
            if _PAIR.sub("", rest).strip():
                raise ParseError("delete entries must be '(<a> <b>)' pairs", lineno)
            pairs = []
            for a_tok, b_tok in _PAIR.findall(rest):
                a, b = _int(a_tok, lineno, "node id"), _int(b_tok, lineno, "node id")
                if not (1 <= a <= n and 1 <= b <= n) or a == b:
                    raise ParseError(f"({a} {b}) is not an edge", lineno)
                pairs.append((a - 1, b - 1))
            deletes[vid] = pairs
    if not seen_eof:
        raise ParseError("missing EOF")
    missing = [k for k in HEADER_KEYS if k not in header]
    if missing:
        raise ParseError(f"missing header keys {', '.join(missing)}")
    if len(coords) != n:
        raise ParseError(f"expected {n} coordinates, found {len(coords)}")
    points = [coords[i] for i in range(1, n + 1)]
    delete_sets = None
    if header["TYPE"] == "TSPSD":
        delete_sets = [deletes.get(v, []) for v in range(1, n + 1)]
    return Instance(header["NAME"], header["TYPE"], points, delete_sets)


def write_instance(inst: Instance) -> str:
    if len(inst.name.split()) != 1:
        raise InputError("instance name must be a single token")
    lines = [f"NAME: {inst.name}", f"TYPE: {inst.type}", f"DIMENSION: {inst.n}", "EDGE_WEIGHT_TYPE: EUC_2D",
             "NODE_COORD_SECTION"]
    lines += [f"{i} {p.x!r} {p.y!r}" for i, p in enumerate(inst.points, start=1)]
    if inst.delete_sets is not None and any(inst.delete_sets):
        lines.append("DELETE_SECTION")
        for v, edges in enumerate(inst.delete_sets, start=1):
            if edges:
                lines.append(f"{v} : " + " ".join(f"({a + 1} {b + 1})" for a, b in edges))
    lines.append("EOF")
    return "\n".join(lines) + "\n"


def load_instance(path: str) -> Instance:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_instance(fh.read())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


# --------------------------------------------------------------------------
# solution records
# --------------------------------------------------------------------------

@dataclass
class SolutionRecord:
    """One solver run.  ``tour`` holds 1-based node ids, ``circles`` [x, y, r] per node."""

    instance: str
    variant: str
    seed: int
    radius: float | None
    cost: float
    tour: list[int]
    headings: list[float] | None = None
    circles: list[list[float]] = field(default_factory=list)
    dubins_radius: float | None = None
    wall_time_ms: float | None = None
    valid: bool = True
    wpccp_radius: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SolutionRecord":
        try:
            return cls(**d)
        except TypeError as exc:
            raise InputError(f"bad solution record: {exc}") from None


def dump_records(records: Sequence[SolutionRecord]) -> str:
    """JSON text, keys sorted; floats keep their shortest round-trip repr."""
    return json.dumps({"records": [r.to_dict() for r in records]}, indent=1, sort_keys=True,
                      allow_nan=False) + "\n"


def load_records(text: str) -> list[SolutionRecord]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"records are not valid JSON: {exc.msg}", exc.lineno) from None
    if not isinstance(data, dict) or not isinstance(data.get("records"), list):
        raise ParseError("records file must hold an object with a 'records' list")
    return [SolutionRecord.from_dict(d) for d in data["records"]]
