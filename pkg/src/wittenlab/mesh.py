"""Planar triangle meshes: structured generators, uniform refinement, text I/O.

Centred round shapes are meshed with concentric rings whose point counts are
multiples of eight; the band triangulation between consecutive rings merges
the two angle sequences with exact integer comparisons, so the connectivity
repeats verbatim in each of the eight sectors.  That rotational symmetry is
what lets the eigensolver reproduce the double multiplicities of round
domains to tight tolerance.  Polygons go through ear clipping followed by
uniform splitting.  Hyperbolic runs reuse these meshes verbatim: domains are
specified in Poincare disk coordinates and only the assembly stage sees the
metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class MeshInvariantError(RuntimeError):
    """A mesh violated conformity, orientation, or boundary bookkeeping."""


class MeshFormatError(RuntimeError):
    """A mesh file failed structural parsing."""


MIN_TRIANGLE_AREA = 1e-14
FORMAT_HEADER = "WSLMESH 1"

SUPPORTED_SHAPES = (
    "disk",
    "translated-disk",
    "ellipse",
    "annulus",
    "polygon",
    "perturbed-disk",
)


@dataclass(frozen=True)
class DomainSpec:
    """Declarative description of a bounded planar domain.

    ``target_edge_length`` is the nominal mesh pitch ``h``.  For hyperbolic
    runs the coordinates are Poincare disk coordinates and the closure must
    stay strictly inside the unit disk; the generator itself is
    metric-agnostic.
    """

    shape: str
    target_edge_length: float = 0.1
    radius: float | None = None
    center: tuple[float, float] = (0.0, 0.0)
    semi_axis_x: float | None = None
    semi_axis_y: float | None = None
    aspect: float | None = None
    inner_radius: float | None = None
    outer_radius: float | None = None
    vertices: tuple[tuple[float, float], ...] | None = None
    perturbation: tuple[tuple[int, float], ...] | None = None

    def __post_init__(self):
        if self.shape not in SUPPORTED_SHAPES:
            raise ValueError(
                f"unknown shape {self.shape!r}; expected one of {SUPPORTED_SHAPES}"
            )
        if not (0 < self.target_edge_length < math.inf):
            raise ValueError("target_edge_length must be positive and finite")
        if self.shape in ("disk", "translated-disk", "perturbed-disk"):
            if self.radius is None or self.radius <= 0:
                raise ValueError(f"{self.shape} requires a positive radius")
        if self.shape == "disk" and tuple(self.center) != (0.0, 0.0):
            raise ValueError("disk is centred by definition; use translated-disk")
        if self.shape == "ellipse":
            if self.aspect is not None:
                if self.aspect <= 0:
                    raise ValueError("ellipse aspect must be positive")
                if self.semi_axis_x is not None or self.semi_axis_y is not None:
                    raise ValueError("give either aspect or explicit semi-axes")
            elif self.semi_axis_x is None or self.semi_axis_y is None:
                raise ValueError("ellipse requires aspect or both semi-axes")
            elif self.semi_axis_x <= 0 or self.semi_axis_y <= 0:
                raise ValueError("ellipse semi-axes must be positive")
        if self.shape == "annulus":
            if (
                self.inner_radius is None
                or self.outer_radius is None
                or not (0 < self.inner_radius < self.outer_radius)
            ):
                raise ValueError("annulus requires 0 < inner_radius < outer_radius")
        if self.shape == "polygon":
            if self.vertices is None or len(self.vertices) < 3:
                raise ValueError("polygon requires at least three vertices")
        if self.shape == "perturbed-disk":
            if not self.perturbation:
                raise ValueError("perturbed-disk requires perturbation [(mode, amp), ...]")
            for mode, _amp in self.perturbation:
                if int(mode) != mode or mode < 1:
                    raise ValueError("perturbation modes must be integers >= 1")
            theta = np.linspace(0.0, 2 * math.pi, 4096, endpoint=False)
            if np.min(self._shape_factor(theta)) < 0.05:
                raise ValueError(
                    "perturbation nearly pinches the boundary; the polar-graph "
                    "class supported here needs rho >= 0.05 * radius"
                )

    def _shape_factor(self, theta):
        fac = np.ones_like(theta)
        for mode, amp in self.perturbation or ():
            fac = fac + amp * np.cos(mode * np.asarray(theta, dtype=float))
        return fac

    def semi_axes(self) -> tuple[float, float]:
        if self.aspect is not None:
            return float(self.aspect), 1.0 / float(self.aspect)
        return float(self.semi_axis_x), float(self.semi_axis_y)

    def boundary_radius(self, theta):
        """Polar boundary graph rho(theta) about ``center`` for round shapes."""
        theta = np.asarray(theta, dtype=float)
        if self.shape in ("disk", "translated-disk"):
            return np.full_like(theta, float(self.radius))
        if self.shape == "ellipse":
            a, b = self.semi_axes()
            return a * b / np.sqrt((b * np.cos(theta)) ** 2 + (a * np.sin(theta)) ** 2)
        if self.shape == "perturbed-disk":
            return float(self.radius) * self._shape_factor(theta)
        raise ValueError(f"{self.shape} has no polar boundary graph")

    def describe(self) -> str:
        if self.shape == "disk":
            return f"disk(radius={self.radius:g})"
        if self.shape == "translated-disk":
            return (
                f"translated-disk(radius={self.radius:g}, "
                f"center=({self.center[0]:g}, {self.center[1]:g}))"
            )
        if self.shape == "ellipse":
            a, b = self.semi_axes()
            return f"ellipse(semi_axes=({a:g}, {b:g}))"
        if self.shape == "annulus":
            return f"annulus({self.inner_radius:g}, {self.outer_radius:g})"
        if self.shape == "polygon":
            return f"polygon({len(self.vertices)} vertices)"
        pert = ", ".join(f"({m}, {a:g})" for m, a in self.perturbation)
        return f"perturbed-disk(radius={self.radius:g}, modes=[{pert}])"


@dataclass
class Mesh:
    """Conforming triangulation with positively oriented triangles."""

    nodes: np.ndarray
    triangles: np.ndarray
    boundary_nodes: np.ndarray
    domain_tag: str
    spec: DomainSpec | None = field(default=None, repr=False)

    def signed_areas(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        return 0.5 * (
            (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
            - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1])
        )

    def edge_lengths(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        e = np.concatenate(
            [p[:, 1] - p[:, 0], p[:, 2] - p[:, 1], p[:, 0] - p[:, 2]], axis=0
        )
        return np.hypot(e[:, 0], e[:, 1])

    def area(self) -> float:
        return float(np.sum(self.signed_areas()))


def _edge_counts(triangles: np.ndarray) -> dict[tuple[int, int], int]:
    counts: dict[tuple[int, int], int] = {}
    for a, b, c in triangles:
        for u, v in ((a, b), (b, c), (c, a)):
            key = (u, v) if u < v else (v, u)
            counts[key] = counts.get(key, 0) + 1
    return counts


def validate(mesh: Mesh) -> None:
    """Raise :class:`MeshInvariantError` on any broken structural invariant."""
    if mesh.triangles.min() < 0 or mesh.triangles.max() >= len(mesh.nodes):
        raise MeshInvariantError("triangle indices out of node range")
    areas = mesh.signed_areas()
    if np.min(areas) < MIN_TRIANGLE_AREA:
        raise MeshInvariantError(
            f"triangle with signed area {np.min(areas):.3g} below "
            f"{MIN_TRIANGLE_AREA:g}; orientation or degeneracy problem"
        )

    counts = _edge_counts(mesh.triangles)
    if any(c > 2 for c in counts.values()):
        raise MeshInvariantError("an edge is shared by more than two triangles")
    boundary_edges = [e for e, c in counts.items() if c == 1]
    expected_boundary = np.unique(np.asarray(boundary_edges, dtype=int).ravel())
    if not np.array_equal(np.sort(mesh.boundary_nodes), expected_boundary):
        raise MeshInvariantError("boundary node list disagrees with edge incidence")

    # disk-like or annulus-like topology only
    V, F = len(mesh.nodes), len(mesh.triangles)
    E = len(counts)
    euler = V - E + F
    if euler not in (0, 1):
        raise MeshInvariantError(f"unexpected Euler characteristic {euler}")


def _band_triangles(inner: np.ndarray, outer: np.ndarray) -> list[tuple[int, int, int]]:
    """Zipper triangulation between two concentric node rings.

    ``inner`` and ``outer`` list node indices in angular order; counts may
    differ.  Advancement decisions compare the fractions j/len(inner) and
    k/len(outer) in integer arithmetic, so the pattern is exactly equivariant
    under any rotation that maps both rings to themselves.
    """
    ni, no = len(inner), len(outer)
    tris: list[tuple[int, int, int]] = []
    j = k = 0
    while j < ni or k < no:
        advance_inner = False
        if j < ni and k < no:
            # next inner angle (j+1)/ni vs next outer angle (k+1)/no
            advance_inner = (j + 1) * no < (k + 1) * ni
        elif j < ni:
            advance_inner = True
        if advance_inner:
            tris.append((inner[j % ni], outer[k % no], inner[(j + 1) % ni]))
            j += 1
        else:
            tris.append((inner[j % ni], outer[k % no], outer[(k + 1) % no]))
            k += 1
    return tris


def _polar_star_mesh(spec: DomainSpec) -> Mesh:
    """Concentric-ring mesh of a star-shaped polar-graph domain."""
    h = spec.target_edge_length
    theta_probe = np.linspace(0.0, 2 * math.pi, 1024, endpoint=False)
    rho_max = float(np.max(spec.boundary_radius(theta_probe)))
    rings = max(2, math.ceil(rho_max / h))
    cx, cy = spec.center

    nodes = [(cx, cy)]
    ring_indices: list[np.ndarray] = []
    for i in range(1, rings + 1):
        count = 8 * i
        theta = 2.0 * math.pi * np.arange(count) / count
        rho = spec.boundary_radius(theta) * (i / rings)
        xs = cx + rho * np.cos(theta)
        ys = cy + rho * np.sin(theta)
        start = len(nodes)
        nodes.extend(zip(xs.tolist(), ys.tolist()))
        ring_indices.append(np.arange(start, start + count))

    tris: list[tuple[int, int, int]] = []
    first = ring_indices[0]
    for j in range(len(first)):
        tris.append((0, first[j], first[(j + 1) % len(first)]))
    for i in range(1, rings):
        tris.extend(_band_triangles(ring_indices[i - 1], ring_indices[i]))

    mesh = Mesh(
        nodes=np.asarray(nodes, dtype=float),
        triangles=_orient_ccw(np.asarray(nodes, dtype=float), np.asarray(tris, dtype=int)),
        boundary_nodes=np.sort(ring_indices[-1]),
        domain_tag=spec.describe(),
        spec=spec,
    )
    validate(mesh)
    return mesh


def _annulus_mesh(spec: DomainSpec) -> Mesh:
    h = spec.target_edge_length
    r_in, r_out = float(spec.inner_radius), float(spec.outer_radius)
    rings = max(1, math.ceil((r_out - r_in) / h))
    count = 8 * max(1, math.ceil(2.0 * math.pi * r_out / (8.0 * h)))
    theta = 2.0 * math.pi * np.arange(count) / count

    nodes = []
    ring_indices = []
    for i in range(rings + 1):
        r = r_in + (r_out - r_in) * i / rings
        start = len(nodes)
        nodes.extend(zip((r * np.cos(theta)).tolist(), (r * np.sin(theta)).tolist()))
        ring_indices.append(np.arange(start, start + count))

    tris: list[tuple[int, int, int]] = []
    for i in range(rings):
        inner, outer = ring_indices[i], ring_indices[i + 1]
        for j in range(count):
            jn = (j + 1) % count
            tris.append((inner[j], outer[j], outer[jn]))
            tris.append((inner[j], outer[jn], inner[jn]))

    nodes_arr = np.asarray(nodes, dtype=float)
    mesh = Mesh(
        nodes=nodes_arr,
        triangles=_orient_ccw(nodes_arr, np.asarray(tris, dtype=int)),
        boundary_nodes=np.sort(np.concatenate([ring_indices[0], ring_indices[-1]])),
        domain_tag=spec.describe(),
        spec=spec,
    )
    validate(mesh)
    return mesh


def _polygon_is_simple(verts: np.ndarray) -> bool:
    n = len(verts)

    def intersects(p, q, r, s):
        def orient(a, b, c):
            return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

        d1, d2 = orient(p, q, r), orient(p, q, s)
        d3, d4 = orient(r, s, p), orient(r, s, q)
        return (d1 * d2 < 0) and (d3 * d4 < 0)

    for i in range(n):
        for j in range(i + 1, n):
            if abs(i - j) in (0, 1) or (i == 0 and j == n - 1):
                continue
            if intersects(verts[i], verts[(i + 1) % n], verts[j], verts[(j + 1) % n]):
                return False
    return True


def _ear_clip(verts: np.ndarray) -> list[tuple[int, int, int]]:
    n = len(verts)
    idx = list(range(n))
    tris: list[tuple[int, int, int]] = []

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    def point_in_triangle(p, a, b, c):
        d1, d2, d3 = cross(a, b, p), cross(b, c, p), cross(c, a, p)
        return d1 >= -1e-14 and d2 >= -1e-14 and d3 >= -1e-14

    guard = 0
    while len(idx) > 3:
        guard += 1
        if guard > 10 * n * n:
            raise MeshInvariantError("ear clipping failed; polygon may be degenerate")
        m = len(idx)
        clipped = False
        for pos in range(m):
            i0, i1, i2 = idx[pos - 1], idx[pos], idx[(pos + 1) % m]
            a, b, c = verts[i0], verts[i1], verts[i2]
            if cross(a, b, c) <= 1e-14:
                continue  # reflex or flat corner
            if any(
                point_in_triangle(verts[k], a, b, c)
                for k in idx
                if k not in (i0, i1, i2)
            ):
                continue
            tris.append((i0, i1, i2))
            idx.pop(pos)
            clipped = True
            break
        if not clipped:
            raise MeshInvariantError("no ear found; polygon is not simple enough")
    tris.append((idx[0], idx[1], idx[2]))
    return tris


def _polygon_mesh(spec: DomainSpec) -> Mesh:
    verts = np.asarray(spec.vertices, dtype=float)
    if len(np.unique(verts, axis=0)) != len(verts):
        raise ValueError("polygon has repeated vertices")
    if not _polygon_is_simple(verts):
        raise ValueError("polygon is self-intersecting")
    # enforce counter-clockwise outline
    doubled = np.sum(
        (verts[(np.arange(len(verts)) + 1) % len(verts), 0] - verts[:, 0])
        * (verts[(np.arange(len(verts)) + 1) % len(verts), 1] + verts[:, 1])
    )
    if doubled > 0:
        verts = verts[::-1]

    tris = np.asarray(_ear_clip(verts), dtype=int)
    boundary = _boundary_from_edges(tris)
    mesh = Mesh(
        nodes=verts.copy(),
        triangles=_orient_ccw(verts, tris),
        boundary_nodes=boundary,
        domain_tag=spec.describe(),
        spec=spec,
    )
    # split until the coarse ears meet the pitch; boundary stays polygonal
    h = spec.target_edge_length
    while np.max(mesh.edge_lengths()) > 1.9 * h:
        mesh = refine(mesh)
    validate(mesh)
    return mesh


def _boundary_from_edges(triangles: np.ndarray) -> np.ndarray:
    counts = _edge_counts(triangles)
    edges = [e for e, c in counts.items() if c == 1]
    return np.unique(np.asarray(edges, dtype=int).ravel())


def _orient_ccw(nodes: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    p = nodes[triangles]
    areas = 0.5 * (
        (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
        - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1])
    )
    flipped = triangles.copy()
    wrong = areas < 0
    flipped[wrong] = flipped[wrong][:, [0, 2, 1]]
    return flipped


def generate(spec: DomainSpec) -> Mesh:
    """Mesh a domain description at its target edge length."""
    if spec.shape in ("disk", "translated-disk", "ellipse", "perturbed-disk"):
        return _polar_star_mesh(spec)
    if spec.shape == "annulus":
        return _annulus_mesh(spec)
    if spec.shape == "polygon":
        return _polygon_mesh(spec)
    raise ValueError(f"unsupported shape {spec.shape!r}")


def _project_to_boundary(spec: DomainSpec, points: np.ndarray) -> np.ndarray:
    """Move edge midpoints onto the analytic boundary of the generating shape."""
    out = points.copy()
    if spec.shape in ("disk", "translated-disk", "ellipse", "perturbed-disk"):
        cx, cy = spec.center
        rel = points - np.array([cx, cy])
        theta = np.arctan2(rel[:, 1], rel[:, 0])
        rho = spec.boundary_radius(theta)
        out = np.column_stack([cx + rho * np.cos(theta), cy + rho * np.sin(theta)])
    elif spec.shape == "annulus":
        r = np.hypot(points[:, 0], points[:, 1])
        mid = 0.5 * (spec.inner_radius + spec.outer_radius)
        target = np.where(r < mid, spec.inner_radius, spec.outer_radius)
        scale = target / r
        out = points * scale[:, None]
    return out


def refine(mesh: Mesh) -> Mesh:
    """Split every triangle into four; project new boundary midpoints.

    Midpoints of boundary edges are moved onto the analytic boundary when the
    mesh still knows its generating shape (polygons and externally loaded
    meshes refine without projection).  Conformity and orientation are
    preserved; node count grows by the edge count.
    """
    counts = _edge_counts(mesh.triangles)
    boundary_edges = {e for e, c in counts.items() if c == 1}

    nodes = [tuple(p) for p in mesh.nodes]
    midpoint_index: dict[tuple[int, int], int] = {}
    boundary_new: list[int] = []

    boundary_keys = []
    boundary_mids = []
    for edge in counts:
        a, b = edge
        mid = 0.5 * (mesh.nodes[a] + mesh.nodes[b])
        midpoint_index[edge] = len(nodes)
        nodes.append(tuple(mid))
        if edge in boundary_edges:
            boundary_keys.append(midpoint_index[edge])
            boundary_mids.append(mid)

    nodes_arr = np.asarray(nodes, dtype=float)
    if boundary_mids and mesh.spec is not None and mesh.spec.shape != "polygon":
        projected = _project_to_boundary(mesh.spec, np.asarray(boundary_mids))
        nodes_arr[np.asarray(boundary_keys, dtype=int)] = projected
    boundary_new = boundary_keys

    tris = []
    for a, b, c in mesh.triangles:
        mab = midpoint_index[(a, b) if a < b else (b, a)]
        mbc = midpoint_index[(b, c) if b < c else (c, b)]
        mca = midpoint_index[(c, a) if c < a else (a, c)]
        tris.extend([(a, mab, mca), (b, mbc, mab), (c, mca, mbc), (mab, mbc, mca)])

    new_boundary = np.sort(
        np.concatenate([mesh.boundary_nodes, np.asarray(boundary_new, dtype=int)])
    ) if boundary_new else mesh.boundary_nodes.copy()

    out = Mesh(
        nodes=nodes_arr,
        triangles=_orient_ccw(nodes_arr, np.asarray(tris, dtype=int)),
        boundary_nodes=new_boundary,
        domain_tag=mesh.domain_tag,
        spec=mesh.spec,
    )
    validate(out)
    return out


def save(mesh: Mesh, path) -> None:
    """Write the exchange format; floats use shortest round-trip decimals."""
    lines = [FORMAT_HEADER]
    lines.append(f"{len(mesh.nodes)} {len(mesh.triangles)} {len(mesh.boundary_nodes)}")
    for x, y in mesh.nodes:
        lines.append(f"{float(x)!r} {float(y)!r}")
    for a, b, c in mesh.triangles:
        lines.append(f"{int(a)} {int(b)} {int(c)}")
    for b in mesh.boundary_nodes:
        lines.append(str(int(b)))
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load(path) -> Mesh:
    """Read the exchange format and validate the result.

    Loaded meshes carry no generating shape, so refinement will not project
    their boundary midpoints.
    """
    with open(path, "r", encoding="ascii") as fh:
        raw = [line.strip() for line in fh if line.strip()]
    if not raw or raw[0] != FORMAT_HEADER:
        raise MeshFormatError(f"missing '{FORMAT_HEADER}' header")
    try:
        nv, nt, nb = (int(tok) for tok in raw[1].split())
    except (IndexError, ValueError) as exc:
        raise MeshFormatError("malformed count line") from exc
    if len(raw) != 2 + nv + nt + nb:
        raise MeshFormatError(
            f"expected {2 + nv + nt + nb} lines, found {len(raw)}"
        )
    try:
        nodes = np.asarray(
            [[float(tok) for tok in line.split()] for line in raw[2 : 2 + nv]],
            dtype=float,
        )
        tris = np.asarray(
            [[int(tok) for tok in line.split()] for line in raw[2 + nv : 2 + nv + nt]],
            dtype=int,
        )
        boundary = np.asarray([int(line) for line in raw[2 + nv + nt :]], dtype=int)
    except ValueError as exc:
        raise MeshFormatError(f"malformed record: {exc}") from exc
    if nodes.shape != (nv, 2) or tris.shape != (nt, 3):
        raise MeshFormatError("record arity mismatch")
    mesh = Mesh(
        nodes=nodes,
        triangles=tris,
        boundary_nodes=np.sort(boundary),
        domain_tag="external",
        spec=None,
    )
    validate(mesh)
    return mesh
