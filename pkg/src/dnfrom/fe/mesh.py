"""
Mesh container, structured mesh templates and ASCII mesh file I/O.

Templates produce desk-scale analogues of the structures studied with this
method: a rectangular block, a doubly clamped double-beam with coupling
bridges, and a clamped-clamped shallow arch.  All templates start from a
structured hexahedral grid; quadratic tetrahedra are obtained by a
conforming 6-tet split of every hexahedron followed by mid-edge node
insertion.

The file dialect is the widely used ``$Nodes``/``$Elements`` sectioned
ASCII format, version 2.2 subset.  Supported volume elements: type 4
(4-node tets, promoted to tet10 on read), type 5 (8-node hexes) and
type 11 (10-node tets).  Lower-dimensional elements only contribute their
nodes to the physical-group node sets.
"""

import numpy as np

from ..errors import ConfigError, MeshError
from .elements import TET10_EDGES

__all__ = ["Mesh", "generate_mesh", "parse_msh", "write_msh"]

_BOUNDARY_TYPES = {15: 1, 1: 2, 8: 3, 2: 3, 9: 6, 3: 4, 16: 8, 10: 9}
_VOLUME_TYPES = {4: 4, 5: 8, 11: 10}


class Mesh:
    """Unstructured mesh of a single element kind.

    Attributes
    ----------
    nodes : (n_nodes, 3) float ndarray
    elements : (n_elems, nodes_per_elem) int ndarray
    kind : {"hex8", "tet10"}
    node_sets : dict of str -> int ndarray
        Named boundary node sets.
    """

    def __init__(self, nodes, elements, kind, node_sets=None):
        self.nodes = np.asarray(nodes, dtype=float)
        self.elements = np.asarray(elements, dtype=int)
        if kind not in ("hex8", "tet10"):
            raise MeshError(f"unsupported element kind '{kind}'")
        self.kind = kind
        self.node_sets = {name: np.asarray(sorted(set(ids)), dtype=int)
                          for name, ids in (node_sets or {}).items()}
        if self.elements.size and (self.elements.min() < 0
                                   or self.elements.max() >= len(self.nodes)):
            raise MeshError("element connectivity references missing nodes")
        for name, ids in self.node_sets.items():
            if ids.size and (ids.min() < 0 or ids.max() >= len(self.nodes)):
                raise MeshError(f"node set '{name}' references missing nodes")

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_elements(self):
        return len(self.elements)

    @property
    def dof_count(self):
        return 3 * self.n_nodes

    def nodes_where(self, predicate):
        """Node indices satisfying a coordinate predicate."""
        mask = predicate(self.nodes)
        return np.flatnonzero(mask)


def _structured_hex_grid(xs, ys, zs):
    """Structured grid of hex8 elements on the tensor product of the
    given (sorted, strictly increasing) coordinate lines."""
    nx, ny, nz = len(xs) - 1, len(ys) - 1, len(zs) - 1
    X, Y, Z = np.meshgrid(xs, ys, zs, indexing="ij")
    nodes = np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])

    def nid(i, j, k):
        return (i * (ny + 1) + j) * (nz + 1) + k

    elems = []
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                elems.append([nid(i, j, k), nid(i + 1, j, k),
                              nid(i + 1, j + 1, k), nid(i, j + 1, k),
                              nid(i, j, k + 1), nid(i + 1, j, k + 1),
                              nid(i + 1, j + 1, k + 1), nid(i, j + 1, k + 1)])
    return nodes, np.array(elems, dtype=int)


_HEX_TO_TETS = ((0, 1, 2, 6), (0, 2, 3, 6), (0, 3, 7, 6),
                (0, 7, 4, 6), (0, 4, 5, 6), (0, 5, 1, 6))


def _split_hexes_to_tet4(nodes, hexes):
    tets = []
    for conn in hexes:
        for t in _HEX_TO_TETS:
            tet = [conn[t[0]], conn[t[1]], conn[t[2]], conn[t[3]]]
            v = nodes[tet]
            vol = np.linalg.det(v[1:] - v[0])
            if vol < 0:
                tet[1], tet[2] = tet[2], tet[1]
            tets.append(tet)
    return np.array(tets, dtype=int)


def _promote_tet4_to_tet10(nodes, tets):
    """Insert shared mid-edge nodes, returning (nodes, tet10 connectivity)."""
    nodes = list(map(tuple, np.asarray(nodes, dtype=float)))
    coords = np.asarray(nodes, dtype=float)
    midside = {}
    new_nodes = list(coords)
    conn10 = np.empty((len(tets), 10), dtype=int)
    conn10[:, :4] = tets
    for e, tet in enumerate(tets):
        for j, (a, b) in enumerate(TET10_EDGES):
            key = (min(tet[a], tet[b]), max(tet[a], tet[b]))
            idx = midside.get(key)
            if idx is None:
                idx = len(new_nodes)
                new_nodes.append(0.5 * (coords[tet[a]] + coords[tet[b]]))
                midside[key] = idx
            conn10[e, 4 + j] = idx
    return np.asarray(new_nodes, dtype=float), conn10


def _to_kind(nodes, hexes, kind):
    if kind == "hex8":
        return nodes, hexes
    tets = _split_hexes_to_tet4(nodes, hexes)
    return _promote_tet4_to_tet10(nodes, tets)


def _face_sets(nodes, tol):
    lo = nodes.min(axis=0)
    hi = nodes.max(axis=0)
    sets = {}
    for axis, (neg, pos) in enumerate((("xmin", "xmax"), ("ymin", "ymax"),
                                       ("zmin", "zmax"))):
        sets[neg] = np.flatnonzero(np.abs(nodes[:, axis] - lo[axis]) < tol)
        sets[pos] = np.flatnonzero(np.abs(nodes[:, axis] - hi[axis]) < tol)
    return sets


def _snapped_lines(length, n, extra):
    """Uniform coordinate lines with extra break points snapped in."""
    lines = set(np.linspace(0.0, length, n + 1))
    lines.update(extra)
    return np.array(sorted(lines))


def generate_mesh(template, element_kind="hex8", **params):
    """Generate a template mesh.

    Parameters
    ----------
    template : {"block", "beam", "arch"}
    element_kind : {"hex8", "tet10"}
    **params :
        ``block``: length, width, height, nx, ny, nz.
        ``beam`` (doubly clamped double-beam with coupling bridges):
        length, depth, thickness, gap, bridge_positions (centres along x),
        bridge_width, nx, ny(per beam), nz.
        ``arch`` (clamped-clamped shallow arch, two arched beams joined at
        midspan): length, depth, thickness, gap, rise, bridge_width,
        nx, ny, nz.

    Returns
    -------
    Mesh
        With clamped boundary sets named per template ("xmin"/"xmax" for
        block, "left"/"right" for beam and arch).
    """
    if template == "block":
        return _block_mesh(element_kind, **params)
    if template == "beam":
        return _beam_mesh(element_kind, **params)
    if template == "arch":
        return _arch_mesh(element_kind, **params)
    raise ConfigError(f"unknown mesh template '{template}'")


def _check_positive(**kwargs):
    for name, value in kwargs.items():
        if value <= 0:
            raise MeshError(f"degenerate geometry: {name} = {value}")


def _block_mesh(element_kind, length=1.0, width=1.0, height=1.0,
                nx=1, ny=1, nz=1):
    _check_positive(length=length, width=width, height=height,
                    nx=nx, ny=ny, nz=nz)
    xs = np.linspace(0.0, length, int(nx) + 1)
    ys = np.linspace(0.0, width, int(ny) + 1)
    zs = np.linspace(0.0, height, int(nz) + 1)
    nodes, hexes = _structured_hex_grid(xs, ys, zs)
    nodes, elems = _to_kind(nodes, hexes, element_kind)
    tol = 1e-9 * max(length, width, height)
    return Mesh(nodes, elems, element_kind, _face_sets(nodes, tol))


def _beam_mesh(element_kind, length=1000.0, depth=12.0, thickness=5.0,
               gap=5.0, bridge_positions=(311.0, 500.0, 684.0),
               bridge_width=5.0, nx=60, ny=1, nz=2):
    """Double-beam layout: two parallel beams along x joined by short
    bridges.  Defaults follow the published coupled-beam geometry
    (L = 1000, section 12 x 5, 5 um gap, outer bridges at 311 and
    1000 - 316 = 684 from the left end)."""
    _check_positive(length=length, depth=depth, thickness=thickness,
                    gap=gap, bridge_width=bridge_width, nx=nx, ny=ny, nz=nz)
    half_w = bridge_width / 2.0
    breaks = []
    for c in bridge_positions:
        if not 0.0 < c - half_w < c + half_w < length:
            raise MeshError(f"bridge at x={c} does not fit inside the beam")
        breaks.extend([c - half_w, c + half_w])
    xs = _snapped_lines(length, int(nx), breaks)
    y_rows = np.concatenate([
        np.linspace(0.0, thickness, int(ny) + 1),
        np.linspace(thickness + gap, 2 * thickness + gap, int(ny) + 1)])
    ys = np.unique(y_rows)
    zs = np.linspace(0.0, depth, int(nz) + 1)
    nodes, hexes = _structured_hex_grid(xs, ys, zs)

    centers = 0.25 * (nodes[hexes[:, 0]] + nodes[hexes[:, 1]]
                      + nodes[hexes[:, 2]] + nodes[hexes[:, 3]])
    centers += 0.25 * (nodes[hexes[:, 4]] + nodes[hexes[:, 5]]
                       + nodes[hexes[:, 6]] + nodes[hexes[:, 7]])
    centers *= 0.5

    in_beam = (centers[:, 1] < thickness) | (centers[:, 1] > thickness + gap)
    in_bridge = np.zeros(len(hexes), dtype=bool)
    mid = (centers[:, 1] >= thickness) & (centers[:, 1] <= thickness + gap)
    for c in bridge_positions:
        in_bridge |= mid & (np.abs(centers[:, 0] - c) < half_w)
    keep = in_beam | in_bridge
    nodes, hexes = _compress(nodes, hexes[keep])

    nodes, elems = _to_kind(nodes, hexes, element_kind)
    tol = 1e-9 * length
    sets = {
        "left": np.flatnonzero(np.abs(nodes[:, 0]) < tol),
        "right": np.flatnonzero(np.abs(nodes[:, 0] - length) < tol),
    }
    return Mesh(nodes, elems, element_kind, sets)


def _arch_mesh(element_kind, length=530.0, depth=20.0, thickness=5.0,
               gap=10.0, rise=13.4, bridge_width=10.0, nx=40, ny=1, nz=2):
    """Two shallow arched beams joined by a bridge at midspan.  The flat
    double-beam grid is generated first, trimmed to beams plus the central
    bridge, then the arch rise is applied as a vertical (y) offset
    following a parabolic centreline."""
    _check_positive(length=length, depth=depth, thickness=thickness,
                    gap=gap, rise=rise, bridge_width=bridge_width,
                    nx=nx, ny=ny, nz=nz)
    half_w = bridge_width / 2.0
    c = length / 2.0
    xs = _snapped_lines(length, int(nx), [c - half_w, c + half_w])
    y_rows = np.concatenate([
        np.linspace(0.0, thickness, int(ny) + 1),
        np.linspace(thickness + gap, 2 * thickness + gap, int(ny) + 1)])
    ys = np.unique(y_rows)
    zs = np.linspace(0.0, depth, int(nz) + 1)
    nodes, hexes = _structured_hex_grid(xs, ys, zs)

    centers = np.mean(nodes[hexes], axis=1)
    in_beam = (centers[:, 1] < thickness) | (centers[:, 1] > thickness + gap)
    mid = (centers[:, 1] >= thickness) & (centers[:, 1] <= thickness + gap)
    in_bridge = mid & (np.abs(centers[:, 0] - c) < half_w)
    nodes, hexes = _compress(nodes, hexes[in_beam | in_bridge])

    # parabolic rise, zero at the clamped ends
    xi = nodes[:, 0] / length
    nodes = nodes.copy()
    nodes[:, 1] += rise * 4.0 * xi * (1.0 - xi)

    nodes, elems = _to_kind(nodes, hexes, element_kind)
    tol = 1e-9 * length
    sets = {
        "left": np.flatnonzero(np.abs(nodes[:, 0]) < tol),
        "right": np.flatnonzero(np.abs(nodes[:, 0] - length) < tol),
    }
    return Mesh(nodes, elems, element_kind, sets)


def _compress(nodes, elems):
    """Drop unreferenced nodes and renumber the connectivity."""
    used = np.unique(elems)
    remap = -np.ones(len(nodes), dtype=int)
    remap[used] = np.arange(len(used))
    return nodes[used], remap[elems]


def parse_msh(path):
    """Parse an ASCII sectioned mesh file (version 2.2 subset).

    4-node tetrahedra are promoted to quadratic 10-node ones; physical
    groups become named node sets (via ``$PhysicalNames`` when present,
    otherwise ``group<id>``).

    Returns
    -------
    Mesh
    """
    phys_names = {}
    nodes = None
    node_ids = None
    raw_elems = []
    with open(path) as fh:
        lines = iter(fh.read().splitlines())
    for line in lines:
        token = line.strip()
        if not token:
            continue
        if not token.startswith("$"):
            raise MeshError(f"{path}: stray data outside sections: "
                            f"'{token[:40]}'")
        section = token[1:]
        if section == "MeshFormat":
            next(lines)
            _expect_end(lines, "MeshFormat", path)
        elif section == "PhysicalNames":
            count = int(next(lines).split()[0])
            for _ in range(count):
                parts = next(lines).split(maxsplit=2)
                phys_names[int(parts[1])] = parts[2].strip().strip('"')
            _expect_end(lines, "PhysicalNames", path)
        elif section == "Nodes":
            count = int(next(lines).split()[0])
            node_ids = np.empty(count, dtype=int)
            nodes = np.empty((count, 3))
            for i in range(count):
                parts = next(lines).split()
                node_ids[i] = int(parts[0])
                nodes[i] = [float(v) for v in parts[1:4]]
            _expect_end(lines, "Nodes", path)
        elif section == "Elements":
            count = int(next(lines).split()[0])
            for _ in range(count):
                parts = [int(v) for v in next(lines).split()]
                etype, ntags = parts[1], parts[2]
                tags = parts[3:3 + ntags]
                conn = parts[3 + ntags:]
                raw_elems.append((etype, tags[0] if tags else 0, conn))
            _expect_end(lines, "Elements", path)
        else:
            raise MeshError(f"{path}: unknown section '${section}'")

    if nodes is None:
        raise MeshError(f"{path}: missing $Nodes section")

    id_map = {int(i): k for k, i in enumerate(node_ids)}
    groups = {}
    volume_kind = None
    volume_conns = []
    for etype, group, conn in raw_elems:
        try:
            conn = [id_map[c] for c in conn]
        except KeyError as exc:
            raise MeshError(f"{path}: element references unknown node "
                            f"{exc.args[0]}")
        if etype in _VOLUME_TYPES:
            if len(conn) != _VOLUME_TYPES[etype]:
                raise MeshError(f"{path}: element of type {etype} has "
                                f"{len(conn)} nodes")
            kind = {4: "tet4", 5: "hex8", 11: "tet10"}[etype]
            if volume_kind is None:
                volume_kind = kind
            elif volume_kind != kind:
                raise MeshError(f"{path}: mixed volume element kinds "
                                f"({volume_kind} and {kind}) are not "
                                f"supported")
            volume_conns.append(conn)
            if group:
                groups.setdefault(group, []).extend(conn)
        elif etype in _BOUNDARY_TYPES:
            if group:
                groups.setdefault(group, []).extend(conn)
        else:
            raise MeshError(f"{path}: unsupported element kind {etype}")

    if volume_kind is None:
        raise MeshError(f"{path}: no volume elements found")

    elems = np.asarray(volume_conns, dtype=int)
    if volume_kind == "tet4":
        nodes, elems = _promote_tet4_to_tet10(nodes, elems)
        volume_kind = "tet10"

    node_sets = {}
    for gid, ids in sorted(groups.items()):
        name = phys_names.get(gid, f"group{gid}")
        node_sets[name] = np.asarray(sorted(set(ids)), dtype=int)
    return Mesh(nodes, elems, volume_kind, node_sets)


def _expect_end(lines, section, path):
    for line in lines:
        token = line.strip()
        if not token:
            continue
        if token == f"$End{section}":
            return
        continue
    raise MeshError(f"{path}: unterminated ${section} section")


def write_msh(mesh, path):
    """Write a mesh in the sectioned ASCII dialect read by parse_msh.

    Node sets are emitted as physical point elements so they survive a
    round trip.
    """
    etype = {"hex8": 5, "tet10": 11}[mesh.kind]
    set_names = sorted(mesh.node_sets)
    with open(path, "w") as fh:
        fh.write("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n")
        if set_names:
            fh.write("$PhysicalNames\n")
            fh.write(f"{len(set_names)}\n")
            for gid, name in enumerate(set_names, start=1):
                fh.write(f'0 {gid} "{name}"\n')
            fh.write("$EndPhysicalNames\n")
        fh.write("$Nodes\n")
        fh.write(f"{mesh.n_nodes}\n")
        for i, (x, y, z) in enumerate(mesh.nodes, start=1):
            fh.write(f"{i} {x:.17g} {y:.17g} {z:.17g}\n")
        fh.write("$EndNodes\n$Elements\n")
        n_points = sum(len(mesh.node_sets[name]) for name in set_names)
        fh.write(f"{mesh.n_elements + n_points}\n")
        eid = 1
        for gid, name in enumerate(set_names, start=1):
            for node in mesh.node_sets[name]:
                fh.write(f"{eid} 15 2 {gid} {gid} {node + 1}\n")
                eid += 1
        for conn in mesh.elements:
            conn_s = " ".join(str(c + 1) for c in conn)
            fh.write(f"{eid} {etype} 2 0 0 {conn_s}\n")
            eid += 1
        fh.write("$EndElements\n")
