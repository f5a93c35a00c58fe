"""Mesh loaders for OBJ and PLY vertex data.

Only vertex positions are read; face data is discarded because the hull
is always rebuilt from the point cloud. PLY support covers ascii and
binary_little_endian with scalar vertex properties.
"""

import os
import struct

import numpy as np

from .errors import FormatError
from .hull import PointSet

_PLY_SCALAR_SIZES = {
    "char": 1, "int8": 1, "uchar": 1, "uint8": 1,
    "short": 2, "int16": 2, "ushort": 2, "uint16": 2,
    "int": 4, "int32": 4, "uint": 4, "uint32": 4,
    "float": 4, "float32": 4,
    "double": 8, "float64": 8,
}

_PLY_STRUCT_CODES = {
    "char": "b", "int8": "b", "uchar": "B", "uint8": "B",
    "short": "h", "int16": "h", "ushort": "H", "uint16": "H",
    "int": "i", "int32": "i", "uint": "I", "uint32": "I",
    "float": "f", "float32": "f",
    "double": "d", "float64": "d",
}


def load_mesh(path: str | os.PathLike) -> PointSet:
    """Load vertex positions from an OBJ or PLY file.

    Raises OSError if the file is unreadable and FormatError for unknown
    or malformed formats.
    """
    path = os.fspath(path)
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head[:3] == b"ply":
        points = _load_ply(path)
    else:
        ext = os.path.splitext(path)[1].lower()
        if ext == ".obj":
            points = _load_obj(path)
        elif ext == ".ply":
            raise FormatError(f"{path}: missing 'ply' magic")
        else:
            raise FormatError(f"{path}: unknown mesh format")
    if len(points) == 0:
        raise FormatError(f"{path}: no vertices")
    return PointSet(points, source_label=os.path.basename(path))


def _load_obj(path: str) -> np.ndarray:
    verts = []
    with open(path, "r", errors="replace") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.startswith("v ") and not line.startswith("v\t"):
                continue
            parts = line.split()
            if len(parts) < 4:
                raise FormatError(f"{path}:{lineno}: malformed vertex line")
            try:
                verts.append([float(parts[1]), float(parts[2]), float(parts[3])])
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from exc
    return np.array(verts, dtype=np.float64).reshape(-1, 3)


def _load_ply(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        fmt, elements = _parse_ply_header(fh, path)
        vertex_elem = None
        for name, count, props in elements:
            if name == "vertex":
                vertex_elem = (count, props)
                break
        if vertex_elem is None:
            raise FormatError(f"{path}: no vertex element")
        count, props = vertex_elem

        names = [p[0] for p in props]
        for axis in ("x", "y", "z"):
            if axis not in names:
                raise FormatError(f"{path}: vertex element lacks property '{axis}'")
        for pname, ptype in props:
            if pname in ("x", "y", "z") and ptype not in ("float", "float32", "double", "float64"):
                raise FormatError(f"{path}: property '{pname}' must be a 32- or 64-bit real, got '{ptype}'")

        # elements listed before 'vertex' would shift the payload; reject
        # rather than guess their encoded size
        if elements and elements[0][0] != "vertex":
            raise FormatError(f"{path}: vertex must be the first element")

        if fmt == "ascii":
            return _read_ply_ascii(fh, path, count, props)
        return _read_ply_binary(fh, path, count, props)


def _parse_ply_header(fh, path: str):
    line = fh.readline().strip()
    if line != b"ply":
        raise FormatError(f"{path}: missing 'ply' magic")
    fmt = None
    elements = []  # (name, count, [(prop_name, prop_type), ...])
    while True:
        raw = fh.readline()
        if not raw:
            raise FormatError(f"{path}: truncated header")
        tokens = raw.decode("ascii", errors="replace").split()
        if not tokens or tokens[0] == "comment":
            continue
        if tokens[0] == "format":
            if len(tokens) < 2 or tokens[1] not in ("ascii", "binary_little_endian"):
                raise FormatError(f"{path}: unsupported format {tokens[1:]}")
            fmt = tokens[1]
        elif tokens[0] == "element":
            if len(tokens) != 3:
                raise FormatError(f"{path}: malformed element line")
            elements.append((tokens[1], int(tokens[2]), []))
        elif tokens[0] == "property":
            if not elements:
                raise FormatError(f"{path}: property before element")
            if tokens[1] == "list":
                if elements[-1][0] == "vertex":
                    raise FormatError(f"{path}: list property in vertex element is unsupported")
                elements[-1][2].append((tokens[-1], "list"))
            else:
                if len(tokens) != 3 or tokens[1] not in _PLY_SCALAR_SIZES:
                    raise FormatError(f"{path}: unsupported property {tokens[1:]}")
                elements[-1][2].append((tokens[2], tokens[1]))
        elif tokens[0] == "end_header":
            break
        else:
            raise FormatError(f"{path}: unexpected header line {tokens[0]!r}")
    if fmt is None:
        raise FormatError(f"{path}: header lacks a format line")
    return fmt, elements


def _read_ply_ascii(fh, path: str, count: int, props) -> np.ndarray:
    names = [p[0] for p in props]
    ix, iy, iz = names.index("x"), names.index("y"), names.index("z")
    out = np.empty((count, 3), dtype=np.float64)
    for i in range(count):
        raw = fh.readline()
        if not raw:
            raise FormatError(f"{path}: truncated vertex data at row {i}")
        vals = raw.split()
        if len(vals) < len(props):
            raise FormatError(f"{path}: vertex row {i} has {len(vals)} values, expected {len(props)}")
        out[i] = (float(vals[ix]), float(vals[iy]), float(vals[iz]))
    return out


def _read_ply_binary(fh, path: str, count: int, props) -> np.ndarray:
    fmt = "<" + "".join(_PLY_STRUCT_CODES[ptype] for _, ptype in props)
    stride = struct.calcsize(fmt)
    names = [p[0] for p in props]
    ix, iy, iz = names.index("x"), names.index("y"), names.index("z")
    payload = fh.read(stride * count)
    if len(payload) < stride * count:
        raise FormatError(f"{path}: truncated vertex data")
    out = np.empty((count, 3), dtype=np.float64)
    for i, rec in enumerate(struct.iter_unpack(fmt, payload)):
        out[i] = (rec[ix], rec[iy], rec[iz])
    return out
