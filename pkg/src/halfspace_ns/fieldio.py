"""Binary field files.

Half-space fields use magic "HSF1": a little-endian header
(magic 4s, version u16, d u32, N u32, M u32, components u32, tail u8,
L f64, X_max f64) followed by components x (M + tail) x N^d float64
physical-space values, row-major with the tail block last.  Boundary fields
use magic "TBF1" and drop the M / X_max / tail fields.

Round trips are bit-exact: loading keeps the raw payload on the field object
and storing writes that payload back verbatim when present, so the physical
samples survive even though the spectral transform rounds.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .fields import HalfSpaceField, TangentialField
from .grid import Grid

HSF_MAGIC = b"HSF1"
TBF_MAGIC = b"TBF1"
VERSION = 1
_HSF_HEADER = struct.Struct("<4sHIIIIBdd")
_TBF_HEADER = struct.Struct("<4sHIIId")


class FieldFormatError(ValueError):
    """Malformed field file; the message carries a byte-offset diagnostic."""


def _tangential_spectrum(phys: np.ndarray, grid: Grid) -> np.ndarray:
    axes = tuple(range(phys.ndim - grid.d, phys.ndim))
    return np.fft.fftn(phys, axes=axes) / grid.mode_count


def store_field(path: str | Path, field: HalfSpaceField | TangentialField) -> None:
    """Write a field file (HSF1 for half-space fields, TBF1 for boundary data)."""
    if isinstance(field, HalfSpaceField):
        _store_half_space(path, field)
    elif isinstance(field, TangentialField):
        _store_boundary(path, field)
    else:
        raise TypeError(f"cannot store a {type(field).__name__}")


def _store_half_space(path: str | Path, field: HalfSpaceField) -> None:
    grid = field.grid
    has_tail = field.tail is not None
    payload = field._phys_payload
    blocks = grid.M + (1 if has_tail else 0)
    expected_shape = (field.ncomp, blocks) + grid.shape
    if payload is None or payload.shape != expected_shape:
        payload = field.physical()
    header = _HSF_HEADER.pack(
        HSF_MAGIC, VERSION, grid.d, grid.N, grid.M, field.ncomp,
        1 if has_tail else 0, grid.L, grid.x_max,
    )
    data = np.ascontiguousarray(payload, dtype="<f8")
    Path(path).write_bytes(header + data.tobytes())


def _store_boundary(path: str | Path, field: TangentialField) -> None:
    grid = field.grid
    phys = field._phys_payload
    if phys is None or phys.shape != (field.ncomp,) + grid.shape:
        phys = field.physical()
    header = _TBF_HEADER.pack(TBF_MAGIC, VERSION, grid.d, grid.N, field.ncomp, grid.L)
    Path(path).write_bytes(header + np.ascontiguousarray(phys, dtype="<f8").tobytes())


def _read_exact(raw: bytes, header: struct.Struct, path: Path, magic: bytes):
    if len(raw) < header.size:
        raise FieldFormatError(
            f"{path}: truncated header, need {header.size} bytes at offset 0, have {len(raw)}"
        )
    fields = header.unpack_from(raw, 0)
    if fields[0] != magic:
        raise FieldFormatError(
            f"{path}: bad magic {fields[0]!r} at offset 0 (expected {magic!r})"
        )
    if fields[1] != VERSION:
        raise FieldFormatError(
            f"{path}: unsupported version {fields[1]} at offset 4 (expected {VERSION})"
        )
    return fields


def _check_payload(raw: bytes, offset: int, count: int, path: Path) -> np.ndarray:
    need = count * 8
    have = len(raw) - offset
    if have < need:
        raise FieldFormatError(
            f"{path}: truncated payload, need {need} bytes at offset {offset}, have {have}"
        )
    if have > need:
        raise FieldFormatError(
            f"{path}: {have - need} trailing bytes after offset {offset + need}"
        )
    return np.frombuffer(raw, dtype="<f8", count=count, offset=offset)


def load_field(path: str | Path, grid: Grid | None = None) -> HalfSpaceField | TangentialField:
    """Read a field file, reconstructing the grid from the header if not given."""
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) >= 4 and raw[:4] == TBF_MAGIC:
        return _load_boundary(raw, path, grid)
    return _load_half_space(raw, path, grid)


def _load_half_space(raw: bytes, path: Path, grid: Grid | None) -> HalfSpaceField:
    _, _, d, N, M, ncomp, tail_flag, L, x_max = _read_exact(raw, _HSF_HEADER, path, HSF_MAGIC)
    if grid is None:
        grid = Grid(d=d, N=N, L=L, M=M, x_max=x_max)
    elif (grid.d, grid.N, grid.M) != (d, N, M) or not (
        np.isclose(grid.L, L) and np.isclose(grid.x_max, x_max)
    ):
        raise FieldFormatError(
            f"{path}: declared grid (d={d}, N={N}, M={M}, L={L:g}, X_max={x_max:g}) "
            f"does not match the run grid {grid!r}"
        )
    blocks = M + (1 if tail_flag else 0)
    count = ncomp * blocks * N**d
    flat = _check_payload(raw, _HSF_HEADER.size, count, path)
    payload = flat.reshape((ncomp, blocks) + grid.shape).copy()
    spectrum = _tangential_spectrum(payload, grid)
    tail = spectrum[:, M] if tail_flag else None
    field = HalfSpaceField(grid, spectrum[:, :M], tail)
    field._phys_payload = payload
    return field


def _load_boundary(raw: bytes, path: Path, grid: Grid | None) -> TangentialField:
    _, _, d, N, ncomp, L = _read_exact(raw, _TBF_HEADER, path, TBF_MAGIC)
    if grid is None:
        # Boundary files carry no vertical data; desk verticals fill the gap.
        grid = Grid(d=d, N=N, L=L, M=N, x_max=8.0)
    elif (grid.d, grid.N) != (d, N) or not np.isclose(grid.L, L):
        raise FieldFormatError(
            f"{path}: declared grid (d={d}, N={N}, L={L:g}) does not match the run grid {grid!r}"
        )
    count = ncomp * N**d
    flat = _check_payload(raw, _TBF_HEADER.size, count, path)
    payload = flat.reshape((ncomp,) + grid.shape).copy()
    field = TangentialField(grid, _tangential_spectrum(payload, grid))
    field._phys_payload = payload
    return field
