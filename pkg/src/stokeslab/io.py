"""The SFLD1 on-disk field format.

Fixed 128-byte header: ASCII magic "SFLD1\n", little-endian int64 fields
(version, nx, ny, nz, ncomp, storage flag) and float64 extents
(Lx, Ly, z_min, z_max), zero-padded to 128 bytes.  Payload: little-endian
float64 samples (physical storage) or interleaved real/imaginary pairs
(spectral storage), component-major, then vertical node, then row-major
over the horizontal lattice.
"""

import struct

import numpy as np

from .errors import FormatError
from .field import PHYSICAL, SPECTRAL, SpectralField
from .grid import make_grid

MAGIC = b"SFLD1\n"
VERSION = 1
HEADER_SIZE = 128
_HEADER_FMT = "<6s6q4d"  # magic, version, nx, ny, nz, ncomp, storage, extents


def write_field(field, path):
    g = field.grid
    storage_flag = 0 if field.storage == PHYSICAL else 1
    head = struct.pack(_HEADER_FMT, MAGIC, VERSION, g.nx, g.ny, g.nz,
                       field.ncomp, storage_flag, g.Lx, g.Ly, g.z_min, g.z_max)
    head = head.ljust(HEADER_SIZE, b"\0")
    if field.storage == PHYSICAL:
        payload = np.ascontiguousarray(field.data.real, dtype="<f8")
    else:
        payload = np.ascontiguousarray(
            field.data.view(np.float64).reshape(field.data.shape + (2,)), dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(head)
        fh.write(payload.tobytes())


def read_field(path):
    with open(path, "rb") as fh:
        head = fh.read(HEADER_SIZE)
        if len(head) < HEADER_SIZE:
            raise FormatError("truncated header", offset=len(head))
        if head[:6] != MAGIC:
            raise FormatError("bad magic", offset=0)
        fields = struct.unpack(_HEADER_FMT, head[:struct.calcsize(_HEADER_FMT)])
        _, version, nx, ny, nz, ncomp, storage_flag, Lx, Ly, z_min, z_max = fields
        if version != VERSION:
            raise FormatError(f"unsupported format version {version}", offset=6)
        payload = fh.read()
    grid = make_grid(nx, ny, Lx, Ly, nz, z_min, z_max)
    nvals = ncomp * nz * nx * ny
    per_val = 8 if storage_flag == 0 else 16
    expected = nvals * per_val
    if len(payload) != expected:
        raise FormatError(
            f"truncated payload: expected {expected} bytes, got {len(payload)}",
            offset=HEADER_SIZE + len(payload))
    if storage_flag == 0:
        data = np.frombuffer(payload, dtype="<f8").reshape(ncomp, nz, nx, ny)
        return SpectralField(grid, data.astype(np.complex128), PHYSICAL)
    raw = np.frombuffer(payload, dtype="<f8").reshape(ncomp, nz, nx, ny, 2)
    # assign the parts separately so signed zeros survive bit-exactly
    data = np.empty((ncomp, nz, nx, ny), dtype=np.complex128)
    data.real = raw[..., 0]
    data.imag = raw[..., 1]
    return SpectralField(grid, data, SPECTRAL)


def field_io(field_or_path, path=None, mode=None):
    """Convenience wrapper: field_io(field, path, 'write') or field_io(path, mode='read')."""
    if mode == "write":
        write_field(field_or_path, path)
        return None
    if mode == "read":
        return read_field(path if path is not None else field_or_path)
    raise FormatError(f"unknown io mode {mode!r}")
