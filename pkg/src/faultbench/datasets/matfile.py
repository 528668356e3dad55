"""Reader for MATLAB level-5 MAT-files.

Handles numeric, logical, char, struct and cell arrays, both byte orders,
and zlib-compressed elements. Numeric arrays come back as numpy arrays in
MATLAB (column-major) index order; a 1x1 struct becomes a ``dict``, struct
arrays a list of dicts, cell arrays a list, char arrays a ``str`` (or a list
of row strings).
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

from ..errors import CorruptFileError, UnsupportedFormatError

HEADER_BYTES = 128

MI_INT8, MI_UINT8, MI_INT16, MI_UINT16, MI_INT32, MI_UINT32 = 1, 2, 3, 4, 5, 6
MI_SINGLE, MI_DOUBLE, MI_INT64, MI_UINT64 = 7, 9, 12, 13
MI_MATRIX, MI_COMPRESSED, MI_UTF8, MI_UTF16, MI_UTF32 = 14, 15, 16, 17, 18

MI_DTYPES = {
    MI_INT8: "i1", MI_UINT8: "u1", MI_INT16: "i2", MI_UINT16: "u2",
    MI_INT32: "i4", MI_UINT32: "u4", MI_SINGLE: "f4", MI_DOUBLE: "f8",
    MI_INT64: "i8", MI_UINT64: "u8", MI_UTF8: "u1", MI_UTF16: "u2", MI_UTF32: "u4",
}

MX_CELL, MX_STRUCT, MX_OBJECT, MX_CHAR, MX_SPARSE = 1, 2, 3, 4, 5
MX_NUMERIC = {
    6: np.float64, 7: np.float32, 8: np.int8, 9: np.uint8, 10: np.int16,
    11: np.uint16, 12: np.int32, 13: np.uint32, 14: np.int64, 15: np.uint64,
}
FLAG_COMPLEX = 0x0800
FLAG_LOGICAL = 0x0200

V73_HINT = (
    "MAT v7.3 files are HDF5 containers and are not supported; re-save with "
    "`save(name, '-v7')` in MATLAB or convert with h5py"
)


class _Reader:
    def __init__(self, buf, endian, base_offset=0):
        self.buf = buf
        self.endian = endian
        self.base = base_offset

    def _corrupt(self, msg, pos):
        raise CorruptFileError(msg, offset=self.base + pos)

    def tag(self, pos):
        if pos + 8 > len(self.buf):
            self._corrupt("truncated data element tag", pos)
        first, second = struct.unpack_from(self.endian + "II", self.buf, pos)
        small_bytes = first >> 16
        if small_bytes:
            # small data element: type and size share the first word
            if small_bytes > 4:
                self._corrupt("invalid small data element", pos)
            return first & 0xFFFF, small_bytes, pos + 4, pos + 8
        dtype, nbytes = first, second
        start = pos + 8
        end = start + nbytes
        if end > len(self.buf):
            self._corrupt(f"data element claims {nbytes} bytes beyond end of file", pos)
        padded = start + ((nbytes + 7) // 8) * 8
        if dtype == MI_COMPRESSED:
            padded = end
        return dtype, nbytes, start, min(padded, len(self.buf))

    def numeric(self, dtype, nbytes, start, pos):
        if dtype not in MI_DTYPES:
            self._corrupt(f"unknown data type {dtype}", pos)
        dt = np.dtype(MI_DTYPES[dtype]).newbyteorder(self.endian)
        if nbytes % dt.itemsize:
            self._corrupt("element size is not a multiple of its type", pos)
        return np.frombuffer(self.buf, dt, nbytes // dt.itemsize, start)

    def element(self, pos):
        """Parse one element at ``pos``; return ``(name, value, next_pos)``."""
        dtype, nbytes, start, nxt = self.tag(pos)
        if dtype == MI_COMPRESSED:
            try:
                raw = zlib.decompress(self.buf[start : start + nbytes])
            except zlib.error as exc:
                self._corrupt(f"bad compressed element ({exc})", pos)
            inner = _Reader(raw, self.endian, self.base + start)
            name, value, _ = inner.element(0)
            return name, value, nxt
        if dtype != MI_MATRIX:
            return None, self.numeric(dtype, nbytes, start, pos), nxt
        if nbytes == 0:
            return "", np.empty((0, 0)), nxt
        name, value = self.matrix(start, start + nbytes)
        return name, value, nxt

    def sub(self, pos, end):
        dtype, nbytes, start, nxt = self.tag(pos)
        if nxt > end and start + nbytes > end:
            self._corrupt("sub-element overruns its matrix", pos)
        return dtype, nbytes, start, nxt

    def matrix(self, pos, end):
        dtype, nbytes, start, pos_ = self.sub(pos, end)
        flags = self.numeric(dtype, nbytes, start, pos)
        mx_class = int(flags[0]) & 0xFF
        complex_ = bool(int(flags[0]) & FLAG_COMPLEX)
        logical = bool(int(flags[0]) & FLAG_LOGICAL)
        dtype, nbytes, start, nxt = self.sub(pos_, end)
        dims = tuple(int(d) for d in self.numeric(dtype, nbytes, start, pos_))
        pos_ = nxt
        dtype, nbytes, start, nxt = self.sub(pos_, end)
        name = bytes(self.buf[start : start + nbytes]).decode("latin-1")
        pos_ = nxt

        if mx_class in MX_NUMERIC:
            dtype, nbytes, start, nxt = self.sub(pos_, end)
            real = self.numeric(dtype, nbytes, start, pos_).astype(MX_NUMERIC[mx_class])
            pos_ = nxt
            if complex_:
                dtype, nbytes, start, nxt = self.sub(pos_, end)
                imag = self.numeric(dtype, nbytes, start, pos_).astype(MX_NUMERIC[mx_class])
                real = real + 1j * imag
            if real.size != int(np.prod(dims)):
                self._corrupt("array data does not match its dimensions", pos_)
            arr = real.reshape(dims, order="F")
            return name, arr.astype(bool) if logical else arr
        if mx_class == MX_CHAR:
            dtype, nbytes, start, nxt = self.sub(pos_, end)
            codes = self.numeric(dtype, nbytes, start, pos_)
            if dtype == MI_UTF8:
                text = bytes(codes).decode("utf-8")
                chars = np.array(list(text)) if text else np.array([], dtype="<U1")
            else:
                chars = np.array([chr(c) for c in codes], dtype="<U1")
            if chars.size != int(np.prod(dims)):
                return name, "".join(chars)
            rows = chars.reshape(dims, order="F")
            if rows.ndim == 2 and rows.shape[0] == 1:
                return name, "".join(rows[0])
            if rows.ndim == 2:
                return name, ["".join(r) for r in rows]
            return name, "".join(chars)
        if mx_class == MX_CELL:
            items = []
            for _ in range(int(np.prod(dims))):
                _, value, pos_ = self.element(pos_)
                items.append(value)
            return name, items
        if mx_class in (MX_STRUCT, MX_OBJECT):
            if mx_class == MX_OBJECT:
                dtype, nbytes, start, pos_ = self.sub(pos_, end)
            dtype, nbytes, start, nxt = self.sub(pos_, end)
            field_len = int(self.numeric(dtype, nbytes, start, pos_)[0])
            pos_ = nxt
            dtype, nbytes, start, nxt = self.sub(pos_, end)
            raw = bytes(self.buf[start : start + nbytes])
            pos_ = nxt
            fields = [
                raw[i : i + field_len].split(b"\0", 1)[0].decode("latin-1")
                for i in range(0, len(raw), field_len)
            ] if field_len else []
            records = []
            for _ in range(int(np.prod(dims))):
                rec = {}
                for f in fields:
                    _, value, pos_ = self.element(pos_)
                    rec[f] = value
                records.append(rec)
            if len(records) == 1:
                return name, records[0]
            return name, records
        if mx_class == MX_SPARSE:
            raise UnsupportedFormatError(f"sparse matrix {name!r} is not supported")
        self._corrupt(f"unknown array class {mx_class}", pos)


def _endianness(header):
    indicator = header[126:128]
    if indicator == b"IM":
        return "<"
    if indicator == b"MI":
        return ">"
    return None


def load_mat_v5(path):
    """Read every top-level variable of a level-5 MAT-file into a dict."""
    with open(path, "rb") as fh:
        buf = fh.read()
    if len(buf) < HEADER_BYTES:
        raise UnsupportedFormatError(f"{path}: too short for a MAT-file header")
    header = buf[:HEADER_BYTES]
    text = header[:116].decode("latin-1", errors="replace")
    if text.startswith("MATLAB 7.3") or buf[512:516] == b"\x89HDF":
        raise UnsupportedFormatError(f"{path}: {V73_HINT}")
    endian = _endianness(header)
    if not text.startswith("MATLAB") or endian is None:
        raise UnsupportedFormatError(f"{path}: not a MATLAB level-5 MAT-file (bad magic bytes)")
    version = struct.unpack_from(endian + "H", header, 124)[0]
    if version != 0x0100:
        raise UnsupportedFormatError(f"{path}: unexpected MAT-file version {version:#x}")

    reader = _Reader(memoryview(buf), endian)
    out = {}
    pos = HEADER_BYTES
    while pos < len(buf):
        name, value, pos = reader.element(pos)
        if name:
            out[name] = value
    return out
