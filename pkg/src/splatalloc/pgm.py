"""Minimal netpbm image I/O.

Reads PGM (P2 ascii, P5 binary) and PPM (P3 ascii, P6 binary) with maxval
up to 255, returning float64 grayscale in [0, 1].  Color images collapse to
luminance with the usual 0.299/0.587/0.114 weights.  Writing covers binary
PGM only, which is all the mask exporter needs.
"""

from __future__ import annotations

import numpy as np

_LUMA = np.array([0.299, 0.587, 0.114])


def _tokens(raw: bytes):
    """Yield whitespace-separated header tokens, skipping # comments."""
    i = 0
    n = len(raw)
    while i < n:
        c = raw[i : i + 1]
        if c in b" \t\r\n":
            i += 1
        elif c == b"#":
            while i < n and raw[i : i + 1] != b"\n":
                i += 1
        else:
            j = i
            while j < n and raw[j : j + 1] not in b" \t\r\n#":
                j += 1
            yield i, raw[i:j]
            i = j


def read_image(path) -> np.ndarray:
    """Load a PGM or PPM file as a float64 grayscale array in [0, 1]."""
    with open(path, "rb") as fh:
        raw = fh.read()
    toks = _tokens(raw)
    try:
        _, magic = next(toks)
    except StopIteration:
        raise ValueError("empty image file") from None
    magic = magic.decode("ascii", "replace")
    if magic not in ("P2", "P5", "P3", "P6"):
        raise ValueError(f"unsupported netpbm magic {magic!r}")
    channels = 3 if magic in ("P3", "P6") else 1
    try:
        _, wtok = next(toks)
        _, htok = next(toks)
        mstart, mtok = next(toks)
    except StopIteration:
        raise ValueError("truncated netpbm header") from None
    width, height, maxval = int(wtok), int(htok), int(mtok)
    if width <= 0 or height <= 0:
        raise ValueError("image dimensions must be positive")
    if not 0 < maxval <= 255:
        raise ValueError(f"maxval {maxval} out of supported range 1..255")
    count = width * height * channels
    if magic in ("P2", "P3"):
        flat = np.array([int(t) for _, t in toks], dtype=np.int64)
        if flat.size != count:
            raise ValueError(f"expected {count} samples, found {flat.size}")
    else:
        # Binary payload starts one whitespace byte after the maxval token.
        offset = mstart + len(mtok) + 1
        flat = np.frombuffer(raw, dtype=np.uint8, count=-1, offset=offset)
        if flat.size < count:
            raise ValueError(f"expected {count} bytes of pixel data, found {flat.size}")
        flat = flat[:count].astype(np.int64)
    if flat.min() < 0 or flat.max() > maxval:
        raise ValueError("sample value exceeds maxval")
    data = flat.astype(np.float64).reshape(height, width * channels) / maxval
    if channels == 3:
        data = data.reshape(height, width, 3) @ _LUMA
    return data


def write_pgm(path, image: np.ndarray) -> None:
    """Write a binary (P5) PGM with maxval 255.

    Accepts uint8 directly or float in [0, 1], which is scaled and rounded.
    """
    arr = np.asarray(image)
    if arr.ndim != 2:
        raise ValueError("PGM output requires a 2-D array")
    if arr.dtype == np.uint8:
        pixels = arr
    else:
        arr = arr.astype(np.float64)
        if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
            raise ValueError("float image values must lie in [0, 1]")
        pixels = np.rint(arr * 255.0).astype(np.uint8)
    h, w = pixels.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(pixels).tobytes())
