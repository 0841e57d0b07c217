"""Image IO (binary PPM and PFM) and bilinear resampling.

Images are float64 arrays of shape ``(H, W, C)`` with C in {1, 3} and nominal
range [0, 1]. Every function returns a fresh array.
"""

import os

import numpy as np

from .validation import FormatError, check_image

def _read_tokens(data, start, count):
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    tokens = []
    pos = start
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] != b"\n":
                pos += 1
            continue
        begin = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if begin == pos:
            raise FormatError("truncated header")
        tokens.append(data[begin:pos])
    return tokens, pos


def _load_ppm(data):
    tokens, pos = _read_tokens(data, 2, 3)
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise FormatError(f"malformed PPM header: {tokens!r}") from exc
    if maxval != 255:
        raise FormatError(f"unsupported PPM max value {maxval}; only 255 is supported")
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise FormatError("malformed PPM header: missing separator before pixel data")
    pos += 1
    size = width * height * 3
    payload = data[pos:pos + size]
    if width <= 0 or height <= 0 or len(payload) != size:
        raise FormatError(f"PPM payload holds {len(payload)} bytes, expected {size}")
    raw = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, 3)
    return raw.astype(np.float64) / 255.0


def _load_pfm(data):
    channels = 3 if data[:2] == b"PF" else 1
    lines = data.split(b"\n", 3)
    if len(lines) < 4:
        raise FormatError("truncated PFM header")
    try:
        width, height = (int(t) for t in lines[1].split())
        scale = float(lines[2].strip())
    except ValueError as exc:
        raise FormatError("malformed PFM header") from exc
    if width <= 0 or height <= 0 or scale == 0.0:
        raise FormatError("malformed PFM header")
    dtype = "<f4" if scale < 0 else ">f4"
    payload = lines[3]
    size = width * height * channels * 4
    if len(payload) != size:
        raise FormatError(f"PFM payload holds {len(payload)} bytes, expected {size}")
    arr = np.frombuffer(payload, dtype=dtype).reshape(height, width, channels)
    # PFM rows run bottom-to-top
    return arr[::-1].astype(np.float64)


def load_image(path):
    """Read a binary PPM (P6, maxval 255) or a PFM file as an ``(H, W, C)`` float array.

    PPM bytes are mapped to ``v / 255``; PFM samples are returned unchanged.
    """
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror}") from exc
    magic = data[:2]
    if magic == b"P6":
        img = _load_ppm(data)
    elif magic in (b"PF", b"Pf"):
        img = _load_pfm(data)
    else:
        raise FormatError(f"{path}: unrecognised magic {magic!r}")
    if img.shape[0] < 2 or img.shape[1] < 2:
        raise FormatError(f"{path}: image is {img.shape[0]}x{img.shape[1]}, minimum is 2x2")
    return img


def quantize_8bit(img):
    """Clamp to [0, 1] and round half up to 8-bit codes."""
    return np.floor(np.clip(img, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def save_image(img, path):
    """Write ``img`` to ``path``; the extension (.ppm or .pfm) selects the format.

    PFM stores float32 little-endian samples, so values already representable
    in float32 round-trip bit for bit.
    """
    img = check_image(img)
    ext = os.path.splitext(str(path))[1].lower()
    h, w, c = img.shape
    if ext == ".ppm":
        if c != 3:
            raise ValueError("P6 output needs a 3-channel image")
        body = quantize_8bit(img).tobytes()
        header = f"P6\n{w} {h}\n255\n".encode("ascii")
    elif ext == ".pfm":
        magic = "PF" if c == 3 else "Pf"
        header = f"{magic}\n{w} {h}\n-1.0\n".encode("ascii")
        body = np.ascontiguousarray(img[::-1], dtype="<f4").tobytes()
    else:
        raise ValueError(f"unsupported extension {ext!r}; use .ppm or .pfm")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(body)


def bilinear_taps(n_in, n_out, dtype=np.float64):
    """Source indices and interpolation weights for half-pixel-centred resampling."""
    scale = n_in / n_out
    src = (np.arange(n_out, dtype=np.float64) + 0.5) * scale - 0.5
    src = np.clip(src, 0.0, n_in - 1)
    lo = np.floor(src).astype(np.intp)
    hi = np.minimum(lo + 1, n_in - 1)
    return lo, hi, (src - lo).astype(dtype)


def resize_last2(arr, new_h, new_w):
    """Bilinear resize over the last two axes with half-pixel centres."""
    h, w = arr.shape[-2:]
    if (h, w) == (new_h, new_w):
        return arr.copy()
    y0, y1, wy = bilinear_taps(h, new_h, arr.dtype)
    x0, x1, wx = bilinear_taps(w, new_w, arr.dtype)
    wy = wy[:, None]
    rows = arr[..., y0, :] * (1 - wy) + arr[..., y1, :] * wy
    return rows[..., x0] * (1 - wx) + rows[..., x1] * wx


def resize_bilinear(img, new_h, new_w):
    """Resize an ``(H, W, C)`` image bilinearly to ``new_h x new_w``."""
    if new_h < 2 or new_w < 2:
        raise ValueError(f"target size {new_h}x{new_w} is degenerate; minimum is 2x2")
    img = check_image(img)
    out = resize_last2(np.moveaxis(img, -1, 0), new_h, new_w)
    return np.ascontiguousarray(np.moveaxis(out, 0, -1))


def pad_to_multiple(arr, multiple, axes=(0, 1)):
    """Edge-replicate pad the bottom/right of ``axes`` up to a multiple of ``multiple``.

    Returns the padded array and the original sizes along ``axes``.
    """
    sizes = tuple(arr.shape[a] for a in axes)
    pad = [(0, 0)] * arr.ndim
    for a, n in zip(axes, sizes):
        pad[a] = (0, (-n) % multiple)
    if all(p == (0, 0) for p in pad):
        return arr, sizes
    return np.pad(arr, pad, mode="edge"), sizes
