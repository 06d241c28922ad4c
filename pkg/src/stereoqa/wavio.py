"""Minimal RIFF/WAVE reader and writer.

Supports the subset of the format needed here: little-endian PCM at
16 or 24 bit integer and 32 bit IEEE float, mono or stereo, mandatory
``fmt `` and ``data`` chunks.  Unknown chunks are skipped on read.
Integer samples are normalized by the full-scale magnitude (2^(bits-1)),
so e.g. the most positive 16-bit sample maps to 32767/32768.
"""

from __future__ import annotations

import struct
import warnings

import numpy as np

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_IEEE_FLOAT = 0x0003
WAVE_FORMAT_EXTENSIBLE = 0xFFFE


class WavFormatError(ValueError):
    """Unsupported codec, bit depth, or channel layout."""


class WavParseError(ValueError):
    """Structurally broken or truncated RIFF file."""


def read_wav(path):
    """Read a WAV file.

    Returns (samples, sample_rate) where samples is a float64 array of
    shape (channels, n) with values nominally in [-1, 1].
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 12 or raw[0:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise WavParseError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(raw):
        cid = raw[pos:pos + 4]
        (size,) = struct.unpack_from("<I", raw, pos + 4)
        body = raw[pos + 8:pos + 8 + size]
        if len(body) < size and cid in (b"fmt ", b"data"):
            raise WavParseError(f"{path}: truncated {cid.decode()!r} chunk")
        if cid == b"fmt ":
            fmt = body
        elif cid == b"data":
            data = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned

    if fmt is None or data is None:
        raise WavParseError(f"{path}: missing fmt/data chunk")
    if len(fmt) < 16:
        raise WavParseError(f"{path}: short fmt chunk")

    tag, n_channels, rate, _, block_align, bits = struct.unpack_from("<HHIIHH", fmt, 0)
    if tag == WAVE_FORMAT_EXTENSIBLE and len(fmt) >= 40:
        (tag,) = struct.unpack_from("<H", fmt, 24)  # first bytes of SubFormat GUID
    if n_channels not in (1, 2):
        raise WavFormatError(f"{path}: {n_channels} channels unsupported")

    if tag == WAVE_FORMAT_PCM and bits == 16:
        flat = np.frombuffer(data[:len(data) - len(data) % 2], dtype="<i2").astype(np.float64)
        flat /= 2 ** 15
    elif tag == WAVE_FORMAT_PCM and bits == 24:
        usable = len(data) - len(data) % 3
        b = np.frombuffer(data[:usable], dtype=np.uint8).reshape(-1, 3)
        vals = (b[:, 0].astype(np.int32)
                | (b[:, 1].astype(np.int32) << 8)
                | (b[:, 2].astype(np.int32) << 16))
        vals = np.where(vals >= 2 ** 23, vals - 2 ** 24, vals)
        flat = vals.astype(np.float64) / 2 ** 23
    elif tag == WAVE_FORMAT_IEEE_FLOAT and bits == 32:
        flat = np.frombuffer(data[:len(data) - len(data) % 4], dtype="<f4").astype(np.float64)
    else:
        raise WavFormatError(f"{path}: format tag {tag} at {bits} bit unsupported")

    n_frames = flat.size // n_channels
    samples = flat[:n_frames * n_channels].reshape(n_frames, n_channels).T.copy()
    return samples, int(rate)


def write_wav(path, samples, sample_rate, bit_depth=24):
    """Write float samples of shape (channels, n) as a WAV file.

    bit_depth is 16, 24, or "32f".  Values outside [-1, 1] are clipped
    with a warning.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    n_channels, n = samples.shape
    if n_channels not in (1, 2):
        raise WavFormatError(f"{n_channels} channels unsupported")

    n_clipped = int(np.sum(np.abs(samples) > 1.0))
    if n_clipped:
        warnings.warn(f"{path}: clipped {n_clipped} samples to [-1, 1]", stacklevel=2)
        samples = np.clip(samples, -1.0, 1.0)

    interleaved = samples.T.reshape(-1)
    if bit_depth == 16:
        tag, bits = WAVE_FORMAT_PCM, 16
        ints = np.clip(np.round(interleaved * 2 ** 15), -2 ** 15, 2 ** 15 - 1)
        payload = ints.astype("<i2").tobytes()
    elif bit_depth == 24:
        tag, bits = WAVE_FORMAT_PCM, 24
        ints = np.clip(np.round(interleaved * 2 ** 23), -2 ** 23, 2 ** 23 - 1).astype(np.int64)
        ints = np.where(ints < 0, ints + 2 ** 24, ints).astype(np.uint32)
        b = np.empty((ints.size, 3), dtype=np.uint8)
        b[:, 0] = ints & 0xFF
        b[:, 1] = (ints >> 8) & 0xFF
        b[:, 2] = (ints >> 16) & 0xFF
        payload = b.tobytes()
    elif bit_depth in ("32f", "f32", 32.0):
        tag, bits = WAVE_FORMAT_IEEE_FLOAT, 32
        payload = interleaved.astype("<f4").tobytes()
    else:
        raise WavFormatError(f"bit depth {bit_depth!r} unsupported (use 16, 24, or '32f')")

    block_align = n_channels * bits // 8
    byte_rate = sample_rate * block_align
    fmt_chunk = struct.pack("<HHIIHH", tag, n_channels, sample_rate, byte_rate, block_align, bits)
    pad = b"\x00" if len(payload) & 1 else b""
    riff_size = 4 + (8 + len(fmt_chunk)) + (8 + len(payload) + len(pad))

    with open(path, "wb") as fh:
        fh.write(b"RIFF" + struct.pack("<I", riff_size) + b"WAVE")
        fh.write(b"fmt " + struct.pack("<I", len(fmt_chunk)) + fmt_chunk)
        fh.write(b"data" + struct.pack("<I", len(payload)) + payload + pad)
