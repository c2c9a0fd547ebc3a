"""Counter-based random number streams.

Every random quantity in this package is a pure function of
``(seed, domain, chunk, offset)``.  Streams are built on the Philox-4x64
counter-based generator keyed as

    key = [seed, (domain << 48) + chunk]

so distinct domains (state sampling, product states, coupling matrices) and
distinct chunks never share raw output.  Within a stream, raw 64-bit words are
addressed by absolute offset, which makes sample generation independent of how
the sample range is partitioned among workers.

Complex standard normals are produced from pairs of raw words by the polar
transform

    u = ((x >> 11) + 1) * 2**-53        in (0, 1]
    v = (y >> 11) * 2**-53              in [0, 1)
    z = sqrt(-ln u) * exp(2j*pi*v)

which gives Re z, Im z independent N(0, 1/2), i.e. E|z|^2 = 1.  Only isotropy
matters for sphere sampling; the scale drops out on normalization.
"""

import numpy as np
from numpy.random import Philox

# Samples per stream chunk.  Fixed forever: changing it changes every stream.
CHUNK = 1024

DOMAIN_CONSTRAINED = 1
DOMAIN_PRODUCT = 2
DOMAIN_COUPLING = 3

_PHILOX_WORDS_PER_STEP = 4  # Philox-4x64 emits 4 words per counter increment
_MAX_DOMAIN = 1 << 16
_MAX_CHUNK = 1 << 48


def _bit_generator(seed, domain, chunk):
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if not 0 <= domain < _MAX_DOMAIN:
        raise ValueError(f"domain tag out of range: {domain}")
    if not 0 <= chunk < _MAX_CHUNK:
        raise ValueError(f"chunk index out of range: {chunk}")
    key = np.array([seed, (domain << 48) + chunk], dtype=np.uint64)
    return Philox(key=key)


def raw_uint64(seed, domain, chunk, count, offset=0):
    """Raw words ``[offset, offset + count)`` of the keyed Philox stream."""
    bg = _bit_generator(seed, domain, chunk)
    skip = offset % _PHILOX_WORDS_PER_STEP
    bg.advance(offset // _PHILOX_WORDS_PER_STEP)
    vals = bg.random_raw(skip + count)
    return vals[skip:]


def complex_normals(seed, domain, chunk, count, offset=0):
    """Complex standard normals at positions ``[offset, offset + count)``.

    Position ``k`` consumes raw words ``2k`` and ``2k + 1`` of its stream, so
    any sub-range of a stream can be regenerated independently.
    """
    raw = raw_uint64(seed, domain, chunk, 2 * count, 2 * offset)
    u = ((raw[0::2] >> np.uint64(11)) + 1) * 2.0**-53
    v = (raw[1::2] >> np.uint64(11)) * 2.0**-53
    return np.sqrt(-np.log(u)) * np.exp(2j * np.pi * v)
