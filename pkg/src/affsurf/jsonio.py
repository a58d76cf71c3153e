"""Strict helpers for the JSON interchange formats.

Every format in this package writes complex numbers as [re, im] pairs and
rejects unknown fields, so parse errors surface at load time instead of as
mystery NaNs later.
"""

from __future__ import annotations


def as_complex(value, where):
    """Read a [re, im] pair (ints or floats) as a complex number."""
    if (not isinstance(value, (list, tuple)) or len(value) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool)
                       for x in value)):
        raise ValueError(f"{where}: expected [re, im], got {value!r}")
    return complex(value[0], value[1])


def pair(z):
    z = complex(z)
    return [z.real, z.imag]


def check_fields(obj, where, required, optional=()):
    """Require a dict with exactly the given keys (optional ones may be absent)."""
    if not isinstance(obj, dict):
        raise ValueError(f"{where}: expected an object, got {type(obj).__name__}")
    missing = [k for k in required if k not in obj]
    if missing:
        raise ValueError(f"{where}: missing field(s) {missing}")
    unknown = [k for k in obj if k not in required and k not in optional]
    if unknown:
        raise ValueError(f"{where}: unknown field(s) {unknown}")
