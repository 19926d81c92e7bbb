"""Bit-string helpers and the self-delimiting integer code.

Bit strings are plain Python strings over '0'/'1'. The self-delimiting code
for a positive integer N is the doubling (Elias-gamma style) code: b-1 zeros
followed by the b-bit binary expansion of N, where b = bit length of N.
Total cost is 2*b - 1 bits.
"""

from __future__ import annotations


def int_to_bits(value: int, width: int) -> str:
    """Fixed-width big-endian bit string of value (0 <= value < 2**width)."""
    if value < 0 or value >> width:
        raise ValueError(f"value {value} does not fit in {width} bits")
    return format(value, f"0{width}b") if width > 0 else ""


def bits_to_int(bits: str) -> int:
    return int(bits, 2) if bits else 0


def gamma_encode(value: int) -> str:
    """Self-delimiting code of a positive integer."""
    if value < 1:
        raise ValueError("gamma code is defined for integers >= 1")
    body = format(value, "b")
    return "0" * (len(body) - 1) + body


def gamma_length(value: int) -> int:
    return 2 * value.bit_length() - 1


def gamma_decode(bits: str, pos: int) -> tuple[int, int] | None:
    """Decode a gamma code starting at pos.

    Returns (value, next position), or None when the bits are exhausted or
    malformed (zeros run past the end).
    """
    zeros = 0
    i = pos
    while i < len(bits) and bits[i] == "0":
        zeros += 1
        i += 1
    end = i + zeros + 1
    if i >= len(bits) or end > len(bits):
        return None
    return bits_to_int(bits[i:end]), end


def bits_to_hex(bits: str) -> str:
    """Hex rendering with explicit bit length, '<len>:<hex>'."""
    if not bits:
        return "0:"
    width = (len(bits) + 3) // 4
    return f"{len(bits)}:{bits_to_int(bits):0{width}x}"


def hex_to_bits(text: str) -> str:
    """Inverse of bits_to_hex."""
    length_part, _, hex_part = text.partition(":")
    length = int(length_part)
    if length == 0:
        if hex_part:
            raise ValueError(f"length 0 with nonempty payload: {text!r}")
        return ""
    value = int(hex_part, 16)
    if value >> length:
        raise ValueError(f"payload exceeds declared length: {text!r}")
    return int_to_bits(value, length)


def ceil_log2(numerator: int, denominator: int = 1) -> int:
    """Smallest integer e with 2**e >= numerator/denominator (ratio >= 1)."""
    if numerator <= 0 or denominator <= 0:
        raise ValueError("ceil_log2 requires a positive ratio")
    if numerator < denominator:
        raise ValueError("ceil_log2 requires ratio >= 1")
    e = 0
    while (denominator << e) < numerator:
        e += 1
    return e


def next_pow2(value: int) -> int:
    """Smallest power of two >= value."""
    if value < 1:
        raise ValueError("next_pow2 requires value >= 1")
    return 1 << (value - 1).bit_length()
