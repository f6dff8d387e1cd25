from decimal import ROUND_HALF_EVEN, Decimal


def fmt_float(x: float, places: int = 6) -> str:
    """Fixed-point text, round-half-even on the shortest repr, never "-0"."""
    d = Decimal(repr(float(x))).quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_EVEN)
    if d.is_zero():
        d = abs(d)
    return f"{d:f}"
