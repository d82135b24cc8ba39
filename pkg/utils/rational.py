from decimal import Decimal, ROUND_HALF_EVEN, localcontext
from fractions import Fraction
from app.core.config import settings


def parse_rational(text) -> Fraction:
    """Exact value of ``p/q``, an integer or a decimal literal (0.32 -> 8/25)."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, bool):
        raise ValueError(f'{text!r} is not a rational number')
    if isinstance(text, int):
        return Fraction(text)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f'{text!r} is not a rational number') from exc


def format_rational(value: Fraction) -> str:
    return str(Fraction(value))


def format_decimal(value: Fraction, places: int = None) -> str:
    places = settings.DECIMAL_PLACES if places is None else places
    value = Fraction(value)
    with localcontext() as ctx:
        ctx.prec = 60
        quotient = Decimal(value.numerator) / Decimal(value.denominator)
        return str(quotient.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_EVEN))
