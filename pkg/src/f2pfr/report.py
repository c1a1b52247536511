"""Check results and canonical JSON encoding of exact values."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from .gf2core import F2Set, F2Vector, SpanBasis

PASS = "pass"
FAIL = "fail"
NOT_ASSERTED = "not_asserted"

# sets larger than this are summarized without listing elements
MAX_LISTED_ELEMENTS = 4096

DECIMAL_DIGITS = 12


@dataclass
class CheckResult:
    name: str
    status: str
    values: dict[str, Any] = field(default_factory=dict)
    detail: str = ""
    witness: Any = None

    @property
    def passed(self) -> bool:
        return self.status == PASS

    @property
    def failed(self) -> bool:
        return self.status == FAIL

    @classmethod
    def of(cls, name: str, ok: bool, detail: str = "", witness: Any = None, **values: Any) -> "CheckResult":
        return cls(name, PASS if ok else FAIL, values, detail, witness)


def decimal(x: Fraction, digits: int = DECIMAL_DIGITS) -> str:
    """Fixed significant-digit rendering, deterministic across platforms."""
    if x == 0:
        return "0"
    sign = "-" if x < 0 else ""
    x = abs(x)
    exp = len(str(x.numerator)) - len(str(x.denominator))
    if Fraction(10) ** exp > x:
        exp -= 1
    scaled = x / Fraction(10) ** (exp - digits + 1)
    mant = int(scaled + Fraction(1, 2))
    if mant >= 10 ** digits:
        mant //= 10
        exp += 1
    text = str(mant)
    if -6 <= exp < digits:
        if exp >= 0:
            whole, frac = text[: exp + 1], text[exp + 1:]
        else:
            whole, frac = "0", "0" * (-exp - 1) + text
        frac = frac.rstrip("0")
        return sign + whole + ("." + frac if frac else "")
    frac = text[1:].rstrip("0")
    return f"{sign}{text[0]}{'.' + frac if frac else ''}e{exp:+d}"


def rational_json(x: Fraction) -> dict[str, Any]:
    x = Fraction(x)
    return {"num": x.numerator, "den": x.denominator, "decimal": decimal(x)}


def set_json(A: F2Set) -> dict[str, Any]:
    from .setfile import set_digest

    out: dict[str, Any] = {"dim": A.dim, "size": len(A), "sha256": set_digest(A)}
    if len(A) <= MAX_LISTED_ELEMENTS:
        out["elements"] = [str(v) for v in A]
    return out


def to_jsonable(obj: Any) -> Any:
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, int)):
        return obj
    if isinstance(obj, Fraction):
        return rational_json(obj)
    if isinstance(obj, F2Set):
        return set_json(obj)
    if isinstance(obj, F2Vector):
        return str(obj)
    if isinstance(obj, SpanBasis):
        return {"dim": obj.dim, "rank": obj.rank, "rows": [str(r) for r in obj.rows]}
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, float):
        return obj
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if dataclasses.is_dataclass(obj):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True, ensure_ascii=False) + "\n"
