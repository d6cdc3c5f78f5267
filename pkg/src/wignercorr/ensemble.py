"""Entry-moment sequences for Wigner ensembles."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path

from .errors import MissingMoment

PRESETS = ("rademacher", "gaussian", "uniform", "two_point", "custom")


def double_factorial(m: int) -> int:
    """``m!!`` for odd ``m >= -1``."""
    out = 1
    while m > 1:
        out *= m
        m -= 2
    return out


@dataclass(frozen=True)
class EnsembleSpec:
    """Matrix order plus the even moments ``v_2, v_4, ...`` of the entries.

    Presets compute moments on demand, so they are defined for every ``j``.
    A ``custom`` ensemble only knows the moments it was given.
    """

    preset_name: str = "custom"
    param: Fraction = Fraction(1)
    moments: tuple[Fraction, ...] = ()
    n: int | None = None
    diagonal_second_moment: Fraction = Fraction(0)

    def __post_init__(self):
        if self.preset_name not in PRESETS:
            raise ValueError(f"unknown preset {self.preset_name!r}")
        object.__setattr__(self, "param", Fraction(self.param))
        object.__setattr__(self, "moments", tuple(Fraction(m) for m in self.moments))
        object.__setattr__(self, "diagonal_second_moment", Fraction(self.diagonal_second_moment))
        if self.preset_name == "custom" and not self.moments:
            raise ValueError("custom ensemble needs at least v2")
        if self.v(1) <= 0:
            raise ValueError("v2 must be positive")

    # presets
    @classmethod
    def rademacher(cls, n=None, **kw) -> "EnsembleSpec":
        return cls("rademacher", Fraction(1), n=n, **kw)

    @classmethod
    def gaussian(cls, v2=1, n=None, **kw) -> "EnsembleSpec":
        return cls("gaussian", Fraction(v2), n=n, **kw)

    @classmethod
    def uniform(cls, a=1, n=None, **kw) -> "EnsembleSpec":
        """Entries uniform on ``[-a, a]``."""
        return cls("uniform", Fraction(a), n=n, **kw)

    @classmethod
    def two_point(cls, c=1, n=None, **kw) -> "EnsembleSpec":
        """Entries ``+c`` or ``-c`` with equal probability."""
        return cls("two_point", Fraction(c), n=n, **kw)

    @classmethod
    def custom(cls, moments, n=None, **kw) -> "EnsembleSpec":
        """``moments[0]`` is ``v_2``, ``moments[1]`` is ``v_4`` and so on."""
        return cls("custom", Fraction(1), tuple(moments), n=n, **kw)

    @classmethod
    def from_name(cls, name: str, n=None) -> "EnsembleSpec":
        """Parse ``rademacher``, ``gaussian``, ``gaussian:2``, ``uniform:1``,
        ``two_point:3/2`` or ``custom:1,3,15``."""
        head, _, arg = name.partition(":")
        if head == "custom":
            return cls.custom([Fraction(x) for x in arg.split(",")], n=n)
        if head == "rademacher":
            return cls.rademacher(n=n)
        if head not in PRESETS:
            raise ValueError(f"unknown ensemble {name!r}")
        return cls(head, Fraction(arg) if arg else Fraction(1), n=n)

    @classmethod
    def from_file(cls, path, n=None) -> "EnsembleSpec":
        """Load ``{"preset": ..., "param": ...}`` or ``{"moments": [...]}``."""
        data = json.loads(Path(path).read_text())
        n = data.get("n", n)
        s2 = Fraction(str(data.get("diagonal_second_moment", 0)))
        if "moments" in data:
            return cls.custom([Fraction(str(m)) for m in data["moments"]], n=n, diagonal_second_moment=s2)
        return cls(data["preset"], Fraction(str(data.get("param", 1))), n=n, diagonal_second_moment=s2)

    def with_n(self, n: int) -> "EnsembleSpec":
        return replace(self, n=n)

    @property
    def v2(self) -> Fraction:
        return self.v(1)

    def v(self, j: int) -> Fraction:
        """The moment ``v_{2j}``."""
        if j < 1:
            raise ValueError("moment index starts at 1 (v2)")
        p = self.param
        if self.preset_name == "rademacher":
            return Fraction(1)
        if self.preset_name == "two_point":
            return p ** (2 * j)
        if self.preset_name == "gaussian":
            return double_factorial(2 * j - 1) * p**j
        if self.preset_name == "uniform":
            return p ** (2 * j) / (2 * j + 1)
        if j > len(self.moments):
            raise MissingMoment(f"ensemble does not define v{2 * j}")
        return self.moments[j - 1]

    def standardized(self, j: int) -> Fraction:
        """``v_{2j} / v_2^j``."""
        return self.v(j) / self.v2**j

    def max_index(self) -> int | float:
        return len(self.moments) if self.preset_name == "custom" else math.inf

    def label(self) -> str:
        if self.preset_name == "rademacher":
            return "rademacher"
        if self.preset_name == "custom":
            return "custom:" + ",".join(str(m) for m in self.moments)
        return f"{self.preset_name}:{self.param}"
