"""Finite descriptions of second-layer boundary conditions.

A boundary condition for a window [l, r] is an explicit annulus word on each
side plus a tail pattern beyond it::

    ... left tail | left annulus | window [l, r] | right annulus | right tail ...

Text form (tokens separated by whitespace, any order)::

    tailL=<empty|ones|per:WORD> annulus=<bits> window=[l,r] annulusR=<bits> tailR=<empty|ones|per:WORD>

``window`` and both tails are required; the annuli default to empty. A left
periodic tail is aligned so that its word ends at L-1; a right periodic tail
starts with its word at R+1.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import BoundaryError, DomainError

_BITS = re.compile(r"[01]*")


class TailKind(enum.Enum):
    ALL_EMPTY = "empty"
    ALL_ONES = "ones"
    PERIODIC = "per"


@dataclass(frozen=True)
class TailPattern:
    kind: TailKind
    word: str = ""

    def __post_init__(self):
        if self.kind is TailKind.PERIODIC:
            w = self.word
            if not w or not _BITS.fullmatch(w):
                raise BoundaryError(f"periodic tail needs a non-empty bit word, got {w!r}")
            if "1" not in w:
                object.__setattr__(self, "kind", TailKind.ALL_EMPTY)
                object.__setattr__(self, "word", "")
                return
            if "0" not in w:
                object.__setattr__(self, "kind", TailKind.ALL_ONES)
                object.__setattr__(self, "word", "")
                return
            tripled = w * 3
            q = len(w)
            for i in range(q, 2 * q):
                if tripled[i] == "1" and tripled[i - 1] == "0" and tripled[i + 1] == "0":
                    raise BoundaryError(f"periodic tail {w!r} repeats into an isolated occupied site")
        elif self.word:
            raise BoundaryError(f"{self.kind.value} tail takes no word")

    @classmethod
    def empty(cls) -> "TailPattern":
        return cls(TailKind.ALL_EMPTY)

    @classmethod
    def ones(cls) -> "TailPattern":
        return cls(TailKind.ALL_ONES)

    @classmethod
    def periodic(cls, word: str) -> "TailPattern":
        return cls(TailKind.PERIODIC, word)

    @property
    def period(self) -> int:
        return len(self.word) if self.kind is TailKind.PERIODIC else 1

    def left_block(self, n: int) -> str:
        """The n tail sites immediately left of the annulus, in reading order."""
        if n <= 0:
            return ""
        if self.kind is TailKind.ALL_EMPTY:
            return "0" * n
        if self.kind is TailKind.ALL_ONES:
            return "1" * n
        q = len(self.word)
        reps = n // q + 1
        return (self.word * reps)[-n:]

    def right_block(self, n: int) -> str:
        """The n tail sites immediately right of the annulus."""
        if n <= 0:
            return ""
        if self.kind is TailKind.ALL_EMPTY:
            return "0" * n
        if self.kind is TailKind.ALL_ONES:
            return "1" * n
        q = len(self.word)
        return (self.word * (n // q + 1))[:n]

    def padding(self) -> int:
        """Tail sites to materialize so that every tail feature near the annulus is visible."""
        return 2 * self.period + 3

    def text(self) -> str:
        if self.kind is TailKind.PERIODIC:
            return f"per:{self.word}"
        return self.kind.value


@dataclass(frozen=True)
class BoundaryCondition:
    window: Tuple[int, int]
    left_annulus: str = ""
    right_annulus: str = ""
    left_tail: TailPattern = field(default_factory=TailPattern.ones)
    right_tail: TailPattern = field(default_factory=TailPattern.ones)

    def __post_init__(self):
        l, r = (int(v) for v in self.window)
        if l > r:
            raise BoundaryError(f"window [{l},{r}] is empty")
        object.__setattr__(self, "window", (l, r))
        for w in (self.left_annulus, self.right_annulus):
            if not _BITS.fullmatch(w):
                raise BoundaryError(f"annulus must be a bit word, got {w!r}")

    @property
    def l(self) -> int:
        return self.window[0]

    @property
    def r(self) -> int:
        return self.window[1]

    @property
    def size(self) -> int:
        return self.r - self.l + 1

    @property
    def L(self) -> int:
        return self.l - len(self.left_annulus)

    @property
    def R(self) -> int:
        return self.r + len(self.right_annulus)

    def spin_at(self, x: int) -> int:
        """Boundary spin at a site outside the window."""
        l, r, L, R = self.l, self.r, self.L, self.R
        if l <= x <= r:
            raise DomainError(f"site {x} lies inside the window")
        if L <= x < l:
            return int(self.left_annulus[x - L])
        if r < x <= R:
            return int(self.right_annulus[x - r - 1])
        if x < L:
            t = self.left_tail
            if t.kind is TailKind.PERIODIC:
                return int(t.word[(x - L) % t.period])
            return 1 if t.kind is TailKind.ALL_ONES else 0
        t = self.right_tail
        if t.kind is TailKind.PERIODIC:
            return int(t.word[(x - R - 1) % t.period])
        return 1 if t.kind is TailKind.ALL_ONES else 0

    def region(self) -> Tuple[int, int]:
        """Inclusive site range covered by :meth:`materialize`."""
        return self.L - self.left_tail.padding(), self.R + self.right_tail.padding()

    def materialize(self, interior: Optional[str] = None) -> Tuple[int, np.ndarray]:
        """Explicit spins on :meth:`region`; the window holds ``interior`` (default all empty).

        Returns the first site index and a uint8 array.
        """
        lo, hi = self.region()
        pl = self.L - lo
        pr = hi - self.R
        if interior is None:
            interior = "0" * self.size
        if len(interior) != self.size or not _BITS.fullmatch(interior):
            raise DomainError(f"interior word must have {self.size} bits, got {interior!r}")
        text = (
            self.left_tail.left_block(pl)
            + self.left_annulus
            + interior
            + self.right_annulus
            + self.right_tail.right_block(pr)
        )
        return lo, np.frombuffer(text.encode(), dtype=np.uint8) - ord("0")

    def validate(self) -> None:
        """Reject boundaries that force an isolated occupied site away from the window."""
        lo, spins = self.materialize()
        l, r = self.l, self.r
        for k in range(1, len(spins) - 1):
            x = lo + k
            if l - 1 <= x <= r + 1:
                continue
            if spins[k] == 1 and spins[k - 1] == 0 and spins[k + 1] == 0:
                raise BoundaryError(f"boundary forces an isolated occupied site at {x}")

    def text(self) -> str:
        return format_boundary(self)

    def __str__(self) -> str:
        return format_boundary(self)


def format_boundary(bc: BoundaryCondition) -> str:
    return (
        f"tailL={bc.left_tail.text()} annulus={bc.left_annulus} "
        f"window=[{bc.l},{bc.r}] annulusR={bc.right_annulus} tailR={bc.right_tail.text()}"
    )


class BoundaryParseError(BoundaryError):
    """Parse failure carrying the offending column for a caret diagnostic."""

    def __init__(self, message: str, text: str, position: int):
        super().__init__(message)
        self.message = message
        self.text = text
        self.position = position

    def render(self) -> str:
        return f"{self.text}\n{' ' * self.position}^\nerror: {self.message} (column {self.position + 1})"


_TOKEN = re.compile(r"\S+")
_WINDOW = re.compile(r"\[\s*(-?\d+)\s*,\s*(-?\d+)\s*\]")
_KEYS = ("tailL", "annulus", "window", "annulusR", "tailR")


def _parse_tail(value: str, text: str, pos: int) -> TailPattern:
    if value == "empty":
        return TailPattern.empty()
    if value == "ones":
        return TailPattern.ones()
    if value.startswith("per:"):
        word = value[4:]
        bad = next((i for i, c in enumerate(word) if c not in "01"), None)
        if not word:
            raise BoundaryParseError("periodic tail needs a word after 'per:'", text, pos + 4)
        if bad is not None:
            raise BoundaryParseError(f"unexpected character {word[bad]!r} in periodic word", text, pos + 4 + bad)
        try:
            return TailPattern.periodic(word)
        except BoundaryError as exc:
            raise BoundaryParseError(str(exc), text, pos + 4) from None
    raise BoundaryParseError(f"tail must be 'empty', 'ones' or 'per:WORD', got {value!r}", text, pos)


def parse_boundary(text: str) -> BoundaryCondition:
    # the window token may contain spaces, so collapse "[ a , b ]" first
    found = {}
    i = 0
    n = len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        start = i
        eq = text.find("=", i)
        m = _TOKEN.match(text, i)
        token_end = m.end()
        if eq == -1 or eq > token_end:
            raise BoundaryParseError("expected key=value", text, start)
        key = text[start:eq]
        if key not in _KEYS:
            raise BoundaryParseError(f"unknown key {key!r}; expected one of {', '.join(_KEYS)}", text, start)
        if key in found:
            raise BoundaryParseError(f"duplicate key {key!r}", text, start)
        vpos = eq + 1
        if key == "window":
            wm = _WINDOW.match(text, vpos)
            if not wm:
                raise BoundaryParseError("window must look like [l,r]", text, vpos)
            found[key] = ((int(wm.group(1)), int(wm.group(2))), vpos)
            i = wm.end()
            if i < n and not text[i].isspace():
                raise BoundaryParseError("unexpected text after window", text, i)
            continue
        vm = re.compile(r"[^\s]*").match(text, vpos)
        value = vm.group(0)
        i = vm.end()
        if key in ("annulus", "annulusR"):
            bad = next((k for k, c in enumerate(value) if c not in "01"), None)
            if bad is not None:
                raise BoundaryParseError(f"annulus must be bits, found {value[bad]!r}", text, vpos + bad)
            found[key] = (value, vpos)
        else:
            found[key] = (_parse_tail(value, text, vpos), vpos)
    for key in ("tailL", "window", "tailR"):
        if key not in found:
            raise BoundaryParseError(f"missing required key {key!r}", text, len(text))
    (l, r), wpos = found["window"]
    if l > r:
        raise BoundaryParseError(f"window [{l},{r}] is empty", text, wpos)
    bc = BoundaryCondition(
        window=(l, r),
        left_annulus=found.get("annulus", ("", 0))[0],
        right_annulus=found.get("annulusR", ("", 0))[0],
        left_tail=found["tailL"][0],
        right_tail=found["tailR"][0],
    )
    try:
        bc.validate()
    except BoundaryError as exc:
        raise BoundaryParseError(str(exc), text, 0) from None
    return bc


def boundary_from_spins(window: Tuple[int, int], left: Sequence[int], right: Sequence[int],
                        left_tail: TailPattern, right_tail: TailPattern) -> BoundaryCondition:
    """Build a boundary from integer spin sequences."""
    return BoundaryCondition(
        window=window,
        left_annulus="".join(str(int(s)) for s in left),
        right_annulus="".join(str(int(s)) for s in right),
        left_tail=left_tail,
        right_tail=right_tail,
    )
