"""
Dempster-Shafer machinery over finite frames.

Subsets of a frame are encoded as integer bitmasks: bit ``i`` is set when the
``i``-th label of the frame belongs to the subset, ``0`` is the empty set and
``frame.full`` (``2**M - 1``) is the whole frame. Mass functions store only
their focal sets, so most operations never touch the full power set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache, reduce
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    AllConflict,
    AlphaOutOfRange,
    DogmaticMass,
    EmptyCandidates,
    EmptyFocal,
    EmptyInput,
    FrameMismatch,
    FullFrameFocal,
    InvalidMass,
    NonSeparable,
    TotalConflict,
)

MAX_FRAME_SIZE = 20
NORMALIZATION_TOL = 1e-9
TOTAL_CONFLICT_TOL = 1e-12
TIE_TOL = 1e-12
_RESERVED = ("|", ";", ":")


@dataclass(frozen=True)
class Frame:
    """Ordered set of mutually exclusive answer labels."""

    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if not 1 <= len(labels) <= MAX_FRAME_SIZE:
            raise ValueError(f"frame size must be in [1, {MAX_FRAME_SIZE}], got {len(labels)}")
        if len(set(labels)) != len(labels):
            raise ValueError(f"frame labels must be unique: {labels}")
        for lab in labels:
            if not isinstance(lab, str) or not lab:
                raise ValueError(f"frame labels must be non-empty strings, got {lab!r}")
            if lab == "*" or any(ch in lab for ch in _RESERVED):
                raise ValueError(f"label {lab!r} uses a reserved character")
        object.__setattr__(self, "_index", {lab: i for i, lab in enumerate(labels)})

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self) -> Iterator[str]:
        return iter(self.labels)

    def __contains__(self, label) -> bool:
        return label in self._index

    @property
    def full(self) -> int:
        return (1 << len(self.labels)) - 1

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise ValueError(f"label {label!r} not in frame {self.labels}") from None

    def subset(self, labels: Iterable[str]) -> int:
        """Bitmask of a collection of labels."""
        if isinstance(labels, str):
            labels = (labels,)
        mask = 0
        for lab in labels:
            mask |= 1 << self.index(lab)
        return mask

    def singleton(self, label: str) -> int:
        return 1 << self.index(label)

    def labels_of(self, mask: int) -> tuple[str, ...]:
        return tuple(lab for i, lab in enumerate(self.labels) if mask >> i & 1)

    def check_subset(self, mask: int) -> None:
        if not 0 <= mask <= self.full:
            raise ValueError(f"subset index {mask} out of range for frame of size {len(self)}")


def cardinality(mask: int) -> int:
    return mask.bit_count() if hasattr(mask, "bit_count") else bin(mask).count("1")


@lru_cache(maxsize=1 << 16)
def jaccard(x: int, y: int) -> float:
    """Entry of the Jaccard matrix between two subsets."""
    if x == 0 and y == 0:
        return 1.0
    union = x | y
    return cardinality(x & y) / cardinality(union)


class MassFunction:
    """Normalized mass assignment over subsets of a :class:`Frame`.

    Mass on the empty set is allowed (it is the conflict produced by the
    unnormalized conjunctive rule). Instances are immutable.
    """

    __slots__ = ("_frame", "_masses")

    def __init__(self, frame: Frame, masses: Mapping[int, float]):
        clean: dict[int, float] = {}
        for x, v in masses.items():
            x = int(x)
            frame.check_subset(x)
            v = float(v)
            if not math.isfinite(v):
                raise InvalidMass(f"non-finite mass {v} on subset {x}")
            if v < 0:
                if v < -NORMALIZATION_TOL:
                    raise InvalidMass(f"negative mass {v} on subset {x}")
                continue
            if v > 0:
                clean[x] = clean.get(x, 0.0) + v
        total = math.fsum(clean.values())
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise InvalidMass(f"masses sum to {total!r}, expected 1")
        self._frame = frame
        self._masses = MappingProxyType(dict(sorted(clean.items())))

    # construction helpers -------------------------------------------------

    @classmethod
    def from_labels(cls, frame: Frame, masses: Mapping) -> "MassFunction":
        """Build from ``{labels: mass}``; ``"*"`` stands for the whole frame.

        >>> f = Frame(("a", "b", "c"))
        >>> MassFunction.from_labels(f, {("a", "b"): 0.6, "*": 0.4}).to_text()
        'a|b:0.6;*:0.4'
        """
        out: dict[int, float] = {}
        for key, v in masses.items():
            if key == "*":
                x = frame.full
            elif isinstance(key, str):
                x = frame.singleton(key)
            else:
                x = frame.subset(key)
            out[x] = out.get(x, 0.0) + v
        return cls(frame, out)

    @classmethod
    def vacuous(cls, frame: Frame) -> "MassFunction":
        return cls(frame, {frame.full: 1.0})

    @classmethod
    def from_vector(cls, frame: Frame, vec: np.ndarray) -> "MassFunction":
        return cls(frame, {i: v for i, v in enumerate(vec) if v != 0.0})

    # accessors ------------------------------------------------------------

    @property
    def frame(self) -> Frame:
        return self._frame

    @property
    def masses(self) -> Mapping[int, float]:
        return self._masses

    def __getitem__(self, x: int) -> float:
        return self._masses.get(x, 0.0)

    def items(self):
        return self._masses.items()

    @property
    def focal_sets(self) -> tuple[int, ...]:
        return tuple(self._masses)

    @property
    def conflict(self) -> float:
        return self._masses.get(0, 0.0)

    @property
    def is_dogmatic(self) -> bool:
        return self[self._frame.full] <= 0.0

    @property
    def is_vacuous(self) -> bool:
        return set(self._masses) == {self._frame.full}

    @property
    def is_bayesian(self) -> bool:
        return all(cardinality(x) == 1 for x in self._masses)

    @property
    def is_simple_support(self) -> bool:
        return len(set(self._masses) - {self._frame.full}) <= 1

    def vector(self) -> np.ndarray:
        """Dense vector indexed by subset bitmask (length ``2**M``)."""
        vec = np.zeros(1 << len(self._frame))
        for x, v in self._masses.items():
            vec[x] = v
        return vec

    # comparison / display -------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, MassFunction):
            return NotImplemented
        return self._frame == other._frame and dict(self._masses) == dict(other._masses)

    def __hash__(self):
        return hash((self._frame, tuple(self._masses.items())))

    def isclose(self, other: "MassFunction", tol: float = 1e-10) -> bool:
        if self._frame != other._frame:
            return False
        keys = set(self._masses) | set(other._masses)
        return all(abs(self[k] - other[k]) <= tol for k in keys)

    def to_text(self) -> str:
        """Canonical text form, e.g. ``crow|raven:0.7;*:0.3``."""
        parts = []
        for x, v in self._masses.items():
            if x == self._frame.full:
                name = "*"
            elif x == 0:
                name = "{}"
            else:
                name = "|".join(self._frame.labels_of(x))
            parts.append(f"{name}:{v:.12g}")
        return ";".join(parts)

    @classmethod
    def from_text(cls, frame: Frame, text: str) -> "MassFunction":
        out: dict[int, float] = {}
        for part in text.split(";"):
            name, _, value = part.rpartition(":")
            if name == "*":
                x = frame.full
            elif name == "{}":
                x = 0
            else:
                x = frame.subset(name.split("|"))
            out[x] = out.get(x, 0.0) + float(value)
        return cls(frame, out)

    def __repr__(self) -> str:
        return f"MassFunction({self.to_text()!r})"


@dataclass(frozen=True)
class SimpleSupport:
    """Simple support mass: ``support`` on ``focal``, the rest on the frame."""

    frame: Frame
    focal: int
    support: float

    def __post_init__(self):
        if self.focal == 0:
            raise EmptyFocal("simple support focal set must be non-empty")
        if self.focal == self.frame.full:
            raise FullFrameFocal("simple support focal set must be a proper subset")
        self.frame.check_subset(self.focal)
        if not 0.0 <= self.support <= 1.0:
            raise AlphaOutOfRange(f"support must lie in [0, 1], got {self.support}")

    def mass(self) -> MassFunction:
        return MassFunction(self.frame, {self.focal: self.support, self.frame.full: 1.0 - self.support})


# constructors -------------------------------------------------------------


def make_categorical(frame: Frame, x: int) -> MassFunction:
    if x == 0:
        raise EmptyFocal("categorical mass needs a non-empty focal set")
    return MassFunction(frame, {x: 1.0})


def make_simple_support(frame: Frame, x: int, omega: float) -> MassFunction:
    return SimpleSupport(frame, x, omega).mass()


def discount(m: MassFunction, alpha: float) -> MassFunction:
    """Shift a fraction ``1 - alpha`` of every focal mass onto the frame."""
    if not 0.0 <= alpha <= 1.0:
        raise AlphaOutOfRange(f"discount coefficient must lie in [0, 1], got {alpha}")
    if alpha == 1.0:
        return m
    full = m.frame.full
    out = {x: alpha * v for x, v in m.items() if x != full}
    out[full] = 1.0 - alpha * (1.0 - m[full])
    return MassFunction(m.frame, out)


# distance -----------------------------------------------------------------


def _common_frame(ms: Sequence[MassFunction]) -> Frame:
    if not ms:
        raise EmptyInput("at least one mass function is required")
    frame = ms[0].frame
    for m in ms[1:]:
        if m.frame != frame:
            raise FrameMismatch(f"frames differ: {frame.labels} vs {m.frame.labels}")
    return frame


def jousselme_distance(m1: MassFunction, m2: MassFunction) -> float:
    _common_frame([m1, m2])
    keys = sorted(set(m1.focal_sets) | set(m2.focal_sets))
    diff = [m1[k] - m2[k] for k in keys]
    sq = 0.0
    for i, (x, dx) in enumerate(zip(keys, diff)):
        if dx == 0.0:
            continue
        sq += dx * dx
        for y, dy in zip(keys[i + 1:], diff[i + 1:]):
            if dy != 0.0:
                sq += 2.0 * dx * dy * jaccard(x, y)
    return math.sqrt(min(max(0.5 * sq, 0.0), 1.0))


# combination rules --------------------------------------------------------


def combine_mean(ms: Sequence[MassFunction]) -> MassFunction:
    frame = _common_frame(ms)
    acc: dict[int, float] = {}
    for m in ms:
        for x, v in m.items():
            acc[x] = acc.get(x, 0.0) + v
    k = len(ms)
    return MassFunction(frame, {x: v / k for x, v in acc.items()})


def _conjunctive_pair(a: Mapping[int, float], b: Mapping[int, float]) -> dict[int, float]:
    out: dict[int, float] = {}
    for x, u in a.items():
        for y, v in b.items():
            z = x & y
            out[z] = out.get(z, 0.0) + u * v
    return out


def _conjunctive_raw(ms: Sequence[MassFunction]) -> dict[int, float]:
    return reduce(_conjunctive_pair, (m.masses for m in ms[1:]), dict(ms[0].masses))


def combine_conjunctive(ms: Sequence[MassFunction]) -> MassFunction:
    """Unnormalized conjunctive rule; the mass left on ``0`` is the conflict."""
    frame = _common_frame(ms)
    return MassFunction(frame, _conjunctive_raw(ms))


def combine_dempster(ms: Sequence[MassFunction]) -> MassFunction:
    frame = _common_frame(ms)
    raw = _conjunctive_raw(ms)
    k = raw.pop(0, 0.0)
    if k >= 1.0 - TOTAL_CONFLICT_TOL:
        raise TotalConflict(f"conflict {k!r} is total")
    scale = 1.0 / (1.0 - k)
    return MassFunction(frame, {x: v * scale for x, v in raw.items()})


def combine_lns(supports: Sequence[SimpleSupport], convention: str = "diffidence") -> MassFunction:
    """LNS rule: cluster simple supports by focal set, then combine clusters.

    Each cluster of ``s_l`` supports on ``X_l`` is weighted by
    ``alpha_l = s_l / sum(s)``. Under the default ``"diffidence"`` convention
    the per-source weight is the residual mass on the frame (``1 - support``)
    and the cluster keeps ``alpha_l * (1 - prod(1 - support))`` on ``X_l``.
    ``"literal"`` instead reads the product over the supports themselves,
    giving ``1 - alpha_l * (1 - prod(support))`` on ``X_l``.
    """
    if not supports:
        raise EmptyInput("LNS needs at least one simple support")
    if convention not in ("diffidence", "literal"):
        raise ValueError(f"unknown LNS convention {convention!r}")
    frame = supports[0].frame
    clusters: dict[int, list[float]] = {}
    for s in supports:
        if s.frame != frame:
            raise FrameMismatch(f"frames differ: {frame.labels} vs {s.frame.labels}")
        clusters.setdefault(s.focal, []).append(s.support)
    total = len(supports)
    cluster_masses = []
    for focal, values in clusters.items():
        alpha = len(values) / total
        if convention == "diffidence":
            mass_on_focal = alpha * (1.0 - math.prod(1.0 - v for v in values))
        else:
            mass_on_focal = 1.0 - alpha * (1.0 - math.prod(values))
        cluster_masses.append(make_simple_support(frame, focal, mass_on_focal))
    return combine_conjunctive(cluster_masses)


def combine_lns_masses(ms: Sequence[MassFunction], convention: str = "diffidence") -> MassFunction:
    """LNS over arbitrary non-dogmatic masses via their canonical decompositions.

    Simple supports (including categorical ones) are taken as they are, so
    fully certain answers need no decomposition. Masses whose decomposition
    is empty (vacuous sources) contribute nothing; if every source is vacuous
    the result is vacuous.
    """
    frame = _common_frame(ms)
    supports = []
    for m in ms:
        focal = [x for x in m.focal_sets if x != frame.full]
        if len(focal) == 1 and focal[0] != 0:
            supports.append(SimpleSupport(frame, focal[0], min(m[focal[0]], 1.0)))
        elif focal:
            supports.extend(canonical_decompose(m))
    if not supports:
        return MassFunction.vacuous(frame)
    return combine_lns(supports, convention=convention)


# canonical decomposition --------------------------------------------------


def _superset_sum(f: np.ndarray, n_bits: int, sign: float) -> np.ndarray:
    """In-place superset zeta (``sign=+1``) or Moebius (``sign=-1``) transform."""
    idx = np.arange(f.size)
    for bit in range(n_bits):
        b = 1 << bit
        lower = idx[(idx & b) == 0]
        f[lower] += sign * f[lower | b]
    return f


def commonality(m: MassFunction) -> np.ndarray:
    """Commonality ``q(A) = sum of m(B) over B containing A``, indexed by bitmask."""
    return _superset_sum(m.vector(), len(m.frame), 1.0)


def canonical_decompose(m: MassFunction, tol: float = 1e-12) -> list[SimpleSupport]:
    """Factor a non-dogmatic mass into simple supports under the conjunctive rule.

    Uses the log-Moebius transform of the commonality function; the residual
    weight of subset ``A`` is ``w(A) = exp(-sum_{B >= A} (-1)^{|B|-|A|} ln q(B))``
    and the factor on ``A`` has support ``1 - w(A)``.
    """
    frame = m.frame
    full = frame.full
    if m[full] <= 0.0:
        raise DogmaticMass("canonical decomposition needs mass on the whole frame")
    q = commonality(m)
    log_w = -_superset_sum(np.log(q), len(frame), -1.0)
    # the empty-set factor must be neutral, otherwise the factors below miss mass
    if abs(math.expm1(log_w[0])) > 1e-9:
        raise NonSeparable(f"empty-set weight {math.exp(log_w[0])!r} differs from 1")
    out = []
    for a in range(1, full):
        support = 1.0 - math.exp(log_w[a])
        if support < -1e-9 or support > 1.0 + 1e-9:
            raise NonSeparable(f"subset {frame.labels_of(a)} gets support {support!r}")
        if abs(support) <= tol:
            continue
        out.append(SimpleSupport(frame, a, min(max(support, 0.0), 1.0)))
    return out


# decisions ----------------------------------------------------------------


def pignistic(m: MassFunction) -> np.ndarray:
    """Pignistic probability over the singletons, in frame order."""
    empty = m.conflict
    if empty >= 1.0 - TOTAL_CONFLICT_TOL:
        raise AllConflict("pignistic probability undefined when all mass is on the empty set")
    n = len(m.frame)
    bet = np.zeros(n)
    for x, v in m.items():
        if x == 0:
            continue
        share = v / cardinality(x)
        for i in range(n):
            if x >> i & 1:
                bet[i] += share
    return bet / (1.0 - empty)


def first_max(values: Sequence[float], tol: float = TIE_TOL) -> int:
    """Index of the first entry within ``tol`` of the maximum."""
    values = np.asarray(values, dtype=float)
    return int(np.flatnonzero(values >= values.max() - tol)[0])


def decide_pignistic(m: MassFunction) -> str:
    return m.frame.labels[first_max(pignistic(m))]


def decide_min_distance(m: MassFunction, candidates: Sequence[int]) -> int:
    """Candidate subset whose categorical mass is closest to ``m``.

    Ties are broken by smaller cardinality, then by lower subset index.
    """
    if not candidates:
        raise EmptyCandidates("no candidate subsets given")
    scored = []
    for x in candidates:
        m.frame.check_subset(x)
        d = jousselme_distance(m, make_categorical(m.frame, x))
        scored.append((d, cardinality(x), x))
    best = min(d for d, _, _ in scored)
    return min((c, x) for d, c, x in scored if d <= best + TIE_TOL)[1]


def all_nonempty_subsets(frame: Frame) -> list[int]:
    return list(range(1, frame.full + 1))
