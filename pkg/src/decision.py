"""Frame enumeration and bounded countermodel search.

Frames of a given size are generated relation-first: R ranges over the
relations allowed by the base class (all relations for MK, preorders for MS4,
partial orders for MGrz and MPlusGrz, strict orders for MGL) and E over the
set partitions of the carrier. Search order is sizes ascending, R in generation
order, partitions in restricted-growth order, and valuations in the order
used by frame_validates, so witnesses are reproducible.
"""

import itertools
import logging
import random
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from src import cache_utils, config
from src.errors import BudgetExceeded
from src.formula import Formula, boxplus_translate, mk_bd, mk_named, random_formula, to_text
from src.frame import (
    KripkeFrame,
    LogicBase,
    LogicId,
    TwoFrame,
    base_relation_ok,
    frame_class_check,
    irreflexivize,
    is_transitive,
    reflexivize,
)
from src.io_utils import counterexample_to_dict, frame_to_dict
from src.semantics import Refutation, frame_validates, satisfies

logger = logging.getLogger(__name__)


# -------------------------------
# Relations and partitions
# -------------------------------


def set_partitions(n: int) -> Iterator[Tuple[int, ...]]:
    """Set partitions of range(n) as restricted growth strings."""

    def extend(prefix: Tuple[int, ...], top: int) -> Iterator[Tuple[int, ...]]:
        if len(prefix) == n:
            yield prefix
            return
        for label in range(top + 2):
            yield from extend(prefix + (label,), max(top, label))

    yield from extend((0,), 0)


@lru_cache(maxsize=None)
def bell(n: int) -> int:
    """Number of set partitions of n points."""
    return sum(1 for _ in set_partitions(n))


def partition_relation(labels: Sequence[int]) -> np.ndarray:
    arr = np.asarray(labels)
    return arr[:, None] == arr[None, :]


def _diagonal(base: LogicBase) -> Optional[bool]:
    if base is LogicBase.MK:
        return None
    return base is not LogicBase.MGL


@lru_cache(maxsize=None)
def _relation_table(n: int, base: LogicBase, transitive: bool = False) -> Tuple[np.ndarray, ...]:
    """Relations on n points allowed by the base class (and transitive, if asked).

    Built one point at a time: every condition here is inherited by
    restrictions, so each relation on n points extends one on n - 1.
    """
    if n == 0:
        return (np.zeros((0, 0), dtype=bool),)
    k = n - 1
    diagonal = _diagonal(base)
    free = 2 * k + (1 if diagonal is None else 0)
    shifts = np.arange(free, dtype=np.int64)
    table = []
    for previous in _relation_table(k, base, transitive):
        for mask in range(1 << free):
            bits = ((mask >> shifts) & 1).astype(bool)
            rel = np.zeros((n, n), dtype=bool)
            rel[:k, :k] = previous
            rel[:k, k] = bits[:k]
            rel[k, :k] = bits[k:2 * k]
            rel[k, k] = bits[2 * k] if diagonal is None else diagonal
            if base_relation_ok(rel, base) and (not transitive or is_transitive(rel)):
                rel.setflags(write=False)
                table.append(rel)
    return tuple(table)


def relation_count(n: int, base: LogicBase, transitive: bool = False) -> int:
    """Number of R candidates of size n for the base class."""
    if base is LogicBase.MK and not transitive:
        return 1 << (n * n)
    return len(_relation_table(n, base, transitive))


def candidate_count(n: int, base: LogicBase, transitive: bool = False) -> int:
    """(R, E) pairs an enumeration of size n has to class-check."""
    return relation_count(n, base, transitive) * bell(n)


def relation_candidates(n: int, base: LogicBase, transitive: bool = False) -> Iterator[np.ndarray]:
    """Relations R on n points satisfying the base class's condition, in generation order."""
    yield from _relation_table(n, base, transitive)


def kripke_frames(n: int, base: LogicBase = LogicBase.MK) -> Iterator[KripkeFrame]:
    """Every one-relation frame of the base class on n worlds."""
    worlds = tuple(f"w{i}" for i in range(n))
    for rel in relation_candidates(n, base):
        yield KripkeFrame(worlds, rel)


def two_frames(
    n: int,
    base: LogicBase,
    keep: Optional[Callable[[TwoFrame], bool]] = None,
    transitive: bool = False,
) -> Iterator[TwoFrame]:
    """Every (R, E) with R from the base class and E a partition, optionally filtered."""
    worlds = tuple(f"w{i}" for i in range(n))
    partitions = [partition_relation(labels) for labels in set_partitions(n)]
    for rel in relation_candidates(n, base, transitive):
        for e in partitions:
            frame = TwoFrame(worlds, rel, e)
            if keep is None or keep(frame):
                yield frame


# -------------------------------
# Canonical forms
# -------------------------------


@lru_cache(maxsize=None)
def _permutations(n: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(n))), dtype=int)


def canonical_key(frame: TwoFrame) -> bytes:
    """Lexicographically least (R, E) adjacency encoding over all relabelings."""
    n = frame.size
    if n > config.MAX_ISO_SIZE:
        raise BudgetExceeded("Canonical labeling", n, config.MAX_ISO_SIZE)
    perms = _permutations(n)
    rows, cols = perms[:, :, None], perms[:, None, :]
    codes = np.concatenate(
        [frame.r[rows, cols].reshape(len(perms), -1), frame.e[rows, cols].reshape(len(perms), -1)],
        axis=1,
    )
    best = np.lexsort(codes.T[::-1])[0]
    return bytes([n]) + np.packbits(codes[best]).tobytes()


def unique_up_to_iso(frames: Iterator[TwoFrame]) -> Iterator[TwoFrame]:
    """Keep the first frame of each isomorphism class."""
    seen = set()
    for frame in frames:
        key = canonical_key(frame)
        if key not in seen:
            seen.add(key)
            yield frame


# -------------------------------
# Enumeration
# -------------------------------


def check_enumeration(size: int, base: LogicBase, budget: Optional[int] = None, transitive: bool = False) -> None:
    """Raise BudgetExceeded unless frames of this size and base may be enumerated."""
    if not 1 <= size <= config.MAX_FRAME_SIZE:
        raise BudgetExceeded("Enumeration size", size, config.MAX_FRAME_SIZE)
    budget = config.ENUMERATION_BUDGET if budget is None else budget
    needed = candidate_count(size, base, transitive)
    if needed > budget:
        raise BudgetExceeded(f"Enumerating {base.value} frames of size {size}", needed, budget)


def _generate(size: int, logic: LogicId, modulo_iso: bool) -> Iterator[TwoFrame]:
    frames = two_frames(
        size, logic.base, keep=lambda f: frame_class_check(f, logic), transitive=logic.depth_bound is not None
    )
    return unique_up_to_iso(frames) if modulo_iso else frames


def enumerate_frames(
    size: int,
    logic: Union[LogicId, str],
    modulo_iso: bool = False,
    budget: Optional[int] = None,
) -> Iterator[TwoFrame]:
    """Yield every frame of the class on `size` worlds (w0, w1, ...).

    Args:
        size: Carrier size, at most config.MAX_FRAME_SIZE
        logic: Frame class, e.g. "MGrzB[2]"
        modulo_iso: Yield the first frame of each isomorphism class only
        budget: Maximum number of (R, E) candidates (default config.ENUMERATION_BUDGET)

    Raises:
        BudgetExceeded: If the size or the candidate space is over its limit
    """
    logic = LogicId.coerce(logic)
    check_enumeration(size, logic.base, budget, transitive=logic.depth_bound is not None)
    if not config.CACHE_ENABLED:
        yield from _generate(size, logic, modulo_iso)
        return

    cached = cache_utils.get_cached_frames(str(logic), size, modulo_iso)
    if cached is not None:
        yield from cached
        return
    frames = list(_generate(size, logic, modulo_iso))
    cache_utils.save_frames_to_cache(frames, str(logic), size, modulo_iso)
    yield from frames


def pad_frame(frame: TwoFrame, reflexive: bool = True) -> TwoFrame:
    """Disjoint union with one isolated point in its own E-cluster."""
    n = frame.size
    r = np.zeros((n + 1, n + 1), dtype=bool)
    e = np.zeros((n + 1, n + 1), dtype=bool)
    r[:n, :n] = frame.r
    e[:n, :n] = frame.e
    r[n, n] = reflexive
    e[n, n] = True
    name = f"w{n}"
    while name in frame.worlds:
        name += "'"
    return TwoFrame(frame.worlds + (name,), r, e)


# -------------------------------
# Countermodel search
# -------------------------------


class SearchStatus(str, Enum):
    REFUTED = "refuted"
    VALID_UP_TO_BOUND = "valid_up_to_bound"


@dataclass(frozen=True)
class SearchOutcome:
    status: SearchStatus
    formula: Formula
    logic: LogicId
    bound: int
    frames_examined: int
    witness_frame: Optional[TwoFrame] = None
    refutation: Optional[Refutation] = None
    padding: Optional[Dict[str, object]] = None

    @property
    def refuted(self) -> bool:
        return self.status is SearchStatus.REFUTED

    def to_dict(self) -> Dict[str, object]:
        witness = None
        if self.witness_frame is not None and self.refutation is not None:
            witness = counterexample_to_dict(self.witness_frame, self.refutation)
        return {
            "status": self.status.value,
            "formula": to_text(self.formula),
            "logic": str(self.logic),
            "bound": self.bound,
            "frames_examined": self.frames_examined,
            "witness": witness,
            "padding": self.padding,
        }


def check_padding(phi: Formula, logic: LogicId, frame: TwoFrame, refutation: Refutation) -> Dict[str, object]:
    """Re-check a witness after padding it with one isolated reflexive point.

    A refutation at size s should survive at size s + 1. Classes the padded
    frame falls out of (the strict-order ones) are reported as excluded.
    """
    padded = pad_frame(frame)
    if not frame_class_check(padded, logic):
        logger.info("[countermodel] padding leaves %s, refutability at size %d not checked", logic, padded.size)
        return {"checked": False, "excluded": str(logic)}
    still_refuted = not satisfies(refutation.model(padded), refutation.world, phi)
    if not still_refuted:
        logger.warning("[countermodel] %s no longer refuted after padding to size %d", to_text(phi), padded.size)
    return {"checked": True, "size": padded.size, "still_refuted": still_refuted}


def first_refutation(
    phi: Formula,
    logic: LogicId,
    size: int,
    budget: Optional[int] = None,
) -> Tuple[Optional[TwoFrame], Optional[Refutation], int]:
    """Scan one carrier size; returns (frame, refutation, frames examined)."""
    examined = 0
    for frame in enumerate_frames(size, logic, modulo_iso=True, budget=budget):
        examined += 1
        result = frame_validates(frame, phi)
        if not result.valid:
            return frame, result.refutation, examined
    return None, None, examined


def countermodel(
    phi: Formula,
    logic: Union[LogicId, str],
    max_size: int,
    budget: Optional[int] = None,
) -> SearchOutcome:
    """Search frames of sizes 1..max_size (up to isomorphism) for a refutation of phi."""
    logic = LogicId.coerce(logic)
    examined = 0
    for size in range(1, max_size + 1):
        frame, refutation, count = first_refutation(phi, logic, size, budget)
        examined += count
        if frame is not None:
            logger.info("[countermodel] %s refuted in %s at size %d", to_text(phi), logic, size)
            padding = check_padding(phi, logic, frame, refutation)
            return SearchOutcome(SearchStatus.REFUTED, phi, logic, max_size, examined, frame, refutation, padding)
    logger.info("[countermodel] %s valid in %s up to size %d (%d frames)", to_text(phi), logic, max_size, examined)
    return SearchOutcome(SearchStatus.VALID_UP_TO_BOUND, phi, logic, max_size, examined)


# -------------------------------
# Translation cross-check
# -------------------------------


_PLUS_GRZ = LogicId(LogicBase.MPLUSGRZ, barcan=True)
_GLB = LogicId(LogicBase.MGL, barcan=True)


@dataclass(frozen=True)
class TranslationCrosscheck:
    formula: Formula
    max_size: int
    statuses: Tuple[Tuple[int, str, str], ...]  # (size, M+GrzB status of phi, MGLB status of phi+)
    disagreements: Tuple[Dict[str, object], ...]

    @property
    def agrees(self) -> bool:
        return not self.disagreements

    def __bool__(self) -> bool:
        return self.agrees

    def to_dict(self) -> Dict[str, object]:
        return {
            "formula": to_text(self.formula),
            "max_size": self.max_size,
            "agrees": self.agrees,
            "statuses": [
                {"size": size, "MPlusGrzB": grz, "MGLB": gl} for size, grz, gl in self.statuses
            ],
            "disagreements": list(self.disagreements),
        }


def _counterpart(frame: TwoFrame, to_gl: bool) -> TwoFrame:
    return irreflexivize(frame) if to_gl else reflexivize(frame)


def crosscheck_translation(phi: Formula, max_size: int, budget: Optional[int] = None) -> TranslationCrosscheck:
    """Compare refutability of phi over M+GrzB frames with phi+ over MGLB frames, size by size."""
    plus = boxplus_translate(phi)
    statuses = []
    disagreements = []
    grz_hit: Optional[Tuple[TwoFrame, Refutation]] = None
    gl_hit: Optional[Tuple[TwoFrame, Refutation]] = None
    for size in range(1, max_size + 1):
        if grz_hit is None:
            frame, ref, _ = first_refutation(phi, _PLUS_GRZ, size, budget)
            grz_hit = None if frame is None else (frame, ref)
        if gl_hit is None:
            frame, ref, _ = first_refutation(plus, _GLB, size, budget)
            gl_hit = None if frame is None else (frame, ref)
        grz_status = SearchStatus.REFUTED if grz_hit else SearchStatus.VALID_UP_TO_BOUND
        gl_status = SearchStatus.REFUTED if gl_hit else SearchStatus.VALID_UP_TO_BOUND
        statuses.append((size, grz_status.value, gl_status.value))
        if grz_status is not gl_status:
            if grz_hit is not None:
                frame, ref = grz_hit
                offending = {"MPlusGrzB": counterexample_to_dict(frame, ref),
                             "MGLB": frame_to_dict(_counterpart(frame, to_gl=True))}
            else:
                frame, ref = gl_hit
                offending = {"MGLB": counterexample_to_dict(frame, ref),
                             "MPlusGrzB": frame_to_dict(_counterpart(frame, to_gl=False))}
            disagreements.append({"size": size, "frames": offending})
            logger.warning("[crosscheck] %s disagrees at size %d", to_text(phi), size)
    return TranslationCrosscheck(phi, max_size, tuple(statuses), tuple(disagreements))


def translation_corpus(count: int = 200, seed: int = 0, depth: int = 4) -> List[Formula]:
    """Named formulas followed by `count` seeded random formulas over p and p1."""
    rng = random.Random(seed)
    named = [mk_named("com_l"), mk_named("com_r"), mk_named("casari"), mk_bd(1), mk_bd(2)]
    return named + [random_formula(rng, depth, ("p", "p1")) for _ in range(count)]
