"""Finite 2-frames (X, R, E) and the structural operations on them.

Relations are dense boolean numpy matrices indexed by carrier position;
world ids are kept only for I/O. R interprets <> and E interprets the
horizontal modality E, which is always an equivalence once loaded.
"""

import re
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from src.errors import DirtyCluster, FrameError, NonTransitive, UnknownLogic, UnknownWorld

Pair = Tuple[str, str]


# -------------------------------
# Relation algebra
# -------------------------------


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=bool)


def compose(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    """Relational composition first;second: x ~ z iff x first y and y second z."""
    return (first.astype(np.int32) @ second.astype(np.int32)) > 0


def transitive_closure(rel: np.ndarray) -> np.ndarray:
    closure = np.array(rel, dtype=bool)
    for k in range(closure.shape[0]):
        closure |= np.outer(closure[:, k], closure[k, :])
    return closure


def is_reflexive(rel: np.ndarray) -> bool:
    return bool(rel.diagonal().all())


def is_irreflexive(rel: np.ndarray) -> bool:
    return not rel.diagonal().any()


def is_symmetric(rel: np.ndarray) -> bool:
    return bool(np.array_equal(rel, rel.T))


def is_transitive(rel: np.ndarray) -> bool:
    return not (compose(rel, rel) & ~rel).any()


def is_antisymmetric(rel: np.ndarray) -> bool:
    return not (rel & rel.T & ~identity(rel.shape[0])).any()


def is_equivalence(rel: np.ndarray) -> bool:
    return is_reflexive(rel) and is_symmetric(rel) and is_transitive(rel)


def is_partial_order(rel: np.ndarray) -> bool:
    return is_reflexive(rel) and is_transitive(rel) and is_antisymmetric(rel)


def is_strict_order(rel: np.ndarray) -> bool:
    return is_irreflexive(rel) and is_transitive(rel)


class ClosureKind(str, Enum):
    REFLEXIVE = "reflexive"
    TRANSITIVE = "transitive"
    REFLEXIVE_TRANSITIVE = "reflexive_transitive"
    LEAST_EQUIVALENCE = "least_equivalence"


def close(rel: np.ndarray, kind: Union[ClosureKind, str]) -> np.ndarray:
    """Least superset of rel with the named property, over rel's carrier."""
    kind = ClosureKind(kind)
    rel = np.array(rel, dtype=bool)
    n = rel.shape[0]
    if kind is ClosureKind.REFLEXIVE:
        return rel | identity(n)
    if kind is ClosureKind.TRANSITIVE:
        return transitive_closure(rel)
    if kind is ClosureKind.REFLEXIVE_TRANSITIVE:
        return transitive_closure(rel | identity(n))
    return transitive_closure(rel | rel.T | identity(n))


def relation_from_pairs(worlds: Sequence[str], pairs: Iterable[Sequence[str]]) -> np.ndarray:
    """Build a relation matrix; raises FrameError on pairs naming undeclared worlds."""
    index = {w: i for i, w in enumerate(worlds)}
    rel = np.zeros((len(worlds), len(worlds)), dtype=bool)
    for pair in pairs:
        if len(pair) != 2:
            raise FrameError(f"Relation pairs need exactly two entries, got {list(pair)}")
        source, target = pair
        if source not in index or target not in index:
            raise FrameError(f"Dangling pair [{source!r}, {target!r}]: both ends must be declared worlds")
        rel[index[source], index[target]] = True
    return rel


def relation_pairs(worlds: Sequence[str], rel: np.ndarray) -> List[Pair]:
    return [(worlds[int(i)], worlds[int(j)]) for i, j in zip(*np.nonzero(rel))]


# -------------------------------
# Frames
# -------------------------------


def _frozen(rel: np.ndarray, n: int, name: str) -> np.ndarray:
    out = np.array(rel, dtype=bool)
    if out.shape != (n, n):
        raise FrameError(f"{name} must be a {n}x{n} relation, got shape {out.shape}")
    out.flags.writeable = False
    return out


def _check_worlds(worlds: Sequence[str]) -> Tuple[str, ...]:
    worlds = tuple(str(w) for w in worlds)
    if not worlds:
        raise FrameError("A frame needs at least one world")
    if len(set(worlds)) != len(worlds):
        raise FrameError("World ids must be distinct")
    return worlds


@dataclass(frozen=True, eq=False)
class TwoFrame:
    """A finite 2-frame. Constructing one directly does not close E; use from_pairs for that."""

    worlds: Tuple[str, ...]
    r: np.ndarray
    e: np.ndarray

    def __post_init__(self):
        worlds = _check_worlds(self.worlds)
        n = len(worlds)
        object.__setattr__(self, "worlds", worlds)
        object.__setattr__(self, "r", _frozen(self.r, n, "R"))
        object.__setattr__(self, "e", _frozen(self.e, n, "E"))
        object.__setattr__(self, "_index", {w: i for i, w in enumerate(worlds)})

    @classmethod
    def from_pairs(
        cls,
        worlds: Sequence[str],
        r_pairs: Iterable[Sequence[str]],
        e_pairs: Iterable[Sequence[str]] = (),
    ) -> "TwoFrame":
        """Load a frame: R verbatim, E closed to the least equivalence containing the pairs."""
        worlds = _check_worlds(worlds)
        r = relation_from_pairs(worlds, r_pairs)
        e = close(relation_from_pairs(worlds, e_pairs), ClosureKind.LEAST_EQUIVALENCE)
        return cls(worlds, r, e)

    @classmethod
    def from_clusters(
        cls,
        worlds: Sequence[str],
        r_pairs: Iterable[Sequence[str]],
        clusters: Iterable[Sequence[str]],
    ) -> "TwoFrame":
        pairs = [(cluster[0], w) for cluster in clusters for w in cluster[1:]]
        return cls.from_pairs(worlds, r_pairs, pairs)

    @property
    def size(self) -> int:
        return len(self.worlds)

    def index(self, world: str) -> int:
        try:
            return self._index[world]
        except KeyError:
            raise UnknownWorld(world)

    def mask(self, worlds: Iterable[str]) -> np.ndarray:
        out = np.zeros(self.size, dtype=bool)
        for w in worlds:
            out[self.index(w)] = True
        return out

    def names(self, mask: np.ndarray) -> Tuple[str, ...]:
        return tuple(self.worlds[int(i)] for i in np.flatnonzero(mask))

    def r_pairs(self) -> List[Pair]:
        return relation_pairs(self.worlds, self.r)

    def e_pairs(self) -> List[Pair]:
        return relation_pairs(self.worlds, self.e)

    def e_classes(self) -> List[Tuple[int, ...]]:
        """E-clusters as index tuples, ordered by their least member."""
        seen = np.zeros(self.size, dtype=bool)
        classes = []
        for i in range(self.size):
            if seen[i]:
                continue
            members = np.flatnonzero(self.e[i] | (np.arange(self.size) == i))
            seen[members] = True
            classes.append(tuple(int(m) for m in members))
        return classes

    def with_relations(self, r: Optional[np.ndarray] = None, e: Optional[np.ndarray] = None) -> "TwoFrame":
        return TwoFrame(self.worlds, self.r if r is None else r, self.e if e is None else e)

    def restrict(self, indices: Sequence[int]) -> "TwoFrame":
        idx = np.asarray(indices, dtype=int)
        return TwoFrame(
            tuple(self.worlds[i] for i in idx),
            self.r[np.ix_(idx, idx)],
            self.e[np.ix_(idx, idx)],
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TwoFrame):
            return NotImplemented
        return (
            self.worlds == other.worlds
            and np.array_equal(self.r, other.r)
            and np.array_equal(self.e, other.e)
        )

    def __hash__(self) -> int:
        return hash((self.worlds, self.r.tobytes(), self.e.tobytes()))

    def __repr__(self) -> str:
        return f"TwoFrame(worlds={list(self.worlds)}, R={self.r_pairs()}, E-classes={len(self.e_classes())})"


@dataclass(frozen=True, eq=False)
class KripkeFrame:
    """A unimodal frame, used as a product factor."""

    worlds: Tuple[str, ...]
    r: np.ndarray

    def __post_init__(self):
        worlds = _check_worlds(self.worlds)
        object.__setattr__(self, "worlds", worlds)
        object.__setattr__(self, "r", _frozen(self.r, len(worlds), "R"))

    @classmethod
    def from_pairs(cls, worlds: Sequence[str], r_pairs: Iterable[Sequence[str]]) -> "KripkeFrame":
        worlds = _check_worlds(worlds)
        return cls(worlds, relation_from_pairs(worlds, r_pairs))

    @classmethod
    def cluster(cls, n: int, prefix: str = "u") -> "KripkeFrame":
        """An n-world S5 cluster."""
        return cls(tuple(f"{prefix}{i}" for i in range(n)), np.ones((n, n), dtype=bool))

    @property
    def size(self) -> int:
        return len(self.worlds)


def as_kripke(frame: Union[TwoFrame, KripkeFrame]) -> KripkeFrame:
    """Coerce a TwoFrame with trivial E into its unimodal reduct."""
    if isinstance(frame, KripkeFrame):
        return frame
    if not np.array_equal(frame.e, identity(frame.size)):
        raise FrameError("Product factors must have E = identity")
    return KripkeFrame(frame.worlds, frame.r)


# -------------------------------
# Logic identifiers and frame classes
# -------------------------------


class LogicBase(str, Enum):
    MK = "MK"
    MS4 = "MS4"
    MGRZ = "MGrz"
    MGL = "MGL"
    MPLUSGRZ = "MPlusGrz"


_BASE_ALIASES = {"M+Grz": LogicBase.MPLUSGRZ, "M⁺Grz": LogicBase.MPLUSGRZ}
_LOGIC_RE = re.compile(r"^(MK|MS4|MGrz|MGL|MPlusGrz|M\+Grz|M⁺Grz)(B?)(?:\[([1-9][0-9]*)\])?$")


@dataclass(frozen=True)
class LogicId:
    base: LogicBase
    barcan: bool = False
    depth_bound: Optional[int] = None

    @classmethod
    def parse(cls, text: str) -> "LogicId":
        """Parse e.g. "MGrzB[2]", "MGLB" or "M+GrzB"."""
        match = _LOGIC_RE.match(text.strip())
        if not match:
            raise UnknownLogic(f"Unknown logic id: {text!r}", logic=text)
        base_text, barcan, bound = match.groups()
        base = _BASE_ALIASES.get(base_text) or LogicBase(base_text)
        return cls(base, barcan == "B", int(bound) if bound else None)

    @classmethod
    def coerce(cls, logic: Union["LogicId", str]) -> "LogicId":
        return logic if isinstance(logic, LogicId) else cls.parse(logic)

    def __str__(self) -> str:
        text = self.base.value + ("B" if self.barcan else "")
        if self.depth_bound is not None:
            text += f"[{self.depth_bound}]"
        return text


def satisfies_commutativity(frame: TwoFrame, side: str) -> bool:
    """Left: E;R within R;E. Right: R;E within E;R."""
    er = compose(frame.e, frame.r)
    re_ = compose(frame.r, frame.e)
    if side == "left":
        return not (er & ~re_).any()
    if side == "right":
        return not (re_ & ~er).any()
    raise FrameError(f"Commutativity side must be 'left' or 'right', got {side!r}")


def clean_clusters(frame: TwoFrame) -> bool:
    """No R-edge joins two distinct worlds of one E-cluster."""
    return not (frame.r & frame.e & ~identity(frame.size)).any()


def base_relation_ok(r: np.ndarray, base: LogicBase) -> bool:
    """The condition each base class puts on R alone."""
    if base is LogicBase.MK:
        return True
    if base is LogicBase.MS4:
        return is_reflexive(r) and is_transitive(r)
    if base is LogicBase.MGL:
        return is_strict_order(r)
    return is_partial_order(r)


def frame_class_check(frame: TwoFrame, logic: Union[LogicId, str]) -> bool:
    """True when the frame belongs to the class named by logic (base, B, [n])."""
    logic = LogicId.coerce(logic)
    if not is_equivalence(frame.e):
        return False
    if not base_relation_ok(frame.r, logic.base):
        return False
    if not satisfies_commutativity(frame, "left"):
        return False
    if logic.barcan and not satisfies_commutativity(frame, "right"):
        return False
    if logic.base is LogicBase.MPLUSGRZ and not clean_clusters(frame):
        return False
    if logic.depth_bound is not None:
        if not is_transitive(frame.r):
            return False
        return depth(frame) <= logic.depth_bound
    return True


# -------------------------------
# Depth, Q and skeletons
# -------------------------------


def relation_depth(rel: np.ndarray) -> int:
    """Longest strict chain of a transitive relation, via the SCC condensation."""
    graph = nx.DiGraph()
    graph.add_nodes_from(range(rel.shape[0]))
    graph.add_edges_from((int(a), int(b)) for a, b in zip(*np.nonzero(rel & ~identity(rel.shape[0]))))
    return nx.dag_longest_path_length(nx.condensation(graph)) + 1


def depth(frame: TwoFrame) -> int:
    """Longest strict R-chain.

    Raises:
        NonTransitive: If R is not transitive
    """
    if not is_transitive(frame.r):
        raise NonTransitive("Depth is only defined for transitive R")
    return relation_depth(frame.r)


def q_relation(frame: TwoFrame) -> np.ndarray:
    """Q = R;E, the relation behind the composite diamond."""
    return compose(frame.r, frame.e)


@dataclass(frozen=True, eq=False)
class Skeleton:
    """Quotient of a frame by E with [x] R0 [y] iff x Q y."""

    classes: Tuple[str, ...]
    members: Tuple[Tuple[str, ...], ...]
    r0: np.ndarray
    well_defined: bool

    def as_frame(self) -> TwoFrame:
        return TwoFrame(self.classes, self.r0, identity(len(self.classes)))

    def to_dict(self) -> Dict[str, object]:
        return {
            "classes": list(self.classes),
            "members": [list(m) for m in self.members],
            "R0": [list(p) for p in relation_pairs(self.classes, self.r0)],
            "well_defined": self.well_defined,
        }


def e_skeleton(frame: TwoFrame) -> Skeleton:
    """Quotient by E with R lifted from representatives; flags an ill-defined lift."""
    classes = frame.e_classes()
    q = q_relation(frame)
    k = len(classes)
    r0 = np.zeros((k, k), dtype=bool)
    well_defined = True
    for i, ci in enumerate(classes):
        for j, cj in enumerate(classes):
            block = q[np.ix_(ci, cj)]
            r0[i, j] = block.any()
            well_defined = well_defined and bool(block.all() == block.any())
    return Skeleton(
        classes=tuple(frame.worlds[c[0]] for c in classes),
        members=tuple(tuple(frame.worlds[m] for m in c) for c in classes),
        r0=r0,
        well_defined=well_defined,
    )


# -------------------------------
# Constructions
# -------------------------------


def reflexivize(frame: TwoFrame) -> TwoFrame:
    """Add the diagonal to R."""
    return frame.with_relations(r=frame.r | identity(frame.size))


def irreflexivize(frame: TwoFrame, check_clean: bool = True) -> TwoFrame:
    """Drop the diagonal of R.

    Raises:
        DirtyCluster: If check_clean and some E-cluster is dirty; left
            commutativity would not survive the construction.
    """
    if check_clean and not clean_clusters(frame):
        raise DirtyCluster("Cannot irreflexivize a frame with dirty E-clusters")
    return frame.with_relations(r=frame.r & ~identity(frame.size))


def product(left: Union[TwoFrame, KripkeFrame], right: Union[TwoFrame, KripkeFrame]) -> TwoFrame:
    """Product of a unimodal frame with an S5 frame.

    (x,u) R (y,v) iff x R1 y and u = v; (x,u) E (y,v) iff x = y and u R2 v.

    Raises:
        FrameError: If the right factor's relation is not an equivalence
    """
    f = as_kripke(left)
    g = as_kripke(right)
    if not is_equivalence(g.r):
        raise FrameError("The second product factor must be an S5 frame")
    worlds = tuple(f"({x},{u})" for x in f.worlds for u in g.worlds)
    r = np.kron(f.r.astype(np.uint8), identity(g.size).astype(np.uint8)).astype(bool)
    e = np.kron(identity(f.size).astype(np.uint8), g.r.astype(np.uint8)).astype(bool)
    return TwoFrame(worlds, r, e)


def is_pmorphism(mapping: Mapping[str, str], source: TwoFrame, target: TwoFrame) -> bool:
    """True iff mapping is onto and f(R[x]) = R'[f(x)], f(E[x]) = E'[f(x)] for every x."""
    try:
        image = np.array([target.index(mapping[w]) for w in source.worlds], dtype=int)
    except (KeyError, UnknownWorld):
        return False
    if len(set(image.tolist())) != target.size:
        return False
    for x in range(source.size):
        for rel, rel2 in ((source.r, target.r), (source.e, target.e)):
            pushed = np.zeros(target.size, dtype=bool)
            pushed[image[rel[x]]] = True
            if not np.array_equal(pushed, rel2[image[x]]):
                return False
    return True
