"""Models, satisfaction and frame validity.

Evaluation is vectorized: a formula is evaluated for a whole batch of
valuations at once as a (valuations x worlds) boolean array, so checking a
single model and enumerating every valuation over a frame share one code path.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

import numpy as np

from src import config
from src.errors import BudgetExceeded, FormulaError, UnknownWorld
from src.formula import (
    And,
    Bottom,
    Box,
    Dia,
    Exists,
    Forall,
    Formula,
    Implies,
    Not,
    Or,
    Top,
    Var,
    variables,
)
from src.frame import TwoFrame, compose, identity

logger = logging.getLogger(__name__)

AtomLookup = Callable[[str], np.ndarray]


@dataclass(frozen=True, eq=False)
class Model:
    """A frame plus a valuation. Variables missing from the valuation are false everywhere."""

    frame: TwoFrame
    valuation: Mapping[str, FrozenSet[str]] = field(default_factory=dict)

    def __post_init__(self):
        normalized: Dict[str, FrozenSet[str]] = {}
        for name, worlds in self.valuation.items():
            worlds = frozenset(worlds)
            for w in worlds:
                if w not in self.frame.worlds:
                    raise UnknownWorld(w)
            normalized[name] = worlds
        object.__setattr__(self, "valuation", normalized)

    def atom(self, name: str) -> np.ndarray:
        return self.frame.mask(self.valuation.get(name, ()))


# -------------------------------
# Evaluation
# -------------------------------


def _diamond(rel: np.ndarray, truth: np.ndarray) -> np.ndarray:
    """out[v, w] iff some u with w rel u has truth[v, u]."""
    return (truth.astype(np.int32) @ rel.T.astype(np.int32)) > 0


def evaluate(
    frame: TwoFrame,
    phi: Formula,
    atoms: AtomLookup,
    rows: int,
    cache: Optional[Dict[Formula, np.ndarray]] = None,
) -> np.ndarray:
    """Evaluate phi under `rows` valuations at once.

    Args:
        frame: The frame to evaluate on
        phi: Formula to evaluate
        atoms: Maps a variable name to its (rows, |X|) truth array
        rows: Number of valuations in the batch
        cache: Optional memo shared across calls on the same batch

    Returns:
        Boolean array of shape (rows, |X|)
    """
    if cache is None:
        cache = {}
    if phi in cache:
        return cache[phi]

    def sub(psi: Formula) -> np.ndarray:
        return evaluate(frame, psi, atoms, rows, cache)

    if isinstance(phi, Var):
        out = atoms(phi.name)
    elif isinstance(phi, Top):
        out = np.ones((rows, frame.size), dtype=bool)
    elif isinstance(phi, Bottom):
        out = np.zeros((rows, frame.size), dtype=bool)
    elif isinstance(phi, Not):
        out = ~sub(phi.body)
    elif isinstance(phi, And):
        out = sub(phi.left) & sub(phi.right)
    elif isinstance(phi, Or):
        out = sub(phi.left) | sub(phi.right)
    elif isinstance(phi, Implies):
        out = ~sub(phi.left) | sub(phi.right)
    elif isinstance(phi, Dia):
        out = _diamond(frame.r, sub(phi.body))
    elif isinstance(phi, Box):
        out = ~_diamond(frame.r, ~sub(phi.body))
    elif isinstance(phi, Exists):
        out = _diamond(frame.e, sub(phi.body))
    elif isinstance(phi, Forall):
        out = ~_diamond(frame.e, ~sub(phi.body))
    else:
        raise FormulaError(f"Not a formula: {phi!r}")
    cache[phi] = out
    return out


def truth_vector(model: Model, phi: Formula) -> np.ndarray:
    """Boolean truth vector of phi over the model's worlds."""
    return evaluate(model.frame, phi, lambda name: model.atom(name)[None, :], 1)[0]


def truth_table(model: Model, formulas: Iterable[Formula]) -> Dict[Formula, np.ndarray]:
    """Truth vectors of several formulas, sharing one evaluation cache."""
    cache: Dict[Formula, np.ndarray] = {}
    lookup = lambda name: model.atom(name)[None, :]
    return {phi: evaluate(model.frame, phi, lookup, 1, cache)[0] for phi in formulas}


def satisfies(model: Model, world: str, phi: Formula) -> bool:
    """M, world |= phi."""
    return bool(truth_vector(model, phi)[model.frame.index(world)])


def truth_set(model: Model, phi: Formula) -> FrozenSet[str]:
    """Worlds of the model where phi holds."""
    return frozenset(model.frame.names(truth_vector(model, phi)))


# -------------------------------
# Validity
# -------------------------------


@dataclass(frozen=True)
class Refutation:
    valuation: Dict[str, Tuple[str, ...]]
    world: str

    def model(self, frame: TwoFrame) -> Model:
        return Model(frame, {name: frozenset(ws) for name, ws in self.valuation.items()})


@dataclass(frozen=True)
class ValidityResult:
    valid: bool
    refutation: Optional[Refutation]
    valuations_checked: int

    def __bool__(self) -> bool:
        return self.valid


def frame_validates(frame: TwoFrame, phi: Formula, budget: Optional[int] = None) -> ValidityResult:
    """Check phi under every valuation of its variables at every world.

    Valuations are numbered so that bit (i * |X| + j) says whether world j is
    in the i-th variable's set; the first refutation in that numbering (and
    the least refuted world) is returned.

    Raises:
        BudgetExceeded: If 2^(|vars| * |X|) exceeds the valuation budget
    """
    names = variables(phi)
    n = frame.size
    bits = len(names) * n
    total = 1 << bits
    budget = config.VALUATION_BUDGET if budget is None else budget
    if total > budget:
        raise BudgetExceeded("Validity check", total, budget)

    shifts = np.arange(bits, dtype=np.int64).reshape(len(names), n)
    checked = 0
    for start in range(0, total, config.VALUATION_CHUNK):
        idx = np.arange(start, min(total, start + config.VALUATION_CHUNK), dtype=np.int64)
        table = {
            name: ((idx[:, None] >> shifts[i][None, :]) & 1).astype(bool)
            for i, name in enumerate(names)
        }
        truth = evaluate(frame, phi, table.__getitem__, len(idx))
        refuted = ~truth
        checked += len(idx)
        if refuted.any():
            row = int(np.argmax(refuted.any(axis=1)))
            world = int(np.argmax(refuted[row]))
            valuation = {name: frame.names(table[name][row]) for name in names}
            logger.debug("[validity] %s refuted after %d valuations", phi, checked)
            return ValidityResult(False, Refutation(valuation, frame.worlds[world]), checked)
    logger.debug("[validity] %s valid on a %d-world frame (%d valuations)", phi, n, checked)
    return ValidityResult(True, None, checked)


# -------------------------------
# Maximal points
# -------------------------------


def _strict_part(frame: TwoFrame) -> np.ndarray:
    return frame.r & ~identity(frame.size)


def max_mask(frame: TwoFrame, mask: np.ndarray) -> np.ndarray:
    """Points x of U with x R y, y in U implying x = y (R taken without its diagonal)."""
    above = (_strict_part(frame) & mask[None, :]).any(axis=1)
    return mask & ~above


def smax_mask(frame: TwoFrame, mask: np.ndarray, strict: bool = False) -> np.ndarray:
    """Maximal points that Q-see no point of U outside their own E-cluster."""
    r = _strict_part(frame) if strict else frame.r
    q = compose(r, frame.e)
    escapes = (q & ~frame.e & mask[None, :]).any(axis=1)
    return max_mask(frame, mask) & ~escapes


def max_points(frame: TwoFrame, worlds: Iterable[str]) -> FrozenSet[str]:
    """Names of the maximal points of worlds."""
    return frozenset(frame.names(max_mask(frame, frame.mask(worlds))))


def smax_points(frame: TwoFrame, worlds: Iterable[str], strict: bool = False) -> FrozenSet[str]:
    return frozenset(frame.names(smax_mask(frame, frame.mask(worlds), strict)))


def smax_existence_failures(frame: TwoFrame, mask: np.ndarray) -> List[int]:
    """Points x of U for which Q[x] meets no strongly maximal point of U."""
    q = compose(frame.r, frame.e)
    top = smax_mask(frame, mask)
    return [int(x) for x in np.flatnonzero(mask) if not (q[x] & top).any()]


# -------------------------------
# Witness sets
# -------------------------------


@dataclass(frozen=True)
class WitnessSets:
    w_exists: Tuple[Formula, ...]
    w_dia: Tuple[Formula, ...]


def witness_sets(
    model: Model,
    world: str,
    formulas: Iterable[Formula],
    reflexive: bool = True,
    table: Optional[Dict[Formula, np.ndarray]] = None,
) -> WitnessSets:
    """E-formulas and <>-formulas of S that need a witness other than `world` itself.

    With reflexive=False every true <>-formula needs a witness, since an
    irreflexive point never sees itself.
    """
    formulas = tuple(formulas)
    if table is None:
        table = truth_table(model, formulas)
    t = model.frame.index(world)

    def needs(phi: Formula, self_witness: bool) -> bool:
        if not table[phi][t]:
            return False
        return not (self_witness and table[phi.body][t])

    return WitnessSets(
        w_exists=tuple(phi for phi in formulas if isinstance(phi, Exists) and needs(phi, True)),
        w_dia=tuple(phi for phi in formulas if isinstance(phi, Dia) and needs(phi, reflexive)),
    )


def sim_S(model: Model, x: str, y: str, formulas: Iterable[Formula]) -> bool:
    """x and y agree on every formula of the set."""
    i, j = model.frame.index(x), model.frame.index(y)
    return all(bool(vec[i]) == bool(vec[j]) for vec in truth_table(model, formulas).values())
