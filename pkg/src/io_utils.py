"""JSON frame and model files.

File schemas are pydantic models with extra keys forbidden, so a typo in a
hand-written frame file is reported instead of silently ignored. E pairs are
closed to the least equivalence on load; R pairs are taken as given.
"""

import json
import re
from pathlib import Path
from typing import Any, Dict, List, Mapping, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from src.errors import FrameError
from src.frame import TwoFrame, relation_pairs
from src.semantics import Model, Refutation

_VARIABLE_RE = re.compile(r"^p[0-9]*$")


# -------------------------------
# File schemas
# -------------------------------


class FrameFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    worlds: List[str] = Field(min_length=1)
    R: List[Tuple[str, str]] = Field(default_factory=list)
    E: List[Tuple[str, str]] = Field(default_factory=list)


class ModelFile(FrameFile):
    valuation: Dict[str, List[str]] = Field(default_factory=dict)

    @field_validator("valuation")
    @classmethod
    def _variable_names(cls, value: Dict[str, List[str]]) -> Dict[str, List[str]]:
        for name in value:
            if not _VARIABLE_RE.match(name):
                raise ValueError(f"not a propositional variable: {name!r}")
        return value


class CounterexampleFile(ModelFile):
    world: str


# -------------------------------
# Loading
# -------------------------------


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise FrameError(f"Cannot read {path}: {e}", path=path)


def _validate(schema: type, text: str, source: str) -> Any:
    try:
        return schema.model_validate_json(text)
    except ValidationError as e:
        raise FrameError(f"Invalid {schema.__name__} in {source}: {e.errors()[0]['msg']}", source=source)


def frame_from_file(data: FrameFile) -> TwoFrame:
    return TwoFrame.from_pairs(data.worlds, data.R, data.E)


def frame_from_dict(data: Mapping[str, Any]) -> TwoFrame:
    try:
        parsed = FrameFile.model_validate(data)
    except ValidationError as e:
        raise FrameError(f"Invalid frame: {e.errors()[0]['msg']}")
    return frame_from_file(parsed)


def load_frame(path: str) -> TwoFrame:
    """Load a frame file ({"worlds", "R", "E"}).

    Raises:
        FrameError: If the file is unreadable, malformed or has dangling pairs
    """
    return frame_from_file(_validate(FrameFile, _read(path), path))


def load_model(path: str) -> Model:
    """Load a model file: a frame file plus {"valuation": {var: [worlds]}}."""
    data = _validate(ModelFile, _read(path), path)
    return Model(frame_from_file(data), {name: frozenset(ws) for name, ws in data.valuation.items()})


def read_formula_arg(arg: str) -> str:
    """Formula text from a CLI argument; "@path" reads the formula from a file."""
    if arg.startswith("@"):
        return _read(arg[1:]).strip()
    return arg


# -------------------------------
# Serialization
# -------------------------------


def frame_to_dict(frame: TwoFrame) -> Dict[str, Any]:
    """R in full, E as its off-diagonal pairs (x, y) with x before y."""
    e_pairs = [
        [frame.worlds[i], frame.worlds[j]]
        for i in range(frame.size)
        for j in range(i + 1, frame.size)
        if frame.e[i, j]
    ]
    return {
        "worlds": list(frame.worlds),
        "R": [list(p) for p in relation_pairs(frame.worlds, frame.r)],
        "E": e_pairs,
    }


def valuation_to_dict(frame: TwoFrame, valuation: Mapping[str, Any]) -> Dict[str, List[str]]:
    return {
        name: [w for w in frame.worlds if w in set(valuation[name])]
        for name in sorted(valuation, key=lambda v: (len(v), v))
    }


def model_to_dict(model: Model) -> Dict[str, Any]:
    data = frame_to_dict(model.frame)
    data["valuation"] = valuation_to_dict(model.frame, model.valuation)
    return data


def counterexample_to_dict(frame: TwoFrame, refutation: Refutation) -> Dict[str, Any]:
    data = frame_to_dict(frame)
    data["valuation"] = valuation_to_dict(frame, refutation.valuation)
    data["world"] = refutation.world
    return data


def dump_json(payload: Any) -> str:
    return json.dumps(payload, indent=2, ensure_ascii=False)


def load_counterexample(path: str) -> Tuple[Model, str]:
    """Load a witness written by countermodel or validate: the model plus its refuted world."""
    data = _validate(CounterexampleFile, _read(path), path)
    model = Model(frame_from_file(data), {name: frozenset(ws) for name, ws in data.valuation.items()})
    model.frame.index(data.world)
    return model, data.world
