"""
cspline Problem Files

On-disk JSON format of a spline problem. Complex scalars are [re, im] pairs
(bare real numbers are accepted), an algebra element is a list of blocks and
a module vector is a list of m elements.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from pydantic import ValidationError as PydanticValidationError

from .algebra import DEFAULT_TOL, AlgebraElement, AlgebraSpec
from .exceptions import CSplineError, ParseError
from .forms import SesquilinearForm
from .hilbert_module import ModuleSpace, ModuleVector, submodule_from_generators
from .spline import SplineProblem

logger = logging.getLogger(__name__)

ComplexScalar = Union[Tuple[float, float], float]
ElementData = List[List[List[ComplexScalar]]]
VectorData = List[ElementData]


class AlgebraData(BaseModel):
    model_config = ConfigDict(extra="forbid")

    blocks: List[int] = Field(min_length=1)


class OptionsData(BaseModel):
    model_config = ConfigDict(extra="forbid")

    tol: Optional[float] = Field(default=None, gt=0)
    seed: Optional[int] = None


class ProblemFile(BaseModel):
    """Parsed form of a problem description, before numeric validation."""

    model_config = ConfigDict(extra="forbid")

    algebra: AlgebraData
    module_rank: int = Field(ge=1)
    T: Optional[List[List[ElementData]]] = None
    T_flat: Optional[List[List[ComplexScalar]]] = None
    Y_generators: List[VectorData] = Field(default_factory=list)
    x: VectorData
    options: OptionsData = Field(default_factory=OptionsData)


def _location(loc: Sequence[Any]) -> str:
    path = ""
    for part in loc:
        if isinstance(part, int):
            path += f"[{part}]"
        elif path:
            path += f".{part}"
        else:
            path = str(part)
    return path


def _scalar(value: ComplexScalar) -> complex:
    if isinstance(value, (tuple, list)):
        return complex(value[0], value[1])
    return complex(value)


def _element(spec: AlgebraSpec, data: ElementData, location: str) -> AlgebraElement:
    if len(data) != spec.num_blocks:
        raise ParseError(f"expected {spec.num_blocks} blocks, got {len(data)}", location)
    blocks = []
    for k, (block, n) in enumerate(zip(data, spec.block_sizes)):
        if len(block) != n or any(len(row) != n for row in block):
            raise ParseError(f"block must be {n}x{n}", f"{location}[{k}]")
        values = np.array([[_scalar(v) for v in row] for row in block], dtype=complex)
        if not np.all(np.isfinite(values)):
            raise ParseError("block holds non-finite values", f"{location}[{k}]")
        blocks.append(values)
    return AlgebraElement(spec, blocks)


def _vector(space: ModuleSpace, data: VectorData, location: str) -> ModuleVector:
    if len(data) != space.rank:
        raise ParseError(f"expected {space.rank} entries, got {len(data)}", location)
    return ModuleVector(space, [
        _element(space.spec, entry, f"{location}[{i}]") for i, entry in enumerate(data)
    ])


def _form(space: ModuleSpace, model: ProblemFile) -> SesquilinearForm:
    if (model.T is None) == (model.T_flat is None):
        raise ParseError("exactly one of 'T' and 'T_flat' is required", "T")

    if model.T is not None:
        m = space.rank
        if len(model.T) != m:
            raise ParseError(f"expected {m} rows, got {len(model.T)}", "T")
        rows = []
        for i, row in enumerate(model.T):
            if len(row) != m:
                raise ParseError(f"expected {m} entries, got {len(row)}", f"T[{i}]")
            rows.append([_element(space.spec, entry, f"T[{i}][{j}]") for j, entry in enumerate(row)])
        return SesquilinearForm(space, rows)

    matrix = np.array([[_scalar(v) for v in row] for row in model.T_flat], dtype=complex)
    try:
        return SesquilinearForm.from_flat(space, matrix)
    except CSplineError as e:
        raise ParseError(str(e), "T_flat")


def load_problem_file(path: Union[str, Path]) -> ProblemFile:
    """Read and schema-validate a problem file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"cannot read problem file: {e.strerror or e}", str(path))
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg} (line {e.lineno})", str(path))
    return problem_from_data(data)


def problem_from_data(data: Any) -> ProblemFile:
    try:
        return ProblemFile.model_validate(data)
    except PydanticValidationError as e:
        first = e.errors()[0]
        raise ParseError(first["msg"], _location(first["loc"]) or None)


def build_problem(model: ProblemFile, tol: Optional[float] = None) -> SplineProblem:
    """
    Turn a schema-valid ProblemFile into a SplineProblem.

    Args:
        model: Parsed file
        tol: Tolerance override; falls back to options.tol, then the default

    Returns:
        Fully validated SplineProblem
    """
    try:
        spec = AlgebraSpec(tuple(model.algebra.blocks))
        space = ModuleSpace(spec, model.module_rank)
    except CSplineError as e:
        raise ParseError(str(e), "algebra")

    B = _form(space, model)
    generators = [_vector(space, g, f"Y_generators[{i}]") for i, g in enumerate(model.Y_generators)]
    x = _vector(space, model.x, "x")

    try:
        Y = submodule_from_generators(space, generators)
        problem = SplineProblem(space, Y, B, x, tol or model.options.tol or DEFAULT_TOL)
    except CSplineError as e:
        raise ParseError(str(e))
    logger.debug("parsed problem: blocks=%s m=%d dim Y=%d", spec.block_sizes, space.rank, Y.dim)
    return problem


def parse_problem(path: Union[str, Path], tol: Optional[float] = None) -> SplineProblem:
    """Load, validate and build the problem stored at ``path``."""
    return build_problem(load_problem_file(path), tol)


def _scalar_data(value: complex) -> List[float]:
    return [float(value.real), float(value.imag)]


def element_data(a: AlgebraElement) -> ElementData:
    return [[[_scalar_data(v) for v in row] for row in block] for block in a.blocks]


def vector_data(x: ModuleVector) -> VectorData:
    return [element_data(entry) for entry in x.entries]


def serialize_problem(p: SplineProblem, seed: Optional[int] = None) -> Dict[str, Any]:
    """Inverse of ``parse_problem``: the JSON-ready dictionary for ``p``."""
    options: Dict[str, Any] = {"tol": p.tol}
    if seed is not None:
        options["seed"] = seed
    return {
        "algebra": {"blocks": list(p.space.spec.block_sizes)},
        "module_rank": p.space.rank,
        "T": [[element_data(entry) for entry in row] for row in p.B.T],
        "Y_generators": [vector_data(g) for g in p.Y.generators],
        "x": vector_data(p.x),
        "options": options,
    }
