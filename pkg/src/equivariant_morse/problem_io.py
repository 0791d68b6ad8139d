"""
Reading and writing fixed point problem files.

A problem file is UTF-8 JSON. Rationals are written as `"p"` or `"p/q"`
strings, scalars additionally as `"a+ib"`, and every exponent is an array of
rationals of length `rank`. Relative paths resolve against the working
directory first and then against the corpus shipped with the package.
"""
import json
import logging
from fractions import Fraction
from importlib.resources import files
from pathlib import Path
from typing import Any

import yaml
from pydantic import BaseModel, ConfigDict, Field

from equivariant_morse.algebra import (
    GradedLaurentPoly,
    Scalar,
    format_rational,
    make_exponent,
    parse_rational,
    zero_exponent,
)
from equivariant_morse.charfrac import Chamber, CharFraction
from equivariant_morse.localization import (
    Contribution,
    FixedPoint,
    FixedPointProblem,
    assemble,
    collect_terms,
)

logger = logging.getLogger(__name__)

RationalText = str | int


class TermSpec(BaseModel):
    """One monomial `coeff · b^b y^y λ^exp` of a Laurent polynomial."""

    model_config = ConfigDict(extra="forbid")

    exp: list[RationalText] = Field(title="Exponent", description="Torus exponent",
                                    examples=[["1", "-1/2"]])
    coeff: RationalText = Field("1", title="Coefficient", description="Gaussian rational",
                                examples=["1", "-2", "1/2+i3/4"])
    b: int = Field(0, ge=0, title="b degree", description="Degree in b")
    y: int = Field(0, ge=0, title="y degree", description="Degree in y")


class ContributionSpec(BaseModel):
    """One graded term `b^b y^y · numerator / ∏(1 - λ^u)`."""

    model_config = ConfigDict(extra="forbid")

    b: int = Field(0, ge=0, title="b degree", description="Degree in b")
    y: int = Field(0, ge=0, title="y degree", description="Degree in y")
    numerator: list[TermSpec] = Field(title="Numerator", description="Numerator terms")
    denominator: list[list[RationalText]] = Field(
        default_factory=list, title="Denominator",
        description="Exponents u of the factors (1 - λ^u)", examples=[[["2", "0"], ["0", "2"]]]
    )


class FixedPointSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = Field(title="Name", description="Fixed point identifier", examples=["[0:1]"])
    weights: list[list[RationalText]] = Field(default_factory=list, title="Weights",
                                              description="Tangent cone weights")
    bundle: list[TermSpec] | None = Field(None, title="Bundle", description="Bundle trace")
    contribution: list[ContributionSpec] | None = Field(None, title="Contribution",
                                                        description="Explicit Morse contribution")
    dual_contribution: list[ContributionSpec] | None = Field(
        None, title="Dual contribution", description="Explicit dual contribution")
    canonical: list[RationalText] | None = Field(None, title="Canonical trace",
                                                 description="Exponent of the canonical trace")
    chi1: list[ContributionSpec] | None = Field(None, title="Signature character",
                                                description="Local equivariant signature character")


class ProblemSpec(BaseModel):
    """The raw JSON schema of a problem file."""

    model_config = ConfigDict(extra="forbid")

    description: str = Field("", title="Description", description="Free text")
    rank: int = Field(title="Rank", description="Rank of the torus", examples=[1, 2])
    dim: int = Field(title="Dimension", description="Complex dimension", examples=[1, 2])
    root_order: int = Field(1, title="Root order", description="Common exponent denominator")
    chamber: list[RationalText] = Field(title="Chamber", description="Generic functional",
                                        examples=[["2", "1"]])
    variables: list[str] | None = Field(None, title="Variables", description="Variable names")
    poincare: list[TermSpec] | None = Field(None, title="Poincaré polynomial",
                                            description="Global traces")
    fixed_points: list[FixedPointSpec] = Field(title="Fixed points", description="Fixed points")
    cutoff: RationalText | None = Field(None, title="Cutoff", description="Default truncation T")
    k: int | None = Field(None, title="k", description="Rarita-Schwinger parameter")
    theta_weights: list[RationalText] | None = Field(None, title="θ weights",
                                                     description="Weight assignment for θ")
    hodge_levels: dict[int, str] | None = Field(None, title="Hodge levels",
                                                description="Problem file per form degree p")


class ProblemFile(BaseModel):
    """
    A validated problem with its task metadata.

    Attributes:
        problem: The fixed point problem.
        description: Free text from the file.
        cutoff: Default truncation `T`.
        k: Default Rarita–Schwinger parameter.
        theta_weights: Default weight assignment for the θ expansion.
        hodge_levels: Relative path of the problem file per form degree.
        base_dir: Directory that `hodge_levels` resolve against.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    problem: FixedPointProblem
    description: str = ""
    cutoff: Fraction | None = None
    k: int | None = None
    theta_weights: tuple[Fraction, ...] | None = None
    hodge_levels: dict[int, str] | None = None
    base_dir: Path | None = Field(None, exclude=True)


class CorpusEntry(BaseModel):
    """
    A shipped example and the expectations its replay must meet.

    Attributes:
        name: Entry name.
        file: Problem file inside the corpus, None for commands without one.
        description: What the example shows.
        command: CLI command to run.
        args: Extra CLI arguments.
        exit_code: Expected exit code.
        expected: Substrings the output must contain.
    """

    name: str = Field(title="Name", description="Entry name", examples=["quadric_classical"])
    file: str | None = Field(None, title="File", description="Problem file in the corpus")
    description: str = Field("", title="Description", description="What the example shows")
    command: str = Field(title="Command", description="CLI command", examples=["classical"])
    args: list[str] = Field(default_factory=list, title="Arguments", description="CLI arguments")
    exit_code: int = Field(0, title="Exit code", description="Expected exit code")
    expected: list[str] = Field(default_factory=list, title="Expected",
                                description="Substrings of the output")


def corpus_path(name: str) -> Path:
    return Path(str(files("equivariant_morse").joinpath("corpus", name)))


def resolve_problem_path(path: Path | str, base_dir: Path | None = None) -> Path:
    """
    Resolves a problem path against `base_dir` (or the working directory) and
    then against the corpus.

    Raises:
        FileNotFoundError: If neither location has the file.
        ValueError: If the path exists but is not a file.
    """
    candidate = Path(path)
    if base_dir is not None and not candidate.is_absolute():
        candidate = base_dir / candidate
    if not candidate.exists() and not Path(path).is_absolute():
        in_corpus = corpus_path(str(path))
        if in_corpus.exists():
            candidate = in_corpus
    if candidate.exists() is False:
        raise FileNotFoundError(f"Problem file not found at: {candidate}")
    elif candidate.is_file() is False:
        raise ValueError(f"Problem file is not a file: {candidate}")
    return candidate


def poly_from_terms(terms: list[TermSpec], rank: int) -> GradedLaurentPoly:
    total = GradedLaurentPoly.zero(rank)
    for term in terms:
        exponent = make_exponent(term.exp)
        if len(exponent) != rank:
            raise ValueError(f"Exponent {term.exp} does not have length {rank}")
        total = total + GradedLaurentPoly.monomial(exponent, Scalar.parse(term.coeff),
                                                   deg_b=term.b, deg_y=term.y)
    return total


def contribution_from_specs(specs: list[ContributionSpec], rank: int) -> Contribution:
    terms: Contribution = []
    for spec in specs:
        numerator = poly_from_terms(spec.numerator, rank)
        denominator = [make_exponent(u) for u in spec.denominator]
        for deg_b, part in numerator.split_by_b().items():
            terms.append((spec.b + deg_b, CharFraction(part.shift(zero_exponent(rank), deg_y=spec.y), denominator)))
    return collect_terms(terms)


def _fixed_point(spec: FixedPointSpec, rank: int) -> FixedPoint:
    contribution = dual = chi1 = None
    if spec.contribution is not None:
        contribution = tuple(contribution_from_specs(spec.contribution, rank))
    if spec.dual_contribution is not None:
        dual = tuple(contribution_from_specs(spec.dual_contribution, rank))
    if spec.chi1 is not None:
        chi1 = assemble(contribution_from_specs(spec.chi1, rank), rank)
    return FixedPoint(
        name=spec.name,
        weights=tuple(make_exponent(gamma) for gamma in spec.weights),
        bundle_trace=None if spec.bundle is None else poly_from_terms(spec.bundle, rank),
        explicit_contribution=contribution,
        dual_contribution=dual,
        canonical_trace=None if spec.canonical is None else make_exponent(spec.canonical),
        chi1=chi1,
    )


def problem_from_spec(spec: ProblemSpec, base_dir: Path | None = None) -> ProblemFile:
    """
    Converts the raw schema into a validated problem.

    Raises:
        ValueError: On any mathematical inconsistency, including
            `pydantic.ValidationError` raised by the domain models.
    """
    problem = FixedPointProblem(
        rank=spec.rank,
        dim=spec.dim,
        root_order=spec.root_order,
        chamber=Chamber(make_exponent(spec.chamber)),
        fixed_points=tuple(_fixed_point(fp, spec.rank) for fp in spec.fixed_points),
        poincare=None if spec.poincare is None else poly_from_terms(spec.poincare, spec.rank),
        variables=None if spec.variables is None else tuple(spec.variables),
    )
    return ProblemFile(
        problem=problem,
        description=spec.description,
        cutoff=None if spec.cutoff is None else parse_rational(spec.cutoff),
        k=spec.k,
        theta_weights=None if spec.theta_weights is None else tuple(
            parse_rational(w) for w in spec.theta_weights),
        hodge_levels=spec.hodge_levels,
        base_dir=base_dir,
    )


def loads_problem(text: str, base_dir: Path | None = None, source: str = "<string>") -> ProblemFile:
    """
    Parses the JSON text of a problem file.

    Raises:
        ValueError: If the text is not valid JSON, with line and column.
        pydantic.ValidationError: If the data violates the schema.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as error:
        raise ValueError(f"{source}: invalid JSON at line {error.lineno} column {error.colno}: "
                         f"{error.msg}") from error
    return problem_from_spec(ProblemSpec.model_validate(data), base_dir)


def parse_problem(path: Path | str) -> ProblemFile:
    """
    Reads and validates a problem file.

    Args:
        path: A path relative to the working directory, or the name of a
            corpus file such as `quadric.json`.
    Returns:
        ProblemFile: The validated problem and its metadata.
    Raises:
        FileNotFoundError: If the file is not found.
        ValueError: If the file is not a file, not valid JSON or not a valid
            problem.
    """
    resolved = resolve_problem_path(path)
    with resolved.open("r", encoding="utf-8") as problem_fp:
        problem_file = loads_problem(problem_fp.read(), resolved.parent, str(resolved))
    problem = problem_file.problem
    logger.info(f"Loaded {resolved}: rank {problem.rank}, dimension {problem.dim}, "
                f"{len(problem.fixed_points)} fixed points")
    return problem_file


def load_hodge_levels(problem_file: ProblemFile) -> dict[int, FixedPointProblem]:
    """The problem of every form degree named by `hodge_levels`."""
    if not problem_file.hodge_levels:
        raise ValueError("The problem file has no hodge_levels")
    levels: dict[int, FixedPointProblem] = {}
    for degree, relative in sorted(problem_file.hodge_levels.items()):
        path = resolve_problem_path(relative, problem_file.base_dir)
        levels[degree] = parse_problem(path).problem
    return levels


def terms_to_json(p: GradedLaurentPoly) -> list[dict[str, Any]]:
    terms: list[dict[str, Any]] = []
    for (exponent, deg_b, deg_y), value in p.items():
        term: dict[str, Any] = {"exp": [format_rational(c) for c in exponent], "coeff": str(value)}
        if deg_b:
            term["b"] = deg_b
        if deg_y:
            term["y"] = deg_y
        terms.append(term)
    return terms


def fraction_to_json(f: CharFraction, deg_b: int = 0) -> dict[str, Any]:
    return {
        "b": deg_b,
        "numerator": terms_to_json(f.numerator),
        "denominator": [[format_rational(c) for c in u] for u in f.denominator],
    }


def contribution_to_json(terms: Contribution) -> list[dict[str, Any]]:
    return [fraction_to_json(fraction, deg_b) for deg_b, fraction in terms]


def dump_problem(problem_file: ProblemFile) -> dict[str, Any]:
    """The JSON document of a problem file; parsing it gives back an equal problem."""
    problem = problem_file.problem
    data: dict[str, Any] = {
        "description": problem_file.description,
        "rank": problem.rank,
        "dim": problem.dim,
        "root_order": problem.root_order,
        "chamber": [format_rational(c) for c in problem.chamber.xi],
    }
    if problem.variables is not None:
        data["variables"] = list(problem.variables)
    if problem.poincare is not None:
        data["poincare"] = terms_to_json(problem.poincare)
    points = []
    for fp in problem.fixed_points:
        point: dict[str, Any] = {"name": fp.name,
                                 "weights": [[format_rational(c) for c in gamma]
                                             for gamma in fp.weights]}
        if fp.bundle_trace is not None:
            point["bundle"] = terms_to_json(fp.bundle_trace)
        if fp.explicit_contribution is not None:
            point["contribution"] = contribution_to_json(list(fp.explicit_contribution))
        if fp.dual_contribution is not None:
            point["dual_contribution"] = contribution_to_json(list(fp.dual_contribution))
        if fp.canonical_trace is not None:
            point["canonical"] = [format_rational(c) for c in fp.canonical_trace]
        if fp.chi1 is not None:
            point["chi1"] = [fraction_to_json(fp.chi1)]
        points.append(point)
    data["fixed_points"] = points
    if problem_file.cutoff is not None:
        data["cutoff"] = format_rational(problem_file.cutoff)
    if problem_file.k is not None:
        data["k"] = problem_file.k
    if problem_file.theta_weights is not None:
        data["theta_weights"] = [format_rational(w) for w in problem_file.theta_weights]
    if problem_file.hodge_levels is not None:
        data["hodge_levels"] = {str(p): path for p, path in sorted(problem_file.hodge_levels.items())}
    return data


def load_corpus_index(index_file: Path | None = None) -> list[CorpusEntry]:
    """
    The entries of the corpus index.

    Args:
        index_file: A YAML index, None uses the index shipped with the
            package.
    Raises:
        FileNotFoundError: If the index is not found.
        ValueError: If the index is not a file.
        KeyError: If two entries share a name.
    """
    index_path = corpus_path("index.yaml") if index_file is None else index_file
    if index_path.exists() is False:
        raise FileNotFoundError(f"Corpus index not found at: {index_path}")
    elif index_path.is_file() is False:
        raise ValueError(f"Corpus index is not a file: {index_path}")
    with index_path.open("r", encoding="utf-8") as index_fp:
        raw_entries = yaml.safe_load(index_fp.read()) or []
    entries: list[CorpusEntry] = []
    seen: set[str] = set()
    for raw_entry in raw_entries:
        entry = CorpusEntry.model_validate(raw_entry)
        if entry.name in seen:
            raise KeyError(f"Duplicate corpus entry name found: {entry.name}")
        seen.add(entry.name)
        entries.append(entry)
    return entries
