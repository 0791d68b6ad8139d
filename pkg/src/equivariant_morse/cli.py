import logging
from collections.abc import Iterator
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path
from typing import Annotated

import typer
from rich import print as rprint
from rich.markup import escape

from equivariant_morse.algebra import format_poly, parse_rational, zero_exponent
from equivariant_morse.charfrac import format_fraction, frac_equals, frac_invert_vars, frac_reduce
from equivariant_morse.localization import (
    Side,
    classical_morse,
    dual_consistency,
    dual_series,
    lefschetz_duality_check,
    lefschetz_number,
    local_contribution,
    morse_series,
    verify_inequality,
)
from equivariant_morse.oscillator import ModelOperator, richardson_ratio, scaling_check
from equivariant_morse.poincare_hodge import chi_yb_assemble
from equivariant_morse.problem_io import (
    ProblemFile,
    load_corpus_index,
    load_hodge_levels,
    parse_problem,
)
from equivariant_morse.rarita_schwinger import (
    forms_agree,
    rs_contribution,
    rs_kernel_bound,
    rs_problem,
    rs_product_check,
    rs_split_form,
)
from equivariant_morse.reports import (
    Report,
    chi_report,
    classical_report,
    closed_form_text,
    contribution_text,
    inequality_report,
    render,
    scaling_report,
    series_report,
    theta_report,
)
from equivariant_morse.theta import DEFAULT_ORDER, global_theta_checks, parse_weights

logger = logging.getLogger(__name__)

app = typer.Typer(help="Equivariant Morse inequalities from torus fixed point data.",
                  no_args_is_help=True)

DEFAULT_CUTOFF = Fraction(10)

ProblemArgument = Annotated[Path, typer.Argument(help="Problem file, or the name of a corpus file")]
CutoffOption = Annotated[str | None, typer.Option("--T", help="Truncation level T, overrides the file")]
JsonOption = Annotated[bool, typer.Option("--json", help="Print machine readable JSON")]


@app.callback()
def main(verbose: Annotated[bool, typer.Option("--verbose", "-v", help="Print verbose logging")] = False) -> None:
    if verbose:
        logging.basicConfig(level=logging.INFO)
    else:
        logging.basicConfig(level=logging.WARNING)


@contextmanager
def input_errors() -> Iterator[None]:
    """Maps input errors to exit code 1."""
    try:
        yield
    except (ValueError, KeyError, FileNotFoundError) as error:
        rprint(f"[red]✗ {escape(str(error))}[/red]")
        raise typer.Exit(1) from error


def emit(report: Report, as_json: bool, checks: dict[str, bool] | None = None) -> None:
    """Prints the report and exits with code 2 if any check failed."""
    if as_json and checks:
        report = {**report, "checks": checks}
    typer.echo(render(report, as_json))
    failed = [name for name, passed in (checks or {}).items() if not passed]
    if not as_json:
        for name, passed in (checks or {}).items():
            rprint(f"[green]✓ {escape(name)}[/green]" if passed else f"[red]✗ {escape(name)}[/red]")
    if failed:
        raise typer.Exit(2)


def _cutoff(option: str | None, problem_file: ProblemFile) -> Fraction:
    if option is not None:
        return parse_rational(option)
    if problem_file.cutoff is not None:
        return problem_file.cutoff
    return DEFAULT_CUTOFF


@app.command()
def lefschetz(problem: ProblemArgument,
              side: Annotated[Side, typer.Option(help="Morse or dual side")] = Side.morse,
              b: Annotated[str, typer.Option("--b", help="Value of b")] = "-1",
              y: Annotated[str | None, typer.Option("--y", help="Value of y, keeps y when unset")] = None,
              as_json: JsonOption = False) -> None:
    """Global closed form at the given grading values, the Lefschetz number at b = -1."""
    with input_errors():
        problem_file = parse_problem(problem)
        p = problem_file.problem
        value = lefschetz_number(p, side, parse_rational(b), None if y is None else parse_rational(y))
        report = {
            "side": side.value,
            "lefschetz": closed_form_text(value, p.variables),
            "fraction": format_fraction(value, p.variables),
        }
    emit(report, as_json)


@app.command()
def morse(problem: ProblemArgument, cutoff: CutoffOption = None, as_json: JsonOption = False) -> None:
    """Local Morse contributions and the global Morse series."""
    with input_errors():
        problem_file = parse_problem(problem)
        p = problem_file.problem
        report: Report = {
            "local": {fp.name: contribution_text(local_contribution(fp, p, Side.morse), p.variables)
                      for fp in p.fixed_points},
            **series_report(morse_series(p, _cutoff(cutoff, problem_file)), p.variables),
        }
    emit(report, as_json)


@app.command()
def dual(problem: ProblemArgument, cutoff: CutoffOption = None, as_json: JsonOption = False) -> None:
    """Serre dual contributions and the dual Morse series in the opposite chamber."""
    with input_errors():
        problem_file = parse_problem(problem)
        p = problem_file.problem
        flagged = dual_consistency(p)
        duality = lefschetz_duality_check(p)
        report: Report = {
            "local": {fp.name: contribution_text(local_contribution(fp, p, Side.dual), p.variables)
                      for fp in p.fixed_points},
            **series_report(dual_series(p, _cutoff(cutoff, problem_file)), p.variables),
            "inconsistent_dual_data": flagged,
        }
    emit(report, as_json, {"Serre duality of the closed forms": duality,
                           "explicit dual data": not flagged})


@app.command()
def classical(problem: ProblemArgument, cutoff: CutoffOption = None, as_json: JsonOption = False) -> None:
    """The classical Morse polynomial and its lacunary verdict."""
    with input_errors():
        problem_file = parse_problem(problem)
        p = problem_file.problem
        result = classical_morse(p, _cutoff(cutoff, problem_file))
    emit(classical_report(result, p.variables), as_json, {"stable": result.stable})


@app.command()
def verify(problem: ProblemArgument, cutoff: CutoffOption = None, as_json: JsonOption = False) -> None:
    """Strong Morse inequalities on the Morse and the dual side."""
    with input_errors():
        problem_file = parse_problem(problem)
        p = problem_file.problem
        T = _cutoff(cutoff, problem_file)
        poincare = p.poincare
        if poincare is None:
            verdict = classical_morse(p, T).lacunary
            if not verdict.equals_poincare:
                raise ValueError("No Poincaré polynomial in the file and the lacunary principle "
                                 "is inconclusive")
            poincare = verdict.poincare_if_equal
        morse_side = verify_inequality(morse_series(p, T), poincare, p.dim)
        dual_side = verify_inequality(dual_series(p, T), poincare, p.dim)
        report = {
            "poincare": format_poly(poincare, p.variables),
            "morse": inequality_report(morse_side, p.variables),
            "dual": inequality_report(dual_side, p.variables),
        }
    emit(report, as_json, {"Morse side inequalities": morse_side.holds,
                           "dual side inequalities": dual_side.holds})


@app.command()
def vanish(problem: ProblemArgument, cutoff: CutoffOption = None, as_json: JsonOption = False) -> None:
    """Vanishing of the cohomology for a fractional canonical twist."""
    with input_errors():
        problem_file = parse_problem(problem)
        p = problem_file.problem
        result = classical_morse(p, _cutoff(cutoff, problem_file))
        report = {
            **classical_report(result, p.variables),
            "lefschetz": closed_form_text(lefschetz_number(p), p.variables),
        }
    emit(report, as_json, {"vanishes": not result.polynomial and result.stable})


@app.command()
def chi(problem: ProblemArgument, as_json: JsonOption = False) -> None:
    """The equivariant Poincaré–Hodge polynomial from the per form degree files."""
    with input_errors():
        problem_file = parse_problem(problem)
        p = problem_file.problem
        result = chi_yb_assemble(load_hodge_levels(problem_file), p.dim)
    emit(chi_report(result, p.variables), as_json, {"duality": result.self_dual is not False})


@app.command()
def nut(problem: ProblemArgument,
        weights: Annotated[str | None, typer.Option("--weights", help="Comma separated weight assignment")] = None,
        order: Annotated[int, typer.Option("--K", help="Truncation order")] = DEFAULT_ORDER,
        as_json: JsonOption = False) -> None:
    """NUT charges and τ₃ from the θ expansion of the local signature characters."""
    with input_errors():
        problem_file = parse_problem(problem)
        p = problem_file.problem
        if weights is not None:
            w = parse_weights(weights.split(","))
        elif problem_file.theta_weights is not None:
            w = problem_file.theta_weights
        else:
            raise ValueError("No weight assignment, pass --weights or set theta_weights")
        signature = None
        if problem_file.hodge_levels:
            reduced = frac_reduce(chi_yb_assemble(load_hodge_levels(problem_file), p.dim).signature)
            if reduced is not None and reduced.exponents() <= {zero_exponent(p.rank)}:
                signature = reduced.coefficient(zero_exponent(p.rank))
        result = global_theta_checks(p, w, signature, order)
    checks = {"NUT charges cancel": result.sum_n_zero}
    if result.signature_matches is not None:
        checks["Στ₃ equals the signature"] = result.signature_matches
    emit(theta_report(result), as_json, checks)


@app.command()
def rs(problem: ProblemArgument,
       k: Annotated[int | None, typer.Option("--k", help="Number of spin Dirac summands, overrides the file")] = None,
       cutoff: CutoffOption = None,
       product: Annotated[Path | None, typer.Option("--product", help="Second factor for the product formula")] = None,
       as_json: JsonOption = False) -> None:
    """The k-Rarita–Schwinger index, its classical Morse polynomial and kernel bounds."""
    with input_errors():
        problem_file = parse_problem(problem)
        p = problem_file.problem
        k_value = k if k is not None else (problem_file.k or 0)
        twisted = rs_problem(p, k_value)
        index = lefschetz_number(twisted)
        result = classical_morse(twisted, _cutoff(cutoff, problem_file))
        forms = all(forms_agree(rs_contribution(fp, k_value, p.chamber, p.dim),
                                rs_split_form(fp, k_value, p.chamber, p.dim))
                    for fp in p.fixed_points)
        report: Report = {
            "k": k_value,
            "index": closed_form_text(index, p.variables),
            "local": {fp.name: contribution_text(list(fp.explicit_contribution or ()), p.variables)
                      for fp in twisted.fixed_points},
            **classical_report(result, p.variables),
            "kernel_bound": {fp.name: rs_kernel_bound(fp.weights, p.chamber) for fp in p.fixed_points},
        }
        checks = {
            "consolidated and split forms agree": forms,
            "index symmetric under inversion": frac_equals(index, frac_invert_vars(index)),
        }
        if product is not None:
            checks["product formula"] = rs_product_check(p, parse_problem(product).problem, k_value)
    emit(report, as_json, checks)


@app.command()
def oscillator(eps: Annotated[str, typer.Option("--eps", help="Comma separated values of ε")] = "1,2,4",
               grid_points: Annotated[int, typer.Option("--M", help="Interior grid points")] = 2000,
               half_width: Annotated[float, typer.Option("--L", help="Half width of the domain")] = 12.0,
               offset: Annotated[float, typer.Option("--c", help="Potential offset")] = -1.0,
               richardson: Annotated[bool, typer.Option(help="Also report the Richardson error ratio")] = False,
               as_json: JsonOption = False) -> None:
    """Linear scaling in ε of the model Laplacian's positive eigenvalues."""
    with input_errors():
        eps_list = [float(value) for value in eps.split(",") if value.strip()]
        result = scaling_check(eps_list, half_width, grid_points, offset)
        report = scaling_report(result)
        if richardson:
            op = ModelOperator(epsilon=eps_list[0], half_width=half_width,
                               grid_points=grid_points, offset=offset)
            report["richardson_ratio"] = f"{richardson_ratio(op):.3f}"
    emit(report, as_json, {"linear scaling": result.passed})


@app.command()
def corpus(as_json: JsonOption = False) -> None:
    """Lists the shipped examples."""
    with input_errors():
        entries = load_corpus_index()
    report = {entry.name: {"file": entry.file, "command": entry.command,
                           "description": entry.description} for entry in entries}
    emit(report, as_json)
