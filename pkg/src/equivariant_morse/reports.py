"""
Rendering of computation results as plain dictionaries of strings, printed
either as indented text or as JSON. Every polynomial goes through
`format_poly`, so the output is deterministic.
"""
import json
from typing import Any

from equivariant_morse.algebra import GradedLaurentPoly, format_poly, format_rational
from equivariant_morse.charfrac import ChamberSeries, CharFraction, format_fraction, frac_reduce
from equivariant_morse.localization import ClassicalReport, Contribution, InequalityReport
from equivariant_morse.oscillator import ScalingReport
from equivariant_morse.poincare_hodge import ChiReport
from equivariant_morse.theta import ThetaReport

Report = dict[str, Any]
Variables = tuple[str, ...] | None


def closed_form_text(f: CharFraction, variables: Variables = None) -> str:
    """A fraction printed as a Laurent polynomial when it reduces to one."""
    reduced = frac_reduce(f)
    if reduced is not None:
        return format_poly(reduced, variables)
    return format_fraction(f, variables)


def contribution_text(terms: Contribution, variables: Variables = None) -> list[str]:
    return [f"b^{deg_b}: {format_fraction(fraction, variables)}" for deg_b, fraction in terms]


def series_report(series: ChamberSeries, variables: Variables = None) -> Report:
    return {
        "chamber": [format_rational(c) for c in series.chamber.xi],
        "cutoff": format_rational(series.cutoff),
        "terms": len(series.terms),
        "series": format_poly(series.terms, variables),
    }


def classical_report(report: ClassicalReport, variables: Variables = None) -> Report:
    lacunary = report.lacunary
    return {
        "classical": format_poly(report.polynomial, variables),
        "cutoff": format_rational(report.cutoff),
        "stable": report.stable,
        "lacunary": "equals Poincaré" if lacunary.equals_poincare else "inconclusive",
    }


def inequality_report(report: InequalityReport, variables: Variables = None) -> Report:
    return {
        "holds": report.holds,
        "Q": format_poly(report.Q, variables),
        "inconsistent": [format_poly(GradedLaurentPoly.monomial(exponent), variables)
                         for exponent in report.inconsistent],
    }


def chi_report(report: ChiReport, variables: Variables = None) -> Report:
    return {
        "chi": closed_form_text(report.chi, variables),
        "signature": closed_form_text(report.signature, variables),
        "self_dual": report.self_dual,
        "local": {name: closed_form_text(local, variables) for name, local in report.local.items()},
    }


def theta_report(report: ThetaReport) -> Report:
    return {
        "per_point": {name: {"N": str(nut), "tau3": str(tau3)}
                      for name, (nut, tau3) in report.per_point.items()},
        "sum_N": str(report.sum_N),
        "sum_tau3": str(report.sum_tau3),
        "sum_N_zero": report.sum_n_zero,
        "odd_orders_zero": report.odd_orders_zero,
        "negative_orders_zero": report.negative_orders_zero,
        "signature": None if report.signature is None else str(report.signature),
        "signature_matches": report.signature_matches,
    }


def scaling_report(report: ScalingReport) -> Report:
    return {
        "passed": report.passed,
        "max_deviation": f"{report.max_deviation:.3e}",
        "ratios": {f"{eps:g}": [f"{ratio:.6f}" for ratio in ratios]
                   for eps, ratios in report.ratios.items()},
    }


def _text_lines(value: Any, indent: int) -> list[str]:
    pad = "  " * indent
    lines: list[str] = []
    if isinstance(value, dict):
        for key, item in value.items():
            if isinstance(item, (dict, list)) and item:
                lines.append(f"{pad}{key}:")
                lines.extend(_text_lines(item, indent + 1))
            else:
                lines.append(f"{pad}{key}: {_scalar_text(item)}")
    elif isinstance(value, list):
        for item in value:
            if isinstance(item, (dict, list)):
                lines.extend(_text_lines(item, indent))
            else:
                lines.append(f"{pad}- {_scalar_text(item)}")
    else:
        lines.append(f"{pad}{_scalar_text(value)}")
    return lines


def _scalar_text(value: Any) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if value is None:
        return "-"
    if isinstance(value, (dict, list)):
        return "none"
    return str(value)


def render(report: Report, as_json: bool = False) -> str:
    if as_json:
        return json.dumps(report, ensure_ascii=False, indent=2)
    return "\n".join(_text_lines(report, 0))
