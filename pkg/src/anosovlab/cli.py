"""Batch command-line front end.

Subcommands construct representations and run the verification scans,
emitting machine-readable reports: JSON for nested reports, CSV (with a
sidecar schema file) for flat scan tables.  Exit status: 0 all checks
pass, 1 any check fails, 2 only ambiguous verdicts, 3 numeric/domain
errors (diagnostic JSON on stderr), 64 usage errors.
"""

from __future__ import annotations

import csv
import json
import os
import sys

import click
import numpy as np

from . import verification as ver
from .errors import AnosovLabError
from .groups import Word, words_of_length
from .representations import (
    coxeter_number_B,
    fg_rep,
    fuchsian_locus,
    punctured_torus_reference,
    rep_from_json,
    rep_to_json,
    sopq_form,
    sopq_positive,
)

L_CAP_DEFAULT = 7


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _resolve_threads(threads):
    if threads is not None:
        return max(1, int(threads))
    return max(1, int(os.environ.get("ANOSOVLAB_THREADS", "1")))


def _write_json(doc: dict, out: str | None):
    text = json.dumps(doc, indent=2, default=str)
    if out is None:
        click.echo(text)
    else:
        with open(out, "w") as fh:
            fh.write(text + "\n")


def _write_csv(out: str, columns: list, rows: list, descriptions: dict):
    """Rows of dicts -> CSV at ``out`` plus a schema sidecar ``out.schema.json``."""
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])
    schema = {
        "columns": [
            {"name": c,
             "type": "number" if isinstance(rows[0][c], float) else "string",
             "description": descriptions.get(c, "")}
            for c in columns
        ] if rows else [],
        "float_format": "%.17g",
    }
    with open(out + ".schema.json", "w") as fh:
        json.dump(schema, fh, indent=2)
        fh.write("\n")


def _status_from_verdicts(verdicts) -> int:
    verdicts = list(verdicts)
    if any(v in ("fail", "flat") for v in verdicts):
        return 1
    if any(v in ("ambiguous", "non-certifiable") for v in verdicts):
        return 2
    return 0


def _load_representation(family, x, partition, rep_path):
    given = sum(v is not None for v in (family, rep_path))
    if given != 1:
        raise click.UsageError("give exactly one of --family or --rep")
    if rep_path is not None:
        with open(rep_path) as fh:
            return rep_from_json(fh.read())
    if family == "fg":
        if x is None:
            raise click.UsageError("--family fg needs --x")
        return fg_rep(x)
    if family == "fuchsian":
        if partition is None:
            raise click.UsageError("--family fuchsian needs --partition")
        parts = tuple(int(p) for p in partition.split(","))
        return fuchsian_locus(parts, punctured_torus_reference())
    raise click.UsageError(f"unknown family {family!r}")


def _check_L(l_value: int, cap: int):
    if l_value > cap:
        raise click.UsageError(f"--L {l_value} exceeds the cap {cap}")
    return l_value


rep_options = [
    click.option("--family", type=click.Choice(["fg", "fuchsian"]),
                 default=None, help="Built-in representation family."),
    click.option("--x", type=float, default=None,
                 help="Parameter of the fg family."),
    click.option("--partition", type=str, default=None,
                 help="Comma-separated non-increasing partition, e.g. 5,1."),
    click.option("--rep", "rep_path", type=click.Path(exists=True),
                 default=None, help="Path to a representation JSON file."),
]


def _add_options(options):
    def wrap(fn):
        for opt in reversed(options):
            fn = opt(fn)
        return fn
    return wrap


@click.group()
def cli():
    """Desk-scale verification of gap, cross-ratio and collar statements."""


@cli.command()
@_add_options(rep_options)
@click.option("--out", type=click.Path(), default=None,
              help="Output path for the representation JSON (default stdout).")
def construct(family, x, partition, rep_path, out):
    """Emit a representation as JSON."""
    rep = _load_representation(family, x, partition, rep_path)
    text = rep_to_json(rep)
    if out is None:
        click.echo(text)
    else:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    return 0


@cli.command("gap-scan")
@_add_options(rep_options)
@click.option("--k", type=int, required=True)
@click.option("--L", "l_value", type=int, required=True)
@click.option("--L-cap", "l_cap", type=int, default=L_CAP_DEFAULT)
@click.option("--out", type=click.Path(), default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
              default="json")
@click.option("--threads", type=int, default=None)
def gap_scan(family, x, partition, rep_path, k, l_value, l_cap, out, fmt,
             threads):
    """Fit the growth of the word-sphere minimum of the k-th singular gap."""
    rep = _load_representation(family, x, partition, rep_path)
    report = ver.anosov_gap_scan(rep, k, _check_L(l_value, l_cap),
                                 threads=_resolve_threads(threads))
    if fmt == "csv":
        if out is None:
            raise click.UsageError("--format csv needs --out")
        rows = [{"length": int(l), "min_log_gap": float(g)}
                for l, g in zip(report.lengths, report.min_log_gaps)]
        _write_csv(out, ["length", "min_log_gap"], rows, {
            "length": "word length of the sphere",
            "min_log_gap": "minimum over the sphere of log(sigma_k/sigma_k+1)",
        })
    else:
        _write_json({"command": "gap-scan", "report": report.to_dict()}, out)
    return _status_from_verdicts([
        "pass" if report.verdict == "anosov-like" else
        ("fail" if report.verdict == "flat" else "ambiguous")])


@cli.command()
@click.argument("what", type=click.Choice(
    ["Hk", "Ck", "hyperconvex", "pos-ratioed", "eigen-identities"],
    case_sensitive=False))
@_add_options(rep_options)
@click.option("--k", type=int, required=True)
@click.option("--L", "l_value", type=int, required=True)
@click.option("--L-cap", "l_cap", type=int, default=L_CAP_DEFAULT)
@click.option("--base-word", type=str, default="a",
              help="Base boundary point for the hyperconvex projection check.")
@click.option("--accept-tol", type=float, default=ver.SCAN_ACCEPT)
@click.option("--reject-tol", type=float, default=ver.SCAN_REJECT)
@click.option("--min-separation", type=float, default=ver.TRIPLE_SEPARATION)
@click.option("--identity-tol", type=float, default=1e-7,
              help="Relative tolerance of the eigenvalue identities.")
@click.option("--out", type=click.Path(), default=None)
@click.option("--threads", type=int, default=None)
def check(what, family, x, partition, rep_path, k, l_value, l_cap, base_word,
          accept_tol, reject_tol, min_separation, identity_tol, out, threads):
    """Run one of the transversality / positivity / identity checks."""
    rep = _load_representation(family, x, partition, rep_path)
    l_value = _check_L(l_value, l_cap)
    nthreads = _resolve_threads(threads)
    what = what.lower()
    if what == "hk":
        report = ver.hk_scan(rep, k, l_value, accept=accept_tol,
                             reject=reject_tol,
                             min_separation=min_separation, threads=nthreads)
        _write_json({"command": "check-Hk", "report": report.to_dict()}, out)
        return _status_from_verdicts([report.verdict])
    if what == "ck":
        report = ver.ck_scan(rep, k, l_value, accept=accept_tol,
                             reject=reject_tol,
                             min_separation=min_separation, threads=nthreads)
        _write_json({"command": "check-Ck", "report": report.to_dict()}, out)
        return _status_from_verdicts([report.verdict])
    if what == "hyperconvex":
        letters = []
        for ch in base_word:
            idx = ord(ch.lower()) - ord("a") + 1
            letters.append(idx if ch.islower() else -idx)
        base = Word.from_letters(letters)
        samples = [w for w in words_of_length(rep.rank, l_value) if len(w) > 0]
        report = ver.check_projection_hyperconvexity(
            rep, k, base, samples, accept=accept_tol, reject=reject_tol,
            min_separation=min_separation)
        _write_json({"command": "check-hyperconvex",
                     "report": report.to_dict()}, out)
        return _status_from_verdicts([report.verdict])
    if what == "pos-ratioed":
        report = ver.check_positively_ratioed(rep, k, l_value)
        _write_json({"command": "check-pos-ratioed",
                     "report": report.to_dict()}, out)
        return 0 if report.passed else 1
    # eigen identities
    reports = ver.eigen_identity_scan(rep, k, l_value, threads=nthreads)
    worst_pcr = max(r.pcr_rel_error for r in reports)
    worst_gcr = max(r.gcr_rel_error for r in reports)
    all_above_one = all(r.gcr_value > 1.0 for r in reports)
    passed = worst_pcr <= identity_tol and worst_gcr <= identity_tol \
        and all_above_one
    _write_json({
        "command": "check-eigen-identities",
        "n_words": len(reports),
        "max_pcr_rel_error": worst_pcr,
        "max_gcr_rel_error": worst_gcr,
        "all_periods_above_one": all_above_one,
        "tolerance": identity_tol,
        "passed": passed,
        "reports": [r.to_dict() for r in reports],
    }, out)
    return 0 if passed else 1


@cli.command()
@_add_options(rep_options)
@click.option("--k", type=int, required=True)
@click.option("--L", "l_value", type=int, required=True)
@click.option("--L-cap", "l_cap", type=int, default=L_CAP_DEFAULT)
@click.option("--out", type=click.Path(), default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
              default="json")
@click.option("--threads", type=int, default=None)
def collar(family, x, partition, rep_path, k, l_value, l_cap, out, fmt,
           threads):
    """Collar inequality for every linked pair of ball words."""
    rep = _load_representation(family, x, partition, rep_path)
    reports = ver.collar_scan(rep, k, _check_L(l_value, l_cap),
                              threads=_resolve_threads(threads))
    rows = [r.to_dict() for r in reports]
    summary = {
        "command": "collar",
        "n_pairs": len(reports),
        "all_hold": all(r.holds for r in reports),
        "min_margin": min((r.margin for r in reports), default=None),
        "weight_chain_ok": all(r.rhs >= r.weight_rhs - 1e-9 for r in reports),
    }
    if fmt == "csv":
        if out is None:
            raise click.UsageError("--format csv needs --out")
        _write_csv(out, ["g", "h", "k", "lhs", "rhs", "weight_rhs", "holds",
                         "margin", "sign_indeterminate"], rows, {
            "g": "word whose weight period is bounded below",
            "h": "linked word supplying the root gap",
            "lhs": "product of top-k over bottom-k eigenvalues of g",
            "rhs": "(1 - lambda_(k+1)/lambda_k(h))^-1",
            "weight_rhs": "(1 - exp(-weight length of h))^-1",
        })
        click.echo(json.dumps(summary))
    else:
        summary["pairs"] = rows
        _write_json(summary, out)
    return 0 if summary["all_hold"] and summary["weight_chain_ok"] else 1


@cli.command("fg-scan")
@click.option("--x-min", type=float, required=True)
@click.option("--x-max", type=float, required=True)
@click.option("--points", type=int, default=25)
@click.option("--log-grid", is_flag=True, default=False)
@click.option("--out", type=click.Path(), default=None,
              help="CSV output path (stdout when omitted).")
def fg_scan(x_min, x_max, points, log_grid, out):
    """Root-gap degeneration grid of the one-parameter family."""
    if not (0 < x_min <= x_max):
        raise click.UsageError("need 0 < x-min <= x-max")
    grid = (np.geomspace(x_min, x_max, points) if log_grid
            else np.linspace(x_min, x_max, points))
    rows = [r.to_dict() for r in ver.counterexample_scan(grid)]
    columns = ["x", "ratio_gamma", "ratio_delta", "root_length"]
    if out is None:
        click.echo(",".join(columns))
        for row in rows:
            click.echo(",".join(_fmt(row[c]) for c in columns))
    else:
        _write_csv(out, columns, rows, {
            "x": "family parameter",
            "ratio_gamma": "signed lambda_1/lambda_2 of the first generator",
            "ratio_delta": "signed lambda_1/lambda_2 of the second generator",
            "root_length": "log of the top eigenvalue gap",
        })
    agree = all(abs(r["ratio_gamma"] - r["ratio_delta"])
                <= 1e-8 * abs(r["ratio_gamma"]) for r in rows)
    return 0 if agree else 1


@cli.command()
@click.option("--p", type=int, required=True)
@click.option("--q", type=int, required=True)
@click.option("--count", type=int, default=100)
@click.option("--seed", type=int, required=True,
              help="RNG seed; required for reproducibility.")
@click.option("--entry-max", type=float, default=2.0)
@click.option("--out", type=click.Path(), default=None)
def sopq(p, q, count, seed, entry_max, out):
    """Build random positive elements and check the positivity coefficients."""
    data = sopq_form(p, q)
    rng = np.random.default_rng(seed)
    half_h = coxeter_number_B(p - 1) // 2
    m = q - p + 2
    rows = []
    ok = True
    for i in range(count):
        vbars = []
        for _ in range(half_h):
            scalars = [float(rng.uniform(1e-6, entry_max))
                       for _ in range(p - 2)]
            v = np.zeros(m)
            v[0] = rng.uniform(1e-6, entry_max)
            v[-1] = (-1.0) ** (p - 1) * rng.uniform(1e-6, entry_max)
            vbars.append(scalars + [v])
        p_el = sopq_positive(data, vbars)
        resid = float(np.linalg.norm(
            p_el.entries.T @ data.Q @ p_el.entries - data.Q, 2))
        row = {"index": i, "q_residual": resid}
        for k in range(1, p - 2):
            c, ci = ver.sopq_positivity_coeffs(p_el, data, k)
            defect = ver.sopq_model_triple_defect(data, p_el, k)
            row[f"coeff_k{k}"] = c
            row[f"coeff_inv_k{k}"] = ci
            row[f"model_defect_k{k}"] = defect
            ok = ok and c > 0 and ci > 0 and defect > 1e-6
        ok = ok and resid <= 1e-10 * float(np.linalg.norm(data.Q, 2)) * 100
        rows.append(row)
    _write_json({
        "command": "sopq", "p": p, "q": q, "count": count, "seed": seed,
        "all_positive": ok,
        "max_q_residual": max(r["q_residual"] for r in rows),
        "rows": rows,
    }, out)
    return 0 if ok else 1


def main(argv=None) -> int:
    try:
        result = cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.ClickException as exc:
        exc.show()
        return 64
    except AnosovLabError as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)},
                  sys.stderr)
        sys.stderr.write("\n")
        return 3
    return int(result or 0)


if __name__ == "__main__":
    sys.exit(main())
