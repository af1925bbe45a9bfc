"""Command-line front end.

Subcommands: density (curve export), entropy-table (exact/float tables for
both ensembles), verify (exact conjecture-identity and Pfaffian checks),
mc (log-gas validation campaign), schema-check (validate emitted files).

Every command writes a JSON manifest next to its data outputs; runs are
byte-identical for identical inputs and seed, up to the manifest timing
field.  Exit codes: 0 ok, 1 verification failure, 2 invalid parameters,
3 I/O failure, 4 unhealthy Monte Carlo acceptance rate.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .density import (
    DensityCurve,
    UnsupportedParamsError,
    default_cutoff,
    fixed_moment,
    level_density_fixed,
    level_density_unrestricted,
    tabulate_density,
    unrestricted_moment,
)
from .ensemble import EnsembleParams, normalization_C_exact
from .entropy import (
    entropy_report,
    purity_difference_exact,
    avg_purity_exact,
    hs_purity_exact,
    verify_conjecture_identities,
)
from .exact import ExactScalar
from .loggas import (
    ChainConfig,
    fixed_trace_samples,
    mc_entropy_estimates,
    run_chains,
)
from .pfaffian import (
    build_H,
    build_H_exact,
    pf_H_closed,
    pf_H_closed_exact,
    pf_H_minor,
    pf_H_minor_exact,
    pfaffian_generic,
)
from .specfun import DomainError

FORMAT_VERSION = 1

_SCHEMAS = {
    "density_curve": ["x", "density", "marginal_density"],
    "entropy_table": [
        "quantity",
        "n",
        "m",
        "bh_exact",
        "bh_value",
        "hs_exact",
        "hs_value",
        "conjecture_exact",
        "conjecture_matches",
    ],
    "mc_histogram": ["ensemble", "bin_lo", "bin_hi", "mc_density", "analytic_density"],
    "density_overlay": ["ensemble", "x", "analytic_density"],
    "mc_estimates": ["quantity", "estimate", "std_error", "exact_value", "sigmas"],
    "snapshots": None,  # variable column count
}


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _write_csv(path, header, rows):
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise CliError(3, f"cannot write {path}: {exc}") from exc


def _write_json(path, payload):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise CliError(3, f"cannot write {path}: {exc}") from exc


def _manifest(outdir, command, params, outputs, t_start):
    payload = {
        "command": command,
        "params": params,
        "outputs": outputs,
        "versions": {"library": __version__, "format": FORMAT_VERSION},
        "timing": {"wall_seconds": round(time.time() - t_start, 3)},
    }
    _write_json(os.path.join(outdir, "manifest.json"), payload)


def _ensure_outdir(path) -> str:
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise CliError(3, f"cannot create output directory {path}: {exc}") from exc
    return path


def _params_from_args(args) -> EnsembleParams:
    try:
        return EnsembleParams.from_dims(args.n, args.m)
    except (DomainError, ValueError) as exc:
        raise CliError(2, str(exc)) from exc


# ---------------------------------------------------------------------------
# density


def cmd_density(args) -> int:
    t0 = time.time()
    params = _params_from_args(args)
    ensemble = "fixed_trace" if args.ensemble == "fixed" else "unrestricted"
    outdir = _ensure_outdir(args.out)
    try:
        curve = tabulate_density(params, ensemble, points=args.points, marginal=True)
    except UnsupportedParamsError as exc:
        raise CliError(2, str(exc)) from exc

    base = f"density_{args.ensemble}_n{params.n}_m{params.m}"
    rows = [(_fmt(x), _fmt(r1), _fmt(marg)) for x, r1, marg in curve.rows()]
    outputs = []
    if args.format == "csv":
        path = os.path.join(outdir, base + ".csv")
        _write_csv(path, _SCHEMAS["density_curve"], rows)
    else:
        path = os.path.join(outdir, base + ".json")
        _write_json(
            path,
            {
                "schema": "density_curve",
                "rows": [
                    {"x": x, "density": d, "marginal_density": g} for x, d, g in rows
                ],
            },
        )
    outputs.append({"path": os.path.basename(path), "schema": "density_curve", "version": FORMAT_VERSION})
    _manifest(
        outdir,
        "density",
        {
            "n": params.n,
            "m": params.m,
            "ensemble": args.ensemble,
            "points": args.points,
            "format": args.format,
            "mass": curve.normalization,
            "marginal_mass": curve.marginal_normalization,
        },
        outputs,
        t0,
    )
    return 0


# ---------------------------------------------------------------------------
# entropy table


def _exact_str(s: ExactScalar | None) -> str:
    return s.table_str() if s is not None else ""


def cmd_entropy_table(args) -> int:
    t0 = time.time()
    if not (1 <= args.n_max <= args.m_max):
        raise CliError(2, f"need 1 <= n_max <= m_max, got {args.n_max}, {args.m_max}")
    quantities = [q.strip() for q in args.quantities.split(",") if q.strip()]
    for q in quantities:
        if q not in ("von_neumann", "purity", "linear"):
            raise CliError(2, f"unknown quantity {q!r}")
    outdir = _ensure_outdir(args.out)
    rows = []
    for quantity in quantities:
        for n in range(1, args.n_max + 1):
            for m in range(n, args.m_max + 1):
                rep = entropy_report(EnsembleParams.from_dims(n, m), quantity)
                rows.append(
                    (
                        quantity,
                        n,
                        m,
                        _exact_str(rep.bures_hall_exact),
                        f"{rep.bures_hall:.7g}",
                        _exact_str(rep.hilbert_schmidt_exact),
                        f"{rep.hilbert_schmidt:.7g}",
                        _exact_str(rep.conjecture_exact),
                        str(rep.conjecture_matches).lower(),
                    )
                )
    outputs = []
    if args.format == "csv":
        path = os.path.join(outdir, "entropy_table.csv")
        _write_csv(path, _SCHEMAS["entropy_table"], rows)
    else:
        path = os.path.join(outdir, "entropy_table.json")
        _write_json(
            path,
            {
                "schema": "entropy_table",
                "rows": [dict(zip(_SCHEMAS["entropy_table"], r)) for r in rows],
            },
        )
    outputs.append({"path": os.path.basename(path), "schema": "entropy_table", "version": FORMAT_VERSION})
    _manifest(
        outdir,
        "entropy-table",
        {"n_max": args.n_max, "m_max": args.m_max, "quantities": quantities, "format": args.format},
        outputs,
        t0,
    )
    return 0


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    t0 = time.time()
    if not (1 <= args.n_max <= args.m_max):
        raise CliError(2, f"need 1 <= n_max <= m_max, got {args.n_max}, {args.m_max}")
    outdir = _ensure_outdir(args.out)
    cells = []
    all_ok = True
    for n in range(1, args.n_max + 1):
        for m in range(n, args.m_max + 1):
            params = EnsembleParams.from_dims(n, m)
            chk = verify_conjecture_identities(params)
            pf_ok = _pfaffian_cell_ok(params)
            norm_ok = (
                normalization_C_exact(params) * math.factorial(n) * pf_H_closed_exact(params)
                - ExactScalar.one()
            ).is_zero
            diff_ok = (
                avg_purity_exact(params)
                - hs_purity_exact(n, m)
                - purity_difference_exact(n, m)
            ).is_zero
            cell_ok = chk.all_ok and pf_ok and diff_ok and norm_ok
            cells.append(
                {
                    "n": n,
                    "m": m,
                    "vn_residual": chk.vn_residual.table_str(),
                    "purity_residual": chk.purity_residual.table_str(),
                    "pfaffian_ok": pf_ok,
                    "purity_difference_ok": diff_ok,
                    "ok": cell_ok,
                }
            )
            all_ok = all_ok and cell_ok
    quad_ok = True
    if not args.skip_quadrature:
        for n in range(1, args.n_max + 1):
            for m in range(n, args.m_max + 1):
                params = EnsembleParams.from_dims(n, m)
                if abs(unrestricted_moment(params, 0.0) - n) > 1e-7:
                    quad_ok = False
                if n >= 2:
                    if abs(fixed_moment(params, 0.0) - n) > 1e-7:
                        quad_ok = False
                    if abs(fixed_moment(params, 1.0) - 1.0) > 1e-7:
                        quad_ok = False
    all_ok = all_ok and quad_ok
    report = {
        "schema": "verify_report",
        "version": FORMAT_VERSION,
        "range": {"n_max": args.n_max, "m_max": args.m_max},
        "cells": cells,
        "quadrature_normalizations_ok": quad_ok,
        "all_ok": all_ok,
    }
    path = os.path.join(outdir, "verify_report.json")
    _write_json(path, report)
    _manifest(
        outdir,
        "verify",
        {"n_max": args.n_max, "m_max": args.m_max, "skip_quadrature": args.skip_quadrature},
        [{"path": "verify_report.json", "schema": "verify_report", "version": FORMAT_VERSION}],
        t0,
    )
    if not all_ok:
        bad = [c for c in cells if not c["ok"]]
        where = ", ".join(f"({c['n']},{c['m']})" for c in bad) or "quadrature"
        print(f"verification FAILED at {where}; see {path}", file=sys.stderr)
        return 1
    return 0


def _pfaffian_cell_ok(params: EnsembleParams) -> bool:
    closed = pf_H_closed_exact(params)
    generic = pfaffian_generic(build_H_exact(params))
    if not (closed - generic).is_zero:
        return False
    if abs(pf_H_closed(params) / pfaffian_generic(build_H(params)) - 1.0) > 1e-10:
        return False
    for j in range(1, params.N):
        for k in range(j + 1, params.N + 1):
            if not (_exact_minor_via_generic(params, j, k) - pf_H_minor_exact(params, j, k)).is_zero:
                return False
    return True


def _exact_minor_via_generic(params: EnsembleParams, j: int, k: int):
    h = build_H_exact(params)
    keep = [i for i in range(params.N) if i not in (j - 1, k - 1)]
    minor = [[h[r][c] for c in keep] for r in keep]
    out = pfaffian_generic(minor)
    return out if isinstance(out, ExactScalar) else ExactScalar.from_rational(out)


# ---------------------------------------------------------------------------
# mc


def _transformed_edges(params, ensemble: str, bins: int):
    # variance-taming coordinates: arcsine for fixed trace, sqrt for unrestricted
    if ensemble == "fixed_trace":
        s = np.linspace(0.0, 1.0, bins + 1)
        return np.sin(0.5 * math.pi * s) ** 2, s
    smax = math.sqrt(default_cutoff(params))
    s = np.linspace(0.0, smax, bins + 1)
    return s**2, s


def _bin_masses(params, ensemble: str, edges: np.ndarray) -> np.ndarray:
    # analytic marginal mass per bin via per-bin Gauss nodes in the
    # singularity-removing coordinate
    x, w = np.polynomial.legendre.leggauss(24)
    masses = np.empty(len(edges) - 1)
    for i in range(len(edges) - 1):
        if ensemble == "fixed_trace":
            ta, tb = math.asin(math.sqrt(edges[i])), math.asin(math.sqrt(edges[i + 1]))
            t = 0.5 * (tb - ta) * x + 0.5 * (ta + tb)
            wt = 0.5 * (tb - ta) * w
            vals = [level_density_fixed(params, float(math.sin(v) ** 2)) for v in t]
            masses[i] = float(np.sum(wt * np.sin(2.0 * t) * vals))
        else:
            ua, ub = math.sqrt(edges[i]), math.sqrt(edges[i + 1])
            u = 0.5 * (ub - ua) * x + 0.5 * (ua + ub)
            wt = 0.5 * (ub - ua) * w
            vals = [level_density_unrestricted(params, float(v * v)) for v in u]
            masses[i] = float(np.sum(wt * 2.0 * u * vals))
    return masses / params.n


def histogram_comparison(params, ensemble: str, values: np.ndarray, bins: int = 32):
    """Histogram the samples against the analytic marginal.

    Returns (edges, mc_density, analytic_density, sup_norm) with densities
    per unit of the transformed coordinate, where both curves are bounded.
    """
    edges, s_edges = _transformed_edges(params, ensemble, bins)
    widths = np.diff(s_edges)
    counts, _ = np.histogram(values, bins=edges)
    mc_density = counts / (values.size * widths)
    analytic = _bin_masses(params, ensemble, edges) / widths
    sup = float(np.max(np.abs(mc_density - analytic)))
    return edges, mc_density, analytic, sup


def cmd_mc(args) -> int:
    t0 = time.time()
    params = _params_from_args(args)
    outdir = _ensure_outdir(args.out)
    steps = int(args.steps)
    burn = int(args.burn_in) if args.burn_in is not None else steps // 5
    thin = int(args.thin) if args.thin is not None else 2 * params.n
    try:
        cfg = ChainConfig(
            params=params, n_steps=steps, burn_in=burn, thin=thin, seed=args.seed
        )
    except DomainError as exc:
        raise CliError(2, str(exc)) from exc

    import warnings as _warnings

    with _warnings.catch_warnings(record=True) as caught:
        _warnings.simplefilter("always")
        result = run_chains(cfg, chains=args.chains)
    mus = fixed_trace_samples(result.samples)

    hist_rows = []
    overlay_rows = []
    sup_norms = {}
    for ensemble, values in (
        ("unrestricted", result.samples.ravel()),
        ("fixed_trace", mus.ravel()),
    ):
        if params.n == 1 and ensemble == "fixed_trace":
            continue
        edges, mc_d, an_d, sup = histogram_comparison(params, ensemble, values, bins=args.bins)
        sup_norms[ensemble] = sup
        for i in range(len(mc_d)):
            hist_rows.append(
                (ensemble, _fmt(edges[i]), _fmt(edges[i + 1]), _fmt(mc_d[i]), _fmt(an_d[i]))
            )
        if ensemble == "fixed_trace":
            grid = np.linspace(1e-4, 1.0 - 1e-4, 257)
            dens = [level_density_fixed(params, float(x)) / params.n for x in grid]
        else:
            grid = np.linspace(1e-4, default_cutoff(params), 257)
            dens = [level_density_unrestricted(params, float(x)) / params.n for x in grid]
        overlay_rows.extend((ensemble, _fmt(x), _fmt(d)) for x, d in zip(grid, dens))

    est_rows = []
    checks = {}
    exact_vals = {
        "purity": avg_purity_exact(params).to_float(),
        "von_neumann": entropy_report(params, "von_neumann").bures_hall,
    }
    for quantity in ("purity", "von_neumann"):
        mean, se = mc_entropy_estimates(mus, quantity)
        sig = abs(mean - exact_vals[quantity]) / se if se > 0 else math.inf
        est_rows.append(
            (quantity, _fmt(mean), _fmt(se), _fmt(exact_vals[quantity]), _fmt(sig))
        )
        checks[quantity + "_within_3_sigma"] = bool(sig <= 3.0)

    _write_csv(os.path.join(outdir, "mc_histogram.csv"), _SCHEMAS["mc_histogram"], hist_rows)
    _write_csv(os.path.join(outdir, "mc_overlay.csv"), _SCHEMAS["density_overlay"], overlay_rows)
    _write_csv(os.path.join(outdir, "mc_estimates.csv"), _SCHEMAS["mc_estimates"], est_rows)
    summary = {
        "schema": "mc_summary",
        "version": FORMAT_VERSION,
        "acceptance_rate": result.acceptance_rate,
        "acceptance_healthy": result.acceptance_healthy,
        "proposal_width": result.proposal_width,
        "snapshots": int(mus.shape[0]),
        "sup_norms": sup_norms,
        "sup_norm_pass": bool(all(v <= 0.02 for v in sup_norms.values())),
        "estimate_checks": checks,
    }
    _write_json(os.path.join(outdir, "mc_summary.json"), summary)
    outputs = [
        {"path": "mc_histogram.csv", "schema": "mc_histogram", "version": FORMAT_VERSION},
        {"path": "mc_overlay.csv", "schema": "density_overlay", "version": FORMAT_VERSION},
        {"path": "mc_estimates.csv", "schema": "mc_estimates", "version": FORMAT_VERSION},
        {"path": "mc_summary.json", "schema": "mc_summary", "version": FORMAT_VERSION},
    ]
    if args.dump_samples:
        from .loggas import export_snapshots_csv

        export_snapshots_csv(mus, os.path.join(outdir, "mc_snapshots.csv"))
        outputs.append({"path": "mc_snapshots.csv", "schema": "snapshots", "version": FORMAT_VERSION})
    _manifest(
        outdir,
        "mc",
        {
            "n": params.n,
            "m": params.m,
            "steps": steps,
            "burn_in": burn,
            "thin": thin,
            "chains": args.chains,
            "seed": args.seed,
            "bins": args.bins,
        },
        outputs,
        t0,
    )
    if not result.acceptance_healthy:
        print(
            f"acceptance rate {result.acceptance_rate:.3f} still unhealthy after tuning",
            file=sys.stderr,
        )
        return 4
    return 0


# ---------------------------------------------------------------------------
# schema-check


def cmd_schema_check(args) -> int:
    path = args.path
    if not os.path.exists(path):
        raise CliError(2, f"no such file: {path}")
    manifest_path = os.path.join(os.path.dirname(os.path.abspath(path)), "manifest.json")
    if not os.path.exists(manifest_path):
        raise CliError(2, f"no manifest next to {path}")
    try:
        with open(manifest_path, encoding="utf-8") as fh:
            manifest = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(2, f"unreadable manifest: {exc}") from exc
    name = os.path.basename(path)
    entry = next((o for o in manifest.get("outputs", []) if o.get("path") == name), None)
    if entry is None:
        raise CliError(2, f"{name} is not declared in the manifest")
    schema = entry.get("schema")
    if path.endswith(".json"):
        try:
            with open(path, encoding="utf-8") as fh:
                payload = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(2, f"invalid JSON: {exc}") from exc
        if isinstance(payload, dict) and payload.get("schema") not in (None, schema):
            raise CliError(2, f"schema mismatch: file says {payload.get('schema')}, manifest says {schema}")
        return 0
    expected = _SCHEMAS.get(schema)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise CliError(2, "empty CSV")
            if expected is not None and header != expected:
                raise CliError(2, f"header {header} does not match schema {schema}")
            width = len(header)
            for row in reader:
                if len(row) != width:
                    raise CliError(2, f"ragged row in {name}")
    except OSError as exc:
        raise CliError(3, f"cannot read {path}: {exc}") from exc
    return 0


# ---------------------------------------------------------------------------
# entry point


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bureshall",
        description="Bures-Hall ensemble densities, entropies, and Monte Carlo validation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    pd = sub.add_parser("density", help="export a level-density curve")
    pd.add_argument("--n", type=int, required=True)
    pd.add_argument("--m", type=int, required=True)
    pd.add_argument("--ensemble", choices=["unrestricted", "fixed"], required=True)
    pd.add_argument("--points", type=int, default=512)
    pd.add_argument("--format", choices=["csv", "json"], default="csv")
    pd.add_argument("--out", default=".")
    pd.set_defaults(func=cmd_density)

    pt = sub.add_parser("entropy-table", help="reproduce the exact entropy tables")
    pt.add_argument("--n-max", type=int, default=6)
    pt.add_argument("--m-max", type=int, default=6)
    pt.add_argument("--quantities", default="von_neumann,purity")
    pt.add_argument("--format", choices=["csv", "json"], default="csv")
    pt.add_argument("--out", default=".")
    pt.set_defaults(func=cmd_entropy_table)

    pv = sub.add_parser("verify", help="run the exact identity and invariant suites")
    pv.add_argument("--n-max", type=int, default=8)
    pv.add_argument("--m-max", type=int, default=8)
    pv.add_argument("--skip-quadrature", action="store_true")
    pv.add_argument("--out", default=".")
    pv.set_defaults(func=cmd_verify)

    pm = sub.add_parser("mc", help="log-gas Monte Carlo validation campaign")
    pm.add_argument("--n", type=int, required=True)
    pm.add_argument("--m", type=int, required=True)
    pm.add_argument("--steps", type=lambda s: int(float(s)), required=True,
                    help="single-particle steps per chain (accepts 2e6 style)")
    pm.add_argument("--burn-in", type=lambda s: int(float(s)), default=None)
    pm.add_argument("--thin", type=int, default=None)
    pm.add_argument("--chains", type=int, default=1)
    pm.add_argument("--seed", type=int, default=0)
    pm.add_argument("--bins", type=int, default=32)
    pm.add_argument("--dump-samples", action="store_true")
    pm.add_argument("--out", default=".")
    pm.set_defaults(func=cmd_mc)

    ps = sub.add_parser("schema-check", help="validate an emitted file against its manifest")
    ps.add_argument("path")
    ps.set_defaults(func=cmd_schema_check)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
