"""Command-line reports: sample scatter files, peak-envelope PDF/CDF tables,
generator validation, outage sweeps, and the sparse-deployment correlation
table.

Every subcommand resolves its configuration from three layers (built-in
defaults, an optional JSON config file, explicit flags), writes the fully
resolved configuration next to its outputs, emits RFC-4180 CSV / JSON data
files with 9 significant digits, renders PNG companions unless figures are
disabled, and finishes with a manifest of SHA-256 hashes so a re-run with
the same configuration can be checked byte for byte. Failures print a
machine-readable JSON line on stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .chan_gen import (
    ChannelEnsemble,
    GeneratorConfig,
    derive_seed,
    generate_copula,
    generate_physical,
    write_ensemble_csv,
)
from .correlation import (
    FasGeometry,
    empirical_pearson,
    envelope_correlation,
    gain_correlation,
    jakes_matrix,
    normal_scores_correlation,
)
from .copula import peak_cdf, peak_pdf
from .nakagami import NakagamiParams, cdf, quantile
from .outage import (
    OutageQuery,
    copula_covariance,
    monte_carlo_curves,
    op_monte_carlo_paired,
    op_tas,
    op_theory,
    tas_theory_curve,
    theory_curve,
    write_curve_csv,
)
from . import plotting

__all__ = ["main", "build_parser"]

FMT = "%.9g"

COMMON_DEFAULTS = {
    "seed": 0,
    "out": ".",
    "threads": 1,
    "figures": True,
}

COMMAND_DEFAULTS = {
    "scatter": {
        "n_ports": 2,
        "m": 3.0,
        "mu": 1.0,
        "apertures": [0.1, 0.3, 0.5],
        "samples": 5000,
    },
    "pdf-cdf": {
        "n_ports": 2,
        "m": 3.0,
        "mu": 1.0,
        "aperture": 0.5,
        "samples": 1_000_000,
        "tol": 1e-3,
        "r_max": 6.0,
        "r_step": 0.05,
    },
    "validate": {
        "n_ports": 10,
        "aperture": 1.0,
        "mu": 1.0,
        "m_list": [1, 2, 3],
        "samples": 1_000_000,
    },
    "op-sweep": {
        "axis": "snr_db",
        "grid": "0:30:2.5",
        "n_ports": 10,
        "aperture": 0.5,
        "m": 3.0,
        "mu": 1.0,
        "threshold_db": 10.0,
        "snr_db": 10.0,
        "samples": 1_000_000,
        "tol": 1e-4,
        "adaptive": False,
    },
    "corr-table": {
        "configs": [[10, 3.5], [8, 2.5]],
        "m": 3.0,
        "mu": 1.0,
        "samples": 1_000_000,
    },
}

SWEEP_AXES = ("snr_db", "aperture", "n_ports", "m", "mu")


def _parse_float_list(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(tok) for tok in str(text).split(",") if tok.strip()]


def _parse_grid(spec):
    """Grid specs: 'start:stop:step' (stop inclusive) or a comma list."""
    if isinstance(spec, (list, tuple)):
        return [float(v) for v in spec]
    text = str(spec)
    if ":" in text:
        start, stop, step = (float(tok) for tok in text.split(":"))
        if step <= 0:
            raise ValueError("grid step must be positive")
        return list(np.arange(start, stop + 0.5 * step, step))
    return _parse_float_list(text)


def _parse_configs(spec):
    """Port-count/aperture pairs: '10:3.5,8:2.5' or [[10, 3.5], ...]."""
    if isinstance(spec, (list, tuple)):
        pairs = [(int(n), float(w)) for n, w in spec]
    else:
        pairs = []
        for tok in str(spec).split(","):
            n, w = tok.split(":")
            pairs.append((int(n), float(w)))
    if not pairs:
        raise ValueError("at least one port-count/aperture pair is required")
    return pairs


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_table_csv(path: Path, header, rows) -> None:
    def fmt(x):
        if x is None:
            return ""
        if isinstance(x, str):
            return x
        if isinstance(x, (int, np.integer)):
            return str(int(x))
        return FMT % x

    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(x) for x in row) + "\n")


def resolve_config(command: str, args: argparse.Namespace) -> dict:
    resolved = dict(COMMON_DEFAULTS)
    resolved.update(COMMAND_DEFAULTS[command])
    if getattr(args, "config", None):
        with open(args.config) as fh:
            loaded = json.load(fh)
        unknown = set(loaded) - set(resolved) - {"experiment"}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        resolved.update(loaded)
    for key in list(resolved):
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = value
    if getattr(args, "no_figures", False):
        resolved["figures"] = False
    if getattr(args, "adaptive", False):
        resolved["adaptive"] = True
    resolved["experiment"] = command
    return resolved


def _ensemble_panels(resolved, geom, params, root_seed, threads):
    """The four generator variants compared in the scatter report."""
    K = int(resolved["samples"])
    phys = generate_physical(
        GeneratorConfig(geom=geom, params=params, seed=derive_seed(root_seed, 0), n_samples=K),
        threads=threads,
    )
    estimated = normal_scores_correlation(phys.envelopes)
    coeff = jakes_matrix(geom)
    enve = envelope_correlation(gain_correlation(coeff), params.m)
    variants = [
        ("physical", phys),
        ("copula_normal_scores",
         generate_copula(geom, params, estimated, derive_seed(root_seed, 1), K, threads)),
        ("copula_coefficient",
         generate_copula(geom, params, coeff, derive_seed(root_seed, 2), K, threads)),
        ("copula_envelope",
         generate_copula(geom, params, enve, derive_seed(root_seed, 3), K, threads)),
    ]
    return variants


def cmd_scatter(resolved: dict, out: Path):
    if int(resolved["n_ports"]) != 2:
        raise ValueError("the scatter report is defined for 2-port geometries")
    params = NakagamiParams(m=float(resolved["m"]), mu=float(resolved["mu"]))
    apertures = _parse_float_list(resolved["apertures"])
    resolved["apertures"] = apertures
    threads = int(resolved["threads"])
    data_files, figure_files = [], []
    for wi, aperture in enumerate(apertures):
        geom = FasGeometry(n_ports=2, aperture=aperture)
        variants = _ensemble_panels(
            resolved, geom, params, derive_seed(int(resolved["seed"]), wi), threads
        )
        for tag, ensemble in variants:
            name = f"scatter_W{aperture:g}_{tag}.csv"
            write_ensemble_csv(ensemble, out / name)
            data_files.append(name)
        if resolved["figures"]:
            fig_name = f"scatter_W{aperture:g}.png"
            plotting.save_scatter_grid(
                out / fig_name,
                [(tag, ens.envelopes) for tag, ens in variants],
                suptitle=f"aperture W = {aperture:g} wavelengths, "
                         f"m = {params.m:g}, spread = {params.mu:g}",
            )
            figure_files.append(fig_name)
    return data_files, figure_files


def cmd_pdf_cdf(resolved: dict, out: Path):
    geom = FasGeometry(n_ports=int(resolved["n_ports"]), aperture=float(resolved["aperture"]))
    params = NakagamiParams(m=float(resolved["m"]), mu=float(resolved["mu"]))
    K = int(resolved["samples"])
    tol = float(resolved["tol"])
    seed = int(resolved["seed"])
    threads = int(resolved["threads"])
    step = float(resolved["r_step"])
    r = np.arange(0.0, float(resolved["r_max"]) + 0.5 * step, step)

    ensemble = generate_physical(
        GeneratorConfig(geom=geom, params=params, seed=derive_seed(seed, 0), n_samples=K),
        threads=threads,
    )
    peak = np.sort(ensemble.envelopes.max(axis=1))
    cdf_mc = np.searchsorted(peak, r, side="right") / K
    half = 0.5 * step
    pdf_mc = (
        np.searchsorted(peak, r + half, side="right")
        - np.searchsorted(peak, r - half, side="right")
    ) / (K * step)

    h = 1e-3 * np.sqrt(params.mu)
    theory = {}
    for ci, choice in enumerate(("coefficient", "envelope")):
        cov = copula_covariance(geom, params, choice)
        cdf_col = np.array([
            peak_cdf(ri, params, cov, tol=tol, seed=derive_seed(seed, 1, ci, j))
            for j, ri in enumerate(r)
        ])
        # The density at the origin vanishes for m > 1/2; points inside the
        # difference stencil are pinned there rather than extrapolated.
        pdf_col = np.array([
            peak_pdf(ri, params, cov, tol=tol, seed=derive_seed(seed, 2, ci, j), h=h)
            if ri > h else 0.0
            for j, ri in enumerate(r)
        ])
        theory[choice] = (pdf_col, cdf_col)

    rows = [
        (
            r[i], pdf_mc[i], cdf_mc[i],
            theory["coefficient"][0][i], theory["coefficient"][1][i],
            theory["envelope"][0][i], theory["envelope"][1][i],
        )
        for i in range(r.size)
    ]
    name = "pdf_cdf.csv"
    _write_table_csv(
        out / name,
        ["r", "pdf_mc", "cdf_mc", "pdf_coeff", "cdf_coeff", "pdf_enve", "cdf_enve"],
        rows,
    )
    data_files, figure_files = [name], []
    if resolved["figures"]:
        plotting.save_pdf_cdf(
            out / "pdf_cdf.png",
            r,
            {
                "simulation": (pdf_mc, cdf_mc),
                "copula coefficient": theory["coefficient"],
                "copula envelope": theory["envelope"],
            },
            suptitle=f"peak envelope, N = {geom.n_ports}, W = {geom.aperture:g}",
        )
        figure_files.append("pdf_cdf.png")
    return data_files, figure_files


RMSE_THRESHOLD = 1e-3
CORR_THRESHOLD = 1e-2


def marginal_fidelity(ensemble: ChannelEnsemble, params: NakagamiParams, n_bins: int = 200):
    """Binned PDF and pointwise CDF RMSE of pooled port samples vs theory.

    The PDF error is measured on per-bin probability masses, the resolution
    at which a finite ensemble can be compared against the analytic density.
    """
    samples = np.sort(ensemble.envelopes.ravel())
    edges = np.linspace(0.0, float(quantile(params, 0.9999)), n_bins + 1)
    emp_mass = np.histogram(samples, bins=edges)[0] / samples.size
    ana_cdf = cdf(params, edges)
    ana_mass = np.diff(ana_cdf)
    pdf_rmse = float(np.sqrt(np.mean((emp_mass - ana_mass) ** 2)))
    emp_cdf = np.searchsorted(samples, edges[1:], side="right") / samples.size
    cdf_rmse = float(np.sqrt(np.mean((emp_cdf - ana_cdf[1:]) ** 2)))
    return pdf_rmse, cdf_rmse


def cmd_validate(resolved: dict, out: Path):
    geom = FasGeometry(n_ports=int(resolved["n_ports"]), aperture=float(resolved["aperture"]))
    mu = float(resolved["mu"])
    K = int(resolved["samples"])
    seed = int(resolved["seed"])
    threads = int(resolved["threads"])
    m_list = [float(m) for m in _parse_float_list(resolved["m_list"])]
    resolved["m_list"] = m_list

    per_m = {}
    for mi, m in enumerate(m_list):
        params = NakagamiParams(m=m, mu=mu)
        ensemble = generate_physical(
            GeneratorConfig(geom=geom, params=params, seed=derive_seed(seed, mi), n_samples=K),
            threads=threads,
        )
        pdf_rmse, cdf_rmse = marginal_fidelity(ensemble, params)
        predicted = envelope_correlation(gain_correlation(jakes_matrix(geom)), m)
        measured = empirical_pearson(ensemble, transform="envelope")
        corr_diff = float(np.max(np.abs(measured.entries - predicted.entries)))
        per_m[f"{m:g}"] = {
            "pdf_rmse": pdf_rmse,
            "cdf_rmse": cdf_rmse,
            "corr_max_abs_diff": corr_diff,
            "pdf_pass": bool(pdf_rmse < RMSE_THRESHOLD),
            "cdf_pass": bool(cdf_rmse < RMSE_THRESHOLD),
            "corr_pass": bool(corr_diff < CORR_THRESHOLD),
        }
    report = {
        "n_ports": geom.n_ports,
        "aperture": geom.aperture,
        "mu": mu,
        "n_samples": K,
        "seed": seed,
        "thresholds": {"rmse": RMSE_THRESHOLD, "corr": CORR_THRESHOLD},
        "per_m": per_m,
        "all_pass": bool(all(
            entry["pdf_pass"] and entry["cdf_pass"] and entry["corr_pass"]
            for entry in per_m.values()
        )),
    }
    name = "validate_report.json"
    _write_json(out / name, report)
    data_files, figure_files = [name], []
    if resolved["figures"]:
        plotting.save_validation_report(out / "validate_report.png", report)
        figure_files.append("validate_report.png")
    return data_files, figure_files


def _sweep_query(resolved: dict, axis: str, value: float) -> OutageQuery:
    n_ports = int(resolved["n_ports"])
    aperture = float(resolved["aperture"])
    m = float(resolved["m"])
    mu = float(resolved["mu"])
    snr_db = float(resolved["snr_db"])
    if axis == "n_ports":
        if abs(value - round(value)) > 1e-9:
            raise ValueError("n_ports sweep values must be integers")
        n_ports = int(round(value))
    elif axis == "aperture":
        aperture = value
    elif axis == "m":
        m = value
    elif axis == "mu":
        mu = value
    elif axis == "snr_db":
        snr_db = value
    return OutageQuery(
        snr_db=snr_db,
        threshold_db=float(resolved["threshold_db"]),
        geom=FasGeometry(n_ports=n_ports, aperture=aperture),
        params=NakagamiParams(m=m, mu=mu),
    )


def cmd_op_sweep(resolved: dict, out: Path):
    axis = str(resolved["axis"])
    if axis not in SWEEP_AXES:
        raise ValueError(f"axis must be one of {SWEEP_AXES}")
    grid = _parse_grid(resolved["grid"])
    resolved["grid"] = grid
    K = int(resolved["samples"])
    tol = float(resolved["tol"])
    seed = int(resolved["seed"])
    threads = int(resolved["threads"])

    data_files, figure_files = [], []
    if axis == "snr_db":
        base = _sweep_query(resolved, axis, grid[0])
        coeff = theory_curve(base, grid, "coefficient", tol, derive_seed(seed, 0), threads)
        enve = theory_curve(base, grid, "envelope", tol, derive_seed(seed, 1), threads)
        fas, tas_mc = monte_carlo_curves(
            base, grid, K=K, seed=derive_seed(seed, 2), threads=threads,
            adaptive=bool(resolved["adaptive"]),
        )
        tas = tas_theory_curve(base, grid)
        curves = [fas, coeff, enve, tas, tas_mc]
        for curve in curves:
            name = f"op_sweep_{curve.method}.csv"
            write_curve_csv(out / name, [curve])
            data_files.append(name)
        series = [
            (c.method, c.snr_db, c.op, np.asarray(c.meta["stderr"]) if "stderr" in c.meta else None)
            for c in curves
        ]
    else:
        per_method = {m: [] for m in ("mc_fas", "theory_coeff", "theory_enve", "tas_theory", "tas_mc")}
        for vi, value in enumerate(sorted(grid)):
            q = _sweep_query(resolved, axis, value)
            coeff = op_theory(q, "coefficient", tol=tol, seed=derive_seed(seed, 0, vi))
            enve = op_theory(q, "envelope", tol=tol, seed=derive_seed(seed, 1, vi))
            pair = op_monte_carlo_paired(q, K, seed=derive_seed(seed, 2, vi))
            per_method["theory_coeff"].append((value, coeff, None, "theory_coeff", tol, seed))
            per_method["theory_enve"].append((value, enve, None, "theory_enve", tol, seed))
            per_method["mc_fas"].append((value, pair["fas"][0], pair["fas"][1], "mc_fas", K, seed))
            per_method["tas_mc"].append((value, pair["tas"][0], pair["tas"][1], "tas_mc", K, seed))
            per_method["tas_theory"].append((value, op_tas(q), None, "tas_theory", None, None))
        header = [axis, "op", "stderr", "method", "K_or_tol", "seed"]
        for method, rows in per_method.items():
            name = f"op_sweep_{method}.csv"
            _write_table_csv(out / name, header, rows)
            data_files.append(name)
        series = [
            (
                method,
                [row[0] for row in rows],
                [row[1] for row in rows],
                [row[2] for row in rows] if rows[0][2] is not None else None,
            )
            for method, rows in per_method.items()
        ]
    if resolved["figures"]:
        plotting.save_outage_curves(
            out / "op_sweep.png", axis, series,
            suptitle=f"outage sweep over {axis}",
        )
        figure_files.append("op_sweep.png")
    return data_files, figure_files


def sparse_table_rows(geom: FasGeometry, params: NakagamiParams, K: int, seed: int, threads: int = 1):
    """Empirical envelope correlations of the three generators at one geometry.

    Rows cover port pairs (1, 2) and (1, 4) through (1, N): the first-port
    separations reported for sparse deployments, where separation 2 is
    omitted. Returns (labels, separations, sim, coeff, enve).
    """
    phys = generate_physical(
        GeneratorConfig(geom=geom, params=params, seed=derive_seed(seed, 0), n_samples=K),
        threads=threads,
    )
    sim = empirical_pearson(phys).entries
    coeff_cov = jakes_matrix(geom)
    coeff = empirical_pearson(
        generate_copula(geom, params, coeff_cov, derive_seed(seed, 1), K, threads)
    ).entries
    enve_cov = copula_covariance(geom, params, "envelope")
    enve = empirical_pearson(
        generate_copula(geom, params, enve_cov, derive_seed(seed, 2), K, threads)
    ).entries
    separations = [1] + list(range(3, geom.n_ports))
    labels = [f"ports 1-{1 + s}" for s in separations]
    return (
        labels,
        separations,
        [float(sim[0, s]) for s in separations],
        [float(coeff[0, s]) for s in separations],
        [float(enve[0, s]) for s in separations],
    )


def cmd_corr_table(resolved: dict, out: Path):
    configs = _parse_configs(resolved["configs"])
    resolved["configs"] = [[n, w] for n, w in configs]
    params = NakagamiParams(m=float(resolved["m"]), mu=float(resolved["mu"]))
    K = int(resolved["samples"])
    seed = int(resolved["seed"])
    threads = int(resolved["threads"])

    rows = []
    figure_files = []
    for ci, (n_ports, aperture) in enumerate(configs):
        geom = FasGeometry(n_ports=n_ports, aperture=aperture)
        labels, seps, sim, coeff, enve = sparse_table_rows(
            geom, params, K, derive_seed(seed, ci), threads
        )
        for i, sep in enumerate(seps):
            rows.append(
                (n_ports, aperture, labels[i], sep, sim[i], coeff[i], enve[i])
            )
        if resolved["figures"]:
            fig_name = f"corr_table_N{n_ports}_W{aperture:g}.png"
            plotting.save_corr_table(
                out / fig_name,
                f"N = {n_ports}, W = {aperture:g}, m = {params.m:g}",
                labels, sim, coeff, enve,
            )
            figure_files.append(fig_name)
    name = "corr_table.csv"
    _write_table_csv(
        out / name,
        ["n_ports", "aperture", "ports", "separation", "sim", "coeff", "enve"],
        rows,
    )
    return [name], figure_files


COMMANDS = {
    "scatter": cmd_scatter,
    "pdf-cdf": cmd_pdf_cdf,
    "validate": cmd_validate,
    "op-sweep": cmd_op_sweep,
    "corr-table": cmd_corr_table,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="root seed; all work items derive from it")
    common.add_argument("--out", help="output directory (created if missing)")
    common.add_argument("--config", help="JSON file overriding built-in defaults")
    common.add_argument("--threads", type=int, help="worker threads for sweeps and sampling")
    common.add_argument("--samples", type=int, help="Monte Carlo sample count K")
    common.add_argument("--tol", type=float, help="copula CDF integration tolerance")
    common.add_argument("--no-figures", action="store_true", help="write data files only")

    parser = argparse.ArgumentParser(
        prog="fascopula",
        description="Correlated Nakagami fading and copula outage reports "
                    "for fluid antenna systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scatter", parents=[common],
                       help="paired-port envelope samples from the four generators")
    p.add_argument("--apertures", help="comma list of apertures in wavelengths")
    p.add_argument("--m", type=float)
    p.add_argument("--mu", type=float)

    p = sub.add_parser("pdf-cdf", parents=[common],
                       help="peak-envelope density and CDF, simulation vs both copulas")
    p.add_argument("--n-ports", type=int, dest="n_ports")
    p.add_argument("--aperture", type=float)
    p.add_argument("--m", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--r-max", type=float, dest="r_max")
    p.add_argument("--r-step", type=float, dest="r_step")

    p = sub.add_parser("validate", parents=[common],
                       help="marginal and correlation fidelity report for the generator")
    p.add_argument("--n-ports", type=int, dest="n_ports")
    p.add_argument("--aperture", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--m-list", dest="m_list", help="comma list of shape parameters")

    p = sub.add_parser("op-sweep", parents=[common],
                       help="outage probability sweep over SNR, geometry, or fading shape")
    p.add_argument("--axis", choices=SWEEP_AXES)
    p.add_argument("--grid", help="'start:stop:step' or comma list of axis values")
    p.add_argument("--n-ports", type=int, dest="n_ports")
    p.add_argument("--aperture", type=float)
    p.add_argument("--m", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--threshold-db", type=float, dest="threshold_db")
    p.add_argument("--snr-db", type=float, dest="snr_db",
                   help="fixed SNR when sweeping a non-SNR axis")
    p.add_argument("--adaptive", action="store_true",
                   help="grow K per point to resolve small outage probabilities")

    p = sub.add_parser("corr-table", parents=[common],
                       help="first-port correlation table under sparse deployments")
    p.add_argument("--configs", help="port-count:aperture pairs, e.g. '10:3.5,8:2.5'")
    p.add_argument("--m", type=float)
    p.add_argument("--mu", type=float)

    return parser


def run(args: argparse.Namespace) -> int:
    resolved = resolve_config(args.command, args)
    out = Path(resolved["out"])
    out.mkdir(parents=True, exist_ok=True)
    data_files, figure_files = COMMANDS[args.command](resolved, out)

    # The output directory is where the files live, not part of what was
    # computed; leaving it out keeps re-runs into different directories
    # byte-identical.
    resolved_payload = {"version": __version__,
                        **{k: v for k, v in resolved.items() if k != "out"}}
    _write_json(out / "resolved_config.json", resolved_payload)
    manifest = {
        "experiment": args.command,
        "version": __version__,
        "seed": int(resolved["seed"]),
        "config": "resolved_config.json",
        "outputs": {
            name: _sha256(out / name)
            for name in sorted(data_files + ["resolved_config.json"])
        },
        "figures": sorted(figure_files),
    }
    _write_json(out / "manifest.json", manifest)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except Exception as exc:  # the CLI boundary reports, not raises
        sys.stderr.write(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n"
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
