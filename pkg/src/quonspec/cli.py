"""Batch front door: config parsing, subcommand dispatch, deterministic runs.

Exit codes: 0 success, 1 validation error (bad flags, bad config, bad
input files), 2 computation error (fit non-convergence, calibration
failure).  All randomness flows from the config seed, so identical
configs reproduce output files byte for byte.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, bounds, permsym, qfock, report
from .config import RunConfig, default_config, load_config
from .synth import Spectrum


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quonspec",
        description="quantum-statistics violation toolkit: Gram matrices, "
        "symmetry projectors, synthetic forbidden-line spectra, and "
        "beta2_half upper limits",
    )
    parser.add_argument("--version", action="version", version=f"quonspec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gram = sub.add_parser("gram", help="Gram-matrix positivity report")
    p_gram.add_argument("--n", type=int, required=True, help="particle number")
    p_gram.add_argument("--q", type=float, required=True, help="deformation parameter in [-1, 1]")
    p_gram.add_argument("--tol", type=float, default=1e-10, help="PSD tolerance")
    p_gram.add_argument("--out", type=Path, help="write the JSON report here instead of stdout")
    p_gram.add_argument("--csv", type=Path, help="also write the Gram entries as CSV")
    p_gram.add_argument("--figures", type=Path, help="directory for a rendered heatmap")
    p_gram.set_defaults(func=cmd_gram)

    p_proj = sub.add_parser("project", help="symmetry classes / density-matrix decomposition")
    p_proj.add_argument("--n", type=int, required=True, help="particle number (2-4)")
    p_proj.add_argument("--rho", type=Path, help="density matrix JSON to decompose")
    p_proj.add_argument("--out", type=Path, help="write the JSON report here instead of stdout")
    p_proj.add_argument("--figures", type=Path, help="directory for a class-weight bar chart")
    p_proj.set_defaults(func=cmd_project)

    for name, help_text, func in (
        ("catalog", "build a rovibrational line catalog", cmd_catalog),
        ("synth", "render a synthetic absorbance spectrum", cmd_synth),
        ("fit", "fit a spectrum and bound beta2_half", cmd_fit),
        ("calibrate", "Monte-Carlo coverage calibration", cmd_calibrate),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, help="TOML run config (defaults used if omitted)")
        p.add_argument("--print-config", action="store_true", help="print the effective config and exit")
        p.add_argument("--figures", type=Path, help="directory for rendered figures")
        if name == "fit":
            p.add_argument("--spectrum", type=Path, help="spectrum CSV to fit (default: synthesize from config)")
        if name == "calibrate":
            p.add_argument("--trials", type=int, help="override [calibrate].n_trials")
        p.add_argument("--out", type=Path, help="primary output path (default under [output].directory)")
        p.set_defaults(func=func)
    return parser


def _load(args) -> RunConfig:
    return load_config(args.config) if args.config else default_config()


def _emit(text: str, path) -> None:
    if path is None:
        print(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)


def _out_path(args, config: RunConfig, default_name: str) -> Path:
    path = args.out if args.out else Path(config.output_dir) / default_name
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _figure_dir(args):
    if args.figures is None:
        return None
    fig_dir = Path(args.figures)
    fig_dir.mkdir(parents=True, exist_ok=True)
    return fig_dir


def cmd_gram(args) -> int:
    pos = qfock.check_positivity(args.n, args.q, tol=args.tol)
    payload = json.loads(pos.to_json())
    payload["meta"] = {"tool_version": __version__}
    _emit(json.dumps(payload, sort_keys=True), args.out)
    if args.csv or args.figures:
        gram = qfock.gram_matrix(args.n, args.q)
        if args.csv:
            Path(args.csv).parent.mkdir(parents=True, exist_ok=True)
            Path(args.csv).write_text(gram.to_csv())
        fig_dir = _figure_dir(args)
        if fig_dir:
            report.save_gram_figure(gram, fig_dir / f"gram_n{args.n}.png")
    return 0


def cmd_project(args) -> int:
    if args.rho:
        rho = permsym.DensityMatrix.from_json(Path(args.rho).read_text())
        weights = permsym.symmetry_decompose(rho, args.n)
        payload = json.loads(permsym.decomposition_to_json(args.n, weights))
    else:
        projectors = permsym.young_projectors(args.n)
        payload = {
            "n": args.n,
            "classes": [
                {
                    "partition": permsym.partition_label(p.partition),
                    "irrep_dimension": p.irrep_dimension,
                    "class_dimension": p.class_dimension,
                }
                for p in projectors
            ],
        }
        weights = {
            p.partition: p.class_dimension / p.matrix.shape[0] for p in projectors
        }
    payload["meta"] = {"tool_version": __version__}
    _emit(json.dumps(payload, sort_keys=True), args.out)
    fig_dir = _figure_dir(args)
    if fig_dir:
        labeled = {permsym.partition_label(k): v for k, v in weights.items()}
        report.save_class_weight_figure(args.n, labeled, fig_dir / f"classes_n{args.n}.png")
    return 0


def cmd_catalog(args) -> int:
    config = _load(args)
    if args.print_config:
        print(config.to_toml(), end="")
        return 0
    catalog = config.injected_catalog()
    csv_path = _out_path(args, config, "catalog.csv")
    csv_path.write_text(catalog.to_csv())
    json_path = csv_path.with_suffix(".json")
    json_path.write_text(_with_meta(catalog.to_json(), config))
    fig_dir = _figure_dir(args)
    if fig_dir:
        report.save_catalog_figure(catalog, fig_dir / "catalog.png")
    print(f"wrote {csv_path} ({len(catalog.lines)} lines)")
    return 0


def cmd_synth(args) -> int:
    config = _load(args)
    if args.print_config:
        print(config.to_toml(), end="")
        return 0
    from .synth import synthesize

    catalog = config.injected_catalog()
    spectrum = synthesize(
        catalog, config.grid(), config.shape, config.column, config.snr, config.seed
    )
    spectrum.meta["config_sha256"] = config.sha256()
    csv_path = _out_path(args, config, "spectrum.csv")
    csv_path.write_text(spectrum.to_csv())
    meta_path = csv_path.with_suffix(".meta.json")
    meta_path.write_text(spectrum.meta_json())
    fig_dir = _figure_dir(args)
    if fig_dir:
        report.save_spectrum_figure(spectrum, fig_dir / "spectrum.png")
        report.save_catalog_figure(catalog, fig_dir / "catalog.png")
    print(f"wrote {csv_path} ({spectrum.grid.size} samples)")
    return 0


def cmd_fit(args) -> int:
    config = _load(args)
    if args.print_config:
        print(config.to_toml(), end="")
        return 0
    if args.spectrum:
        meta_path = Path(args.spectrum).with_suffix(".meta.json")
        meta_text = meta_path.read_text() if meta_path.exists() else "{}"
        spectrum = Spectrum.from_csv(Path(args.spectrum).read_text(), meta_text)
        bound, model, scan = bounds.bound_from_spectrum(spectrum, config)
    else:
        bound, model, spectrum, scan = bounds.run_bound_pipeline(config)
    out_path = _out_path(args, config, "bound.json")
    out_path.write_text(bound.to_json(meta=config.provenance()))
    fig_dir = _figure_dir(args)
    if fig_dir:
        report.save_fit_figure(spectrum, model, scan, fig_dir / "fit.png")
    print(bound.summary())
    return 0


def cmd_calibrate(args) -> int:
    config = _load(args)
    if args.print_config:
        print(config.to_toml(), end="")
        return 0
    coverage = bounds.mc_calibrate(config, n_trials=args.trials)
    out_path = _out_path(args, config, "coverage.json")
    out_path.write_text(coverage.to_json(meta=config.provenance()))
    fig_dir = _figure_dir(args)
    if fig_dir:
        report.save_calibration_figure(coverage, fig_dir / "calibration.png")
    print(coverage.summary())
    return 0


def _with_meta(json_text: str, config: RunConfig) -> str:
    payload = json.loads(json_text)
    payload["meta"] = {"tool_version": __version__, **config.provenance()}
    return json.dumps(payload, sort_keys=True)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
