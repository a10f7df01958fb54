"""Command-line entry point.

Subcommands: interva, insilico, simulate, compare, oracle, validate-p.
Every run writes its outputs plus a manifest.json recording the resolved
configuration, input digests, seed and tool version, so any run can be
reproduced bit-identically from its manifest.

Exit codes: 0 success, 1 validation findings, 2 input errors,
3 dimension errors, 4 runtime or numeric errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import asdict, dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .core import (
    CondProbMatrix,
    ConstraintSet,
    ConstraintReferenceError,
    Csmf,
    DimensionError,
    ParseError,
    ValidationError,
    VacodaError,
    detect_p_mode,
    dump_cond_prob_matrix,
    dump_csmf,
    dump_symptom_matrix,
    load_cond_prob_matrix,
    load_constraints,
    load_csmf,
    load_symptom_matrix,
    validate_cond_prob_matrix,
)
from .evaluate import (
    DEFAULT_COMPARE_GIBBS,
    METHODS,
    ComparisonSummary,
    run_comparison,
)
from .insilico import (
    GibbsConfig,
    exact_posterior_oracle,
    run_gibbs,
    summarize,
)
from .interva import run_interva
from .simgen import (
    ScenarioConfig,
    empirical_grade_weights,
    make_scenario,
)

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_INPUT = 2
EXIT_DIMENSION = 3
EXIT_RUNTIME = 4


# ---------------------------------------------------------------------------
# Manifest
# ---------------------------------------------------------------------------

@dataclass
class RunManifest:
    subcommand: str
    argv: list[str]
    resolved_config: dict[str, Any]
    inputs: dict[str, dict[str, Any]]
    outputs: dict[str, str]
    seed: int | None
    tool_version: str
    started_utc: str
    finished_utc: str = ""

    def write(self, out_dir: Path) -> Path:
        self.finished_utc = _utc_now()
        path = out_dir / "manifest.json"
        path.write_text(
            json.dumps(asdict(self), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        return path


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _input_meta(paths: Sequence[Path | None]) -> dict[str, dict[str, Any]]:
    meta: dict[str, dict[str, Any]] = {}
    for p in paths:
        if p is None:
            continue
        meta[str(p)] = {"sha256": _sha256_file(p), "size": p.stat().st_size}
    return meta


def _start_manifest(args: argparse.Namespace, config: dict[str, Any],
                    inputs: Sequence[Path | None]) -> RunManifest:
    return RunManifest(
        subcommand=args.cmd,
        argv=list(getattr(args, "_argv", [])),
        resolved_config=config,
        inputs=_input_meta(inputs),
        outputs={},
        seed=getattr(args, "seed", None),
        tool_version=__version__,
        started_utc=_utc_now(),
    )


def _finish(manifest: RunManifest, out_dir: Path, written: Sequence[Path]) -> None:
    manifest.outputs = {p.name: _sha256_file(p) for p in written}
    manifest.write(out_dir)


# ---------------------------------------------------------------------------
# Table writers
# ---------------------------------------------------------------------------

def _write_table(path: Path, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> Path:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _cell(v: Any) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (np.floating,)):
        return repr(float(v))
    return str(v)


def _write_per_death_table(
    path: Path,
    death_ids: Sequence[str],
    cause_names: Sequence[str],
    probs: np.ndarray,
    missing_counts: np.ndarray,
) -> Path:
    header = ["death", "missing_count", *cause_names]
    rows = [
        [death, int(miss), *(float(x) for x in row)]
        for death, miss, row in zip(death_ids, missing_counts, probs)
    ]
    return _write_table(path, header, rows)


# ---------------------------------------------------------------------------
# Input loading helpers
# ---------------------------------------------------------------------------

def _load_p(path: Path, mode: str) -> CondProbMatrix:
    if mode == "auto":
        mode = detect_p_mode(path)
    return load_cond_prob_matrix(path, mode)


def _parse_keyvalue_file(path: Path) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"{path}: line {lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _scenario_from_file(path: Path | None, seed: int | None) -> ScenarioConfig:
    kv = _parse_keyvalue_file(path) if path else {}
    kwargs: dict[str, Any] = {}
    if "scenario" in kv:
        kwargs["scenario"] = kv.pop("scenario")
    for key in ("n_deaths", "n_causes", "n_symptoms", "seed"):
        if key in kv:
            kwargs[key] = int(kv.pop(key))
    for key in ("false_negative_rate", "false_positive_rate"):
        if key in kv:
            kwargs[key] = float(kv.pop(key))
    if "rescale_range" in kv:
        parts = kv.pop("rescale_range").split(",")
        if len(parts) != 2:
            raise ParseError("rescale_range needs two comma-separated numbers")
        kwargs["rescale_range"] = (float(parts[0]), float(parts[1]))
    if "true_csmf" in kv:
        spec = kv.pop("true_csmf")
        if spec != "random-simplex":
            kwargs["true_csmf"] = load_csmf(Path(spec))
    if "grade_weights" in kv:
        kwargs["grade_weights"] = np.array(
            [float(x) for x in kv.pop("grade_weights").split(",")]
        )
    if "grade_weights_from" in kv:
        p = _load_p(Path(kv.pop("grade_weights_from")), "auto")
        kwargs["grade_weights"] = empirical_grade_weights(p)
    if kv:
        raise ParseError(f"unknown scenario config keys: {', '.join(sorted(kv))}")
    cfg = ScenarioConfig(**kwargs)
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    return cfg


def _gibbs_from_file(path: Path | None, args: argparse.Namespace) -> GibbsConfig:
    kv = _parse_keyvalue_file(path) if path else {}
    kwargs: dict[str, Any] = {}
    for key in ("n_chains", "n_iterations", "burn_in", "thin", "seed"):
        if key in kv:
            kwargs[key] = int(kv.pop(key))
    if "prob_clamp_epsilon" in kv:
        kwargs["prob_clamp_epsilon"] = float(kv.pop("prob_clamp_epsilon"))
    if "alpha" in kv:
        parts = [float(x) for x in kv.pop("alpha").split(",")]
        kwargs["alpha"] = parts[0] if len(parts) == 1 else np.array(parts)
    if "f_init" in kv:
        kwargs["f_init"] = load_csmf(Path(kv.pop("f_init")))
    if kv:
        raise ParseError(f"unknown sampler config keys: {', '.join(sorted(kv))}")
    # Command-line flags override file values.
    for flag, key in (
        ("chains", "n_chains"), ("iterations", "n_iterations"),
        ("burn_in", "burn_in"), ("thin", "thin"),
        ("epsilon", "prob_clamp_epsilon"), ("alpha", "alpha"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            kwargs[key] = value
    if getattr(args, "seed", None) is not None:
        kwargs["seed"] = args.seed
    return GibbsConfig(**kwargs)


def _csmf_config_echo(c: Csmf | None) -> Any:
    if c is None:
        return None
    return {name: float(f) for name, f in zip(c.cause_names, c.fractions)}


def _scenario_echo(cfg: ScenarioConfig) -> dict[str, Any]:
    return {
        "scenario": cfg.scenario,
        "n_deaths": cfg.n_deaths,
        "n_causes": cfg.n_causes,
        "n_symptoms": cfg.n_symptoms,
        "true_csmf": _csmf_config_echo(cfg.true_csmf) or "random-simplex",
        "grade_weights": [float(w) for w in cfg.grade_weights],
        "rescale_range": list(cfg.rescale_range),
        "false_negative_rate": cfg.false_negative_rate,
        "false_positive_rate": cfg.false_positive_rate,
        "seed": cfg.seed,
    }


def _gibbs_echo(cfg: GibbsConfig) -> dict[str, Any]:
    alpha = np.atleast_1d(np.asarray(cfg.alpha, dtype=float))
    return {
        "n_chains": cfg.n_chains,
        "n_iterations": cfg.n_iterations,
        "burn_in": cfg.burn_in,
        "thin": cfg.thin,
        "alpha": [float(a) for a in alpha],
        "seed": cfg.seed,
        "f_init": _csmf_config_echo(cfg.f_init) or "prior-mean",
        "prob_clamp_epsilon": cfg.prob_clamp_epsilon,
    }


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_interva(args: argparse.Namespace) -> int:
    out_dir = _ensure_out(args.out)
    s = load_symptom_matrix(args.symptoms)
    p = _load_p(args.p, args.p_mode)
    prior = load_csmf(args.prior) if args.prior else None

    result = run_interva(s, p, prior)

    config = {
        "symptoms": str(args.symptoms),
        "p": str(args.p),
        "p_mode": args.p_mode,
        "prior": str(args.prior) if args.prior else "uniform",
    }
    manifest = _start_manifest(args, config, [args.symptoms, args.p, args.prior])

    csmf_path = out_dir / "csmf.csv"
    dump_csmf(result.csmf, csmf_path)
    written = [
        csmf_path,
        _write_per_death_table(
            out_dir / "per_death_probs.csv", result.death_ids,
            result.cause_names, result.per_death_probs, result.missing_counts,
        ),
        _write_table(out_dir / "exclusions.csv", ["death"],
                     [[d] for d in result.excluded_death_ids]),
    ]
    _finish(manifest, out_dir, written)
    print(f"assigned {s.n_deaths - result.n_excluded} deaths; "
          f"{result.n_excluded} undefined (excluded)")
    return EXIT_OK


def cmd_insilico(args: argparse.Namespace) -> int:
    out_dir = _ensure_out(args.out)
    s = load_symptom_matrix(args.symptoms)
    p = _load_p(args.p, args.p_mode)
    cfg = _gibbs_from_file(args.config, args)

    chains = run_gibbs(s, p, cfg)
    summary = summarize(chains, level=args.level)

    config = {
        "symptoms": str(args.symptoms),
        "p": str(args.p),
        "p_mode": args.p_mode,
        "config_file": str(args.config) if args.config else None,
        "gibbs": _gibbs_echo(cfg),
        "interval_level": args.level,
        "converged": summary.converged,
    }

    oracle_report = None
    if args.oracle_check:
        oracle = exact_posterior_oracle(
            s, p, cfg.resolve_alpha(p.n_causes), cfg.prob_clamp_epsilon
        )
        csmf_dev = float(np.abs(
            summary.csmf_mean.fractions - oracle.csmf_mean.fractions
        ).max())
        death_dev = float(np.abs(
            summary.per_death_probs - oracle.per_death_marginals
        ).max())
        oracle_report = {"max_csmf_deviation": csmf_dev,
                         "max_per_death_deviation": death_dev}
        config["oracle_check"] = oracle_report
        print(f"oracle check: max csmf deviation {csmf_dev:.6f}, "
              f"max per-death deviation {death_dev:.6f}")

    manifest = _start_manifest(args, config, [args.symptoms, args.p, args.config])

    psrf_cells = (
        [float(v) for v in summary.psrf] if summary.psrf is not None
        else ["unavailable"] * p.n_causes
    )
    written = [
        _write_table(
            out_dir / "csmf_summary.csv",
            ["cause", "mean", "lower", "upper", "scale_reduction"],
            [
                [name, float(m), float(lo), float(hi), psrf]
                for name, m, (lo, hi), psrf in zip(
                    summary.cause_names, summary.csmf_mean.fractions,
                    summary.csmf_intervals, psrf_cells,
                )
            ],
        ),
        _write_per_death_table(
            out_dir / "per_death_probs.csv", summary.death_ids,
            summary.cause_names, summary.per_death_probs, s.missing_counts,
        ),
        _write_per_death_table(
            out_dir / "per_death_probs_rb.csv", summary.death_ids,
            summary.cause_names, summary.per_death_probs_rb, s.missing_counts,
        ),
    ]
    if args.raw_draws:
        rows = []
        for chain in chains:
            for i, f in enumerate(chain.f_draws):
                rows.append([chain.chain_id, i, *[float(x) for x in f]])
        written.append(_write_table(
            out_dir / "draws.csv",
            ["chain", "draw", *summary.cause_names],
            rows,
        ))
    _finish(manifest, out_dir, written)

    if summary.converged is None:
        print("convergence diagnostics unavailable (single chain)")
    else:
        print(f"converged: {summary.converged} "
              f"(max scale reduction {float(summary.psrf.max()):.4f})")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    out_dir = _ensure_out(args.out)
    cfg = _scenario_from_file(args.config, args.seed)
    dataset = make_scenario(cfg)

    manifest = _start_manifest(args, _scenario_echo(cfg), [args.config])

    truth_rows = [
        [death, dataset.p_true.cause_names[c]]
        for death, c in zip(dataset.symptoms.death_ids, dataset.true_causes)
    ]
    paths = {
        "symptoms.csv": lambda path: dump_symptom_matrix(dataset.symptoms, path),
        "p_true.csv": lambda path: dump_cond_prob_matrix(dataset.p_true, path),
        "p_method.csv": lambda path: dump_cond_prob_matrix(dataset.p_given_to_methods, path),
        "true_csmf.csv": lambda path: dump_csmf(dataset.true_csmf, path),
    }
    written = []
    for name, writer in paths.items():
        path = out_dir / name
        writer(path)
        written.append(path)
    written.append(_write_table(out_dir / "truth.csv", ["death", "cause"], truth_rows))
    _finish(manifest, out_dir, written)
    print(f"wrote {cfg.scenario} dataset: {cfg.n_deaths} deaths, "
          f"{cfg.n_causes} causes, {cfg.n_symptoms} symptoms")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    out_dir = _ensure_out(args.out)
    cfg = _scenario_from_file(args.config, args.seed)
    gibbs_cfg = _gibbs_from_file(args.gibbs_config, args) if (
        args.gibbs_config or any(
            getattr(args, f, None) is not None
            for f in ("chains", "iterations", "burn_in", "thin", "epsilon", "alpha")
        )
    ) else replace(DEFAULT_COMPARE_GIBBS, seed=args.seed or 0)

    summary = run_comparison(
        cfg, args.replicates, gibbs_cfg, bins=args.bins, threads=args.threads,
        interva_prior=args.interva_prior,
    )

    config = {
        "scenario": _scenario_echo(cfg),
        "gibbs": _gibbs_echo(gibbs_cfg),
        "replicates": args.replicates,
        "bins": args.bins,
        "interva_prior": args.interva_prior,
        "figures": not args.no_figures,
    }
    manifest = _start_manifest(args, config, [args.config, args.gibbs_config])

    written = [_write_replicate_table(out_dir, summary)]
    written.append(_write_summary_table(out_dir, summary))
    written.extend(_write_hist_tables(out_dir, summary))
    if not args.no_figures:
        from .figures import render_comparison_figures

        written.extend(render_comparison_figures(summary, out_dir))
    _finish(manifest, out_dir, written)

    for method in METHODS:
        acc = summary.accuracy_stats[method]
        tv = summary.tv_stats[method]
        print(f"{method}: accuracy median {acc.median:.4f} "
              f"[{acc.min:.4f}, {acc.max:.4f}], tv median {tv.median:.4f}")
    if summary.n_failed:
        print(f"failed replicates: {summary.n_failed}")
    return EXIT_OK


def _write_replicate_table(out_dir: Path, summary: ComparisonSummary) -> Path:
    rows = [
        [r.replicate_id, r.method, r.individual_accuracy, r.csmf_tv,
         float(r.csmf_abs_errors.max())]
        for r in summary.replicates
    ]
    return _write_table(
        out_dir / "replicates.csv",
        ["replicate", "method", "individual_accuracy", "csmf_tv", "csmf_max_abs_error"],
        rows,
    )


def _write_summary_table(out_dir: Path, summary: ComparisonSummary) -> Path:
    rows = []
    for metric, stats in (("accuracy", summary.accuracy_stats),
                          ("csmf_tv", summary.tv_stats)):
        for method in METHODS:
            st = stats[method]
            rows.append([metric, method, st.mean, st.median, st.q1, st.q3,
                         st.min, st.max, st.n])
    return _write_table(
        out_dir / "summary.csv",
        ["metric", "method", "mean", "median", "q1", "q3", "min", "max", "n"],
        rows,
    )


def _write_hist_tables(out_dir: Path, summary: ComparisonSummary) -> list[Path]:
    out = []
    for name, hist in (("accuracy_hist.csv", summary.accuracy_hist),
                       ("tv_hist.csv", summary.tv_hist)):
        edges = hist.bin_edges
        rows = [
            [float(edges[i]), float(edges[i + 1]),
             *[int(hist.counts[m][i]) for m in METHODS]]
            for i in range(len(edges) - 1)
        ]
        out.append(_write_table(
            out_dir / name, ["bin_left", "bin_right", *METHODS], rows,
        ))
    return out


def cmd_oracle(args: argparse.Namespace) -> int:
    out_dir = _ensure_out(args.out)
    s = load_symptom_matrix(args.symptoms)
    p = _load_p(args.p, args.p_mode)
    if args.alpha is not None:
        alpha = np.full(p.n_causes, float(args.alpha))
    else:
        alpha = np.ones(p.n_causes)

    result = exact_posterior_oracle(s, p, alpha, args.epsilon or 0.0)

    config = {
        "symptoms": str(args.symptoms),
        "p": str(args.p),
        "alpha": [float(a) for a in alpha],
        "epsilon": args.epsilon or 0.0,
    }
    manifest = _start_manifest(args, config, [args.symptoms, args.p])
    csmf_path = out_dir / "oracle_csmf.csv"
    dump_csmf(result.csmf_mean, csmf_path)
    written = [
        csmf_path,
        _write_per_death_table(
            out_dir / "oracle_per_death.csv", result.death_ids,
            result.cause_names, result.per_death_marginals, s.missing_counts,
        ),
    ]
    _finish(manifest, out_dir, written)
    print(f"enumerated {p.n_causes}**{s.n_deaths} assignments exactly")
    return EXIT_OK


def cmd_validate_p(args: argparse.Namespace) -> int:
    out_dir = _ensure_out(args.out)
    p = _load_p(args.p, args.p_mode)
    constraints = load_constraints(args.constraints) if args.constraints else ConstraintSet()

    violations = validate_cond_prob_matrix(p, constraints, tol=args.tol)

    config = {
        "p": str(args.p),
        "p_mode": args.p_mode,
        "constraints": str(args.constraints) if args.constraints else None,
        "tol": args.tol,
        "n_violations": len(violations),
    }
    manifest = _start_manifest(args, config, [args.p, args.constraints])
    rows = [
        [v.constraint, v.cause, ";".join(repr(x) for x in v.observed), v.residual]
        for v in violations
    ]
    written = [_write_table(
        out_dir / "violations.csv",
        ["constraint", "cause", "observed", "residual"], rows,
    )]
    _finish(manifest, out_dir, written)
    print(f"{len(violations)} violation(s) found")
    return EXIT_FINDINGS if violations else EXIT_OK


def _ensure_out(out: str) -> Path:
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--out", default=".", help="Output directory (created if needed).")
    sub.add_argument("--seed", type=int, default=None,
                     help="Master seed; overrides any seed in a config file.")
    sub.add_argument("--threads", type=int, default=1,
                     help="Worker processes for parallel replicates.")


def _add_p_mode(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--p-mode", choices=("auto", "letters", "numeric"),
                     default="auto", dest="p_mode",
                     help="Cell coding of the probability matrix file.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vacoda",
        description="Verbal-autopsy cause-of-death assignment and comparison toolkit.",
    )
    parser.add_argument("--version", action="version", version=f"vacoda {__version__}")
    sub = parser.add_subparsers(dest="cmd", required=True)

    iv = sub.add_parser("interva", help="Deterministic propensity-based assignment.")
    iv.add_argument("symptoms", type=Path, help="Symptom matrix file.")
    iv.add_argument("p", type=Path, help="Conditional probability matrix file.")
    iv.add_argument("--prior", type=Path, default=None,
                    help="Prior cause fractions file (default: uniform).")
    _add_p_mode(iv)
    _add_common(iv)
    iv.set_defaults(func=cmd_interva)

    ins = sub.add_parser("insilico", help="Bayesian Gibbs-sampler assignment.")
    ins.add_argument("symptoms", type=Path)
    ins.add_argument("p", type=Path)
    ins.add_argument("--config", type=Path, default=None,
                     help="Sampler config file (key = value lines).")
    ins.add_argument("--chains", type=int, default=None)
    ins.add_argument("--iterations", type=int, default=None)
    ins.add_argument("--burn-in", type=int, default=None, dest="burn_in")
    ins.add_argument("--thin", type=int, default=None)
    ins.add_argument("--alpha", type=float, default=None,
                     help="Symmetric Dirichlet concentration.")
    ins.add_argument("--epsilon", type=float, default=None,
                     help="Probability clamp for likelihood evaluation.")
    ins.add_argument("--level", type=float, default=0.95,
                     help="Credible interval level.")
    ins.add_argument("--raw-draws", action="store_true",
                     help="Also write every retained fraction draw.")
    ins.add_argument("--oracle-check", action="store_true",
                     help="Compare against exact enumeration (small instances only).")
    _add_p_mode(ins)
    _add_common(ins)
    ins.set_defaults(func=cmd_insilico)

    sim = sub.add_parser("simulate", help="Generate one synthetic dataset.")
    sim.add_argument("--config", type=Path, default=None,
                     help="Scenario config file (key = value lines).")
    _add_common(sim)
    sim.set_defaults(func=cmd_simulate)

    cmp_ = sub.add_parser("compare", help="Replicated two-method comparison.")
    cmp_.add_argument("--config", type=Path, default=None,
                      help="Scenario config file.")
    cmp_.add_argument("--replicates", type=int, default=100)
    cmp_.add_argument("--gibbs-config", type=Path, default=None, dest="gibbs_config",
                      help="Sampler config file for the Bayesian method.")
    cmp_.add_argument("--chains", type=int, default=None)
    cmp_.add_argument("--iterations", type=int, default=None)
    cmp_.add_argument("--burn-in", type=int, default=None, dest="burn_in")
    cmp_.add_argument("--thin", type=int, default=None)
    cmp_.add_argument("--alpha", type=float, default=None)
    cmp_.add_argument("--epsilon", type=float, default=None)
    cmp_.add_argument("--bins", type=int, default=20,
                      help="Histogram bins for plot-data emission.")
    cmp_.add_argument("--interva-prior", choices=("uniform", "truth"),
                      default="uniform", dest="interva_prior",
                      help="Prior guess handed to the deterministic method.")
    cmp_.add_argument("--no-figures", action="store_true",
                      help="Skip PNG rendering; keep only delimited outputs.")
    _add_common(cmp_)
    cmp_.set_defaults(func=cmd_compare)

    orc = sub.add_parser("oracle", help="Exact posterior by enumeration (small instances).")
    orc.add_argument("symptoms", type=Path)
    orc.add_argument("p", type=Path)
    orc.add_argument("--alpha", type=float, default=None,
                     help="Symmetric Dirichlet concentration (default 1).")
    orc.add_argument("--epsilon", type=float, default=None,
                     help="Probability clamp (default 0: unclamped model).")
    _add_p_mode(orc)
    _add_common(orc)
    orc.set_defaults(func=cmd_oracle)

    val = sub.add_parser("validate-p", help="Check a probability matrix for consistency.")
    val.add_argument("p", type=Path)
    val.add_argument("--constraints", type=Path, default=None,
                     help="Constraint file (SUM/LEQ lines).")
    val.add_argument("--tol", type=float, default=1e-9)
    _add_p_mode(val)
    _add_common(val)
    val.set_defaults(func=cmd_validate_p)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(argv) if argv is not None else sys.argv[1:]
    parser = build_parser()
    args = parser.parse_args(argv)
    args._argv = argv
    try:
        return args.func(args)
    except (ParseError, ValidationError, ConstraintReferenceError,
            FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DimensionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except VacodaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
