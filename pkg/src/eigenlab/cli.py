"""Command-line front end.

    eigenlab SUBCOMMAND --config PATH --out DIR [--seed N] [--quiet]

Exit codes: 0 when every check passed, 1 when a check failed (a replay
block is written next to the outputs), 2 for usage or configuration errors.
"""

from __future__ import annotations

import argparse
import io
import sys
from pathlib import Path

import numpy as np

from . import abstract_model as am
from .config import REQUIRED, ConfigError, ExperimentConfig
from .convergence import (
    default_schedule,
    eigenspace_rotation_stress,
    rearrangement_stress,
    truncation_curve,
    verify_decay,
)
from .errors import DomainError, HypothesisError
from .lattice import (
    MAX_RADIUS,
    NormSpec,
    hoermander_norm,
    modes_in_ball,
    synthesize_member,
    weyl_count_ratio,
    write_field_csv,
)
from .or_functions import classify_embedding, estimate_indices, or_from_params
from .report import key_value_block, render_svg

__all__ = ["run", "main"]

ROTATION_TOL = 1e-10


class _Result:
    """Files to write, lines to print and whether every check passed."""

    def __init__(self):
        self.files: dict[str, str] = {}
        self.lines: list[str] = []
        self.ok = True
        self.replay: dict[str, str] = {}

    def fail(self, message: str) -> None:
        self.ok = False
        self.lines.append(f"FAIL {message}")


def _alpha(cfg: ExperimentConfig, section: str = "or"):
    try:
        return or_from_params(cfg.sections[section])
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"[{section}] {exc}") from exc


def _field(cfg: ExperimentConfig, alpha):
    n = cfg.get_int("field", "n", lo=1, hi=3)
    eps = cfg.get_float("field", "epsilon", 0.25, lo=1e-12)
    R = cfg.get_float("field", "R", lo=0, hi=MAX_RADIUS[n])
    seed_raw = cfg.get_str("field", "seed", "none")
    seed = None if seed_raw.lower() == "none" else cfg.get_int("field", "seed", lo=0)
    return synthesize_member(alpha, n, eps, R, seed)


def _norm_spec(cfg: ExperimentConfig) -> NormSpec:
    kind = cfg.get_str("norms", "kind", "L2")
    return NormSpec(
        kind=kind,
        p=cfg.get_float("norms", "p", 2.0, lo=1.0),
        ell=cfg.get_int("norms", "ell", 0, lo=0),
        grid_per_axis=cfg.get_int("norms", "grid", None, lo=1),
        oversample=cfg.get_int("norms", "oversample", 8, lo=2),
    )


def _schedule(cfg: ExperimentConfig, support_radius: float, m: float) -> list[float]:
    lams = cfg.get_floats("schedule", "lambdas", None)
    geo = cfg.get_floats("schedule", "geometric", None)
    if lams is not None and geo is not None:
        raise ConfigError("[schedule] give either lambdas or geometric, not both")
    if lams is not None:
        return lams
    if geo is not None:
        if len(geo) != 3 or geo[0] <= 0 or geo[1] <= 1 or geo[2] < 1:
            raise ConfigError("[schedule] geometric = start, ratio > 1, count >= 1")
        return [geo[0] * geo[1] ** k for k in range(int(geo[2]))]
    return default_schedule(support_radius, m)


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def _or_index(cfg, res):
    alpha = _alpha(cfg)
    t_max = cfg.get_float("index", "t_max", 1e6, lo=100)
    lams = cfg.get_floats("index", "lambdas", None)
    est = estimate_indices(alpha, t_max=t_max, lambda_grid=lams)
    res.files["index.txt"] = key_value_block(
        [
            ("alpha", alpha.describe()),
            ("s_lo", est.s_lo),
            ("s_hi", est.s_hi),
            ("t_min", est.t_range[0]),
            ("t_max", est.t_range[1]),
            ("lambda_min", est.lambda_range[0]),
            ("lambda_max", est.lambda_range[1]),
            ("residual", est.residual),
        ]
    )
    res.lines.append(f"s_lo={est.s_lo:.6g} s_hi={est.s_hi:.6g}")


def _embed_check(cfg, res):
    alpha = _alpha(cfg)
    n = cfg.get_int("embed", "n", lo=1, hi=3)
    ell = cfg.get_int("embed", "ell", 0, lo=0)
    t_max = cfg.get_float("embed", "t_max", 1e12, lo=1e3)
    v = classify_embedding(alpha, ell, n, t_max=t_max)
    res.files["embed.txt"] = key_value_block(
        [("alpha", alpha.describe()), ("n", n), ("ell", ell), ("verdict", v.verdict),
         ("partial_integral", v.partial_integral), ("method", v.method)]
    )
    res.lines.append(f"verdict={v.verdict} method={v.method}")


def _weyl(cfg, res):
    n = cfg.get_int("weyl", "n", lo=1, hi=3)
    lams = cfg.get_floats("weyl", "lambdas")
    rows = ["lambda,count,ratio"]
    for lam in lams:
        if lam <= 0:
            raise ConfigError("[weyl] lambdas must be positive")
        rows.append(f"{lam!r},{len(modes_in_ball(n, lam))},{weyl_count_ratio(n, lam)!r}")
    res.files["weyl.csv"] = "\n".join(rows) + "\n"
    res.lines.append(f"{len(lams)} radii")


def _field_csv(f) -> str:
    buf = io.StringIO()
    write_field_csv(f, buf)
    return buf.getvalue()


def _synth(cfg, res):
    alpha = _alpha(cfg)
    f = _field(cfg, alpha)
    res.files["field.csv"] = _field_csv(f)
    res.lines.append(f"{len(f)} modes, hoermander norm {hoermander_norm(f, alpha):.6g}")


def _converge(cfg, res):
    alpha = _alpha(cfg)
    beta = _alpha(cfg, "beta") if "beta" in cfg.sections else None
    f = _field(cfg, alpha)
    spec = _norm_spec(cfg)
    m = cfg.get_float("schedule", "m", 1.0, lo=1e-12)
    table = truncation_curve(f, alpha, spec, m, _schedule(cfg, f.support_radius, m), beta=beta)
    res.files["truncation.csv"] = table.to_csv()
    if cfg.get_bool("schedule", "svg"):
        res.files["truncation.svg"] = render_svg(table)
    items = [("alpha", table.alpha_desc), ("rows", len(table)), ("c_free", table.c_free)]
    if np.any(np.diff(table.err_l2) > 0):
        res.fail("err_l2 increases along the schedule")
    if np.count_nonzero(table.err_target > 0) >= 4:
        d = verify_decay(table)
        items += [("decay_passed", d.passed), ("slope", d.slope), ("sup_ratio", d.sup_ratio)]
        if not d.passed:
            res.fail(f"ratio not bounded: slope {d.slope:.4g}, sup {d.sup_ratio:.4g}")
    else:
        items.append(("decay_passed", "skipped"))
    res.files["decay.txt"] = key_value_block(items)
    res.replay["replay_field.csv"] = _field_csv(f)
    res.lines.append(f"{len(table)} rows, c_free={table.c_free:.6g}")


def _stress(cfg, res):
    alpha = _alpha(cfg)
    beta = _alpha(cfg, "beta") if "beta" in cfg.sections else None
    f = _field(cfg, alpha)
    spec = _norm_spec(cfg)
    m = cfg.get_float("schedule", "m", 1.0, lo=1e-12) if "schedule" in cfg.sections else 1.0
    trials = cfg.get_int("stress", "trials", lo=1)
    seed = cfg.get_int("stress", "seed", 0, lo=0)
    max_prefixes = cfg.get_int("stress", "max_prefixes", 64, lo=2)
    rep = rearrangement_stress(f, spec, alpha, m, trials, seed, beta=beta, max_prefixes=max_prefixes)
    rot = eigenspace_rotation_stress(f, seed)
    res.files["stress.txt"] = rep.to_text() + key_value_block([("rotation_discrepancy", rot)])
    if rep.bound_violations:
        res.fail(f"{rep.bound_violations} prefix bound violations")
    if rep.final_residual > 0:
        res.fail(f"full prefix leaves residual {rep.final_residual!r}")
    if rot > ROTATION_TOL:
        res.fail(f"eigenspace projection moved by {rot!r}")
    res.replay["replay_field.csv"] = _field_csv(f)
    res.lines.append(
        f"trials={rep.trials} violations={rep.bound_violations} rotation={rot:.3g}"
    )


def _abstract(cfg, res):
    M = cfg.get_int("abstract", "M", lo=1)
    qs = tuple(cfg.get_floats("abstract", "q", "1.2,2,3,inf"))
    if not qs or any(not q >= 1 for q in qs):
        raise ConfigError("[abstract] q values must lie in [1, inf]")
    count = cfg.get_int("abstract", "configs", 100, lo=1)
    seed = cfg.get_int("abstract", "seed", 0, lo=0)
    violations, non_monotone, worst = 0, 0, 0.0
    replay = []
    for i in range(count):
        rng = np.random.default_rng((seed, i))
        model, sym, g, ups = am.random_case(rng, max_dim=M, q_choices=qs)
        est = am.master_estimate_check(model, sym, g, ups)
        if est.rhs > 0:
            worst = max(worst, est.lhs / est.rhs)
        order = rng.permutation(model.dim)
        trace = am.net_convergence_trace(model, g, [order[:k] for k in range(model.dim + 1)])
        monotone = all(b <= a for a, b in zip(trace, trace[1:])) and trace[-1] == 0.0
        if not est.passed or not monotone:
            violations += not est.passed
            non_monotone += not monotone
            replay.append(f"# config {i}\n" + am.dump_case(model, sym, g, ups))
    res.files["abstract.txt"] = key_value_block(
        [("configs", count), ("max_dim", M), ("q", ",".join(repr(q) for q in qs)),
         ("seed", seed), ("violations", violations), ("non_monotone", non_monotone),
         ("worst_ratio", worst)]
    )
    if violations:
        res.fail(f"{violations} master-estimate violations")
    if non_monotone:
        res.fail(f"{non_monotone} non-monotone residual traces")
    if replay:
        res.replay["replay_abstract.txt"] = "\n".join(replay)
    res.lines.append(f"configs={count} violations={violations} worst_ratio={worst:.6g}")


_HANDLERS = {
    "or-index": _or_index,
    "embed-check": _embed_check,
    "weyl": _weyl,
    "synth": _synth,
    "converge": _converge,
    "stress": _stress,
    "abstract": _abstract,
}


def run(
    subcommand: str,
    config_path,
    output_dir,
    seed: int | None = None,
    quiet: bool = True,
) -> int:
    """Run one subcommand and write its outputs; returns the exit code."""
    try:
        if subcommand not in _HANDLERS:
            raise ConfigError(f"unknown subcommand {subcommand!r}")
        cfg = ExperimentConfig.load(config_path)
        if seed is not None:
            cfg.override_seed(seed)
        cfg.require(subcommand)
        res = _Result()
        _HANDLERS[subcommand](cfg, res)
    except (ConfigError, HypothesisError, DomainError, ValueError) as exc:
        print(f"eigenlab {subcommand}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2

    out = Path(output_dir)
    files = dict(res.files)
    if not res.ok:
        files["replay_config.ini"] = cfg.serialize()
        files.update(res.replay)
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name in sorted(files):
            (out / name).write_text(files[name], encoding="utf-8")
    except OSError as exc:
        print(f"eigenlab {subcommand}: cannot write outputs: {exc}", file=sys.stderr)
        return 2
    if not quiet:
        for line in res.lines:
            print(line)
    return 0 if res.ok else 1


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="eigenlab", description=__doc__.splitlines()[0])
    ap.add_argument("subcommand", choices=sorted(REQUIRED))
    ap.add_argument("--config", required=True, metavar="PATH")
    ap.add_argument("--out", required=True, metavar="DIR")
    ap.add_argument("--seed", type=int, default=None, metavar="N")
    ap.add_argument("--quiet", action="store_true")
    return ap


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    return run(args.subcommand, args.config, args.out, args.seed, args.quiet)


if __name__ == "__main__":
    sys.exit(main())
