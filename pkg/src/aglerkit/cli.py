"""Command-line front end.

Exit codes: 0 pass, 1 a verification or theorem check failed, 2 bad input.
Errors are written to stderr as a JSON object.  Settings come from flags; a
JSON config file (``--config`` or the ``AGLER_CONFIG`` environment variable)
overrides them.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np
from scipy import linalg

from . import agler, analysis, hardy, innerfn, jsonio, reducing, shiftop
from .errors import AglerError, CommonFactor, InputError, UnstableDenominator

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
CONFIG_ENV = "AGLER_CONFIG"
INNER_TOL = 1e-10


@dataclass(frozen=True)
class RunConfig:
    grid_N: int = hardy.DEFAULT_N
    ladder: tuple = analysis.DEFAULT_LADDER
    tolerances: dict = field(
        default_factory=lambda: {
            "rank_tol": analysis.RANK_TOL,
            "psd_tol": agler.PSD_TOL,
            "drop_tol": shiftop.DROP_TOL,
            "cluster_tol": analysis.CLUSTER_TOL,
        }
    )
    seed: int = 0
    output_path: str | None = None

    def validate(self) -> "RunConfig":
        N = self.grid_N
        if N < 64 or N & (N - 1):
            raise InputError(f"grid must be a power of two >= 64, got {N}")
        lad = list(self.ladder)
        if len(lad) < 3 or any(b <= a for a, b in zip(lad, lad[1:])):
            raise InputError(f"ladder must be strictly increasing with at least 3 rungs, got {lad}")
        if lad[-1] >= N // 2:
            raise InputError(f"ladder degree {lad[-1]} does not fit grid {N}")
        unknown = set(self.tolerances) - {"rank_tol", "psd_tol", "drop_tol", "cluster_tol"}
        if unknown:
            raise InputError(f"unknown tolerance keys {sorted(unknown)}")
        return self


def load_config(path: str | None, base: RunConfig) -> RunConfig:
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return base
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError("config must be a JSON object")
    known = {"grid_N", "ladder", "tolerances", "seed", "output_path"}
    extra = set(data) - known
    if extra:
        raise InputError(f"unknown config keys {sorted(extra)}")
    upd = dict(data)
    if "ladder" in upd:
        upd["ladder"] = tuple(upd["ladder"])
    if "tolerances" in upd:
        upd["tolerances"] = {**base.tolerances, **upd["tolerances"]}
    return replace(base, **upd)


def read_spec(path: str, *, allow_quotient: bool = False):
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc
    try:
        return innerfn.from_json(data, allow_quotient=allow_quotient)
    except (UnstableDenominator, CommonFactor) as exc:
        raise InputError(f"{path}: {exc}") from exc


def degree_of(theta) -> tuple[int, int]:
    return tuple(theta.degree)


# -- commands -------------------------------------------------------------------

def cmd_verify_inner(args, cfg: RunConfig):
    try:
        theta = read_spec(args.spec, allow_quotient=True)
    except InputError as exc:
        if isinstance(exc.__cause__, (UnstableDenominator, CommonFactor)):
            return {"inner": False, "reason": str(exc.__cause__)}, EXIT_FAIL
        raise
    dev = innerfn.verify_inner(theta, cfg.grid_N)
    ok = bool(np.isfinite(dev) and dev <= INNER_TOL)
    report = {"inner": ok, "deviation": dev, "grid": cfg.grid_N}
    if hasattr(theta, "degree") and not isinstance(theta, innerfn.RationalFn):
        report["degree"] = list(degree_of(theta))
    return report, EXIT_OK if ok else EXIT_FAIL


def cmd_agler_decompose(args, cfg: RunConfig):
    theta = read_spec(args.spec)
    pair = agler.agler_decompose(theta, args.flavor)
    rat = innerfn.as_rational_inner(theta)
    residual = agler.pair_residual(rat, pair, seed=cfg.seed)
    report = {
        "flavor": agler.Flavor(pair.flavor).value,
        "degree": list(degree_of(theta)),
        "residual": residual,
        "rank_k1": agler.kernel_rank(pair.k1),
        "rank_k2": agler.kernel_rank(pair.k2),
        "k1": pair.k1.to_json(),
        "k2": pair.k2.to_json(),
    }
    m, n = degree_of(theta)
    ok = residual <= 1e-8 and report["rank_k1"] == n and report["rank_k2"] == m
    return report, EXIT_OK if ok else EXIT_FAIL


def _predicted_rank(degree, var: int):
    m, n = degree
    lead, other = (m, n) if var == 1 else (n, m)
    return other if lead <= 1 else None


def cmd_commutator_rank(args, cfg: RunConfig):
    theta = read_spec(args.spec)
    rep = analysis.rank_ladder(theta, args.var, cfg.ladder, cfg.tolerances["rank_tol"], cfg.grid_N, args.workers)
    out = rep.to_json()
    expected = _predicted_rank(degree_of(theta), args.var)
    out["expected"] = "growing" if expected is None else expected
    if expected is None:
        ok = rep.verdict == "growing"
    else:
        ok = rep.verdict == "stabilized" and rep.rank == expected
    return out, EXIT_OK if ok else EXIT_FAIL


def cmd_spectrum(args, cfg: RunConfig):
    theta = read_spec(args.spec)
    D = args.D
    frame = shiftop.build_frame(theta, D, D, cfg.grid_N, cfg.tolerances["drop_tol"])
    S = shiftop.compress_shift(theta, frame, args.var)
    C = shiftop.exact_commutator(theta, frame, args.var)
    ev = linalg.eigvals(S.entries)
    radius = float(np.abs(ev).max(initial=0.0))
    report = {
        "D": D,
        "dim": frame.dim,
        "eigenvalues": [[float(z.real), float(z.imag)] for z in np.sort_complex(ev)],
        "spectral_radius": radius,
        "norm": float(linalg.norm(S.entries, 2)),
        "commutator_clusters": [list(c) for c in analysis.eigen_multiplicities(C, cfg.tolerances["cluster_tol"])],
    }
    ok = radius <= 1 + 1e-8 and report["norm"] <= 1 + 1e-8
    if isinstance(theta, innerfn.ProductInner) and args.var == 1:
        blocks = analysis.block_commutator_clusters(theta, D, cfg.grid_N, cfg.tolerances["cluster_tol"])
        report["block_clusters"] = {
            "s1": [list(c) for c in blocks["s1"]],
            "s2": [list(c) for c in blocks["s2"]],
            "s2_norm": blocks["s2_norm"],
        }
        if theta.phi.degree:
            ps = analysis.point_spectrum_check(theta, D, cfg.grid_N)
            report["point_spectrum"] = ps.to_json()
            ok = ok and ps.passed
    return report, EXIT_OK if ok else EXIT_FAIL


def cmd_reducing_test(args, cfg: RunConfig):
    theta = read_spec(args.spec)
    rep = reducing.theorem2_harness(theta, grid_N=cfg.grid_N, strict=False)
    return rep.to_json(), EXIT_OK if rep.consistent else EXIT_FAIL


def corpus_files(corpus_dir: str | None) -> list[Path]:
    if corpus_dir:
        root = Path(corpus_dir)
        if not root.is_dir():
            raise InputError(f"{corpus_dir} is not a directory")
        files = sorted(root.glob("*.json"))
    else:
        files = sorted(Path(str(p)) for p in resources.files("aglerkit").joinpath("corpus").iterdir() if p.name.endswith(".json"))
    if not files:
        raise InputError("corpus is empty")
    return files


def cmd_theorem_suite(args, cfg: RunConfig):
    rows = []
    all_ok = True
    for path in corpus_files(args.corpus):
        theta = read_spec(str(path))
        t1 = analysis.theorem1_harness(theta, cfg.ladder, cfg.tolerances["rank_tol"], cfg.grid_N, args.workers)
        t2 = reducing.theorem2_harness(theta, grid_N=cfg.grid_N, strict=False)
        ok = t1.consistent and t2.consistent
        all_ok = all_ok and ok
        rows.append(
            {
                "name": path.stem,
                "degree": list(degree_of(theta)),
                "rank_verdict": t1.ladder.verdict,
                "rank": t1.ladder.rank,
                "sampling_rank": t1.sampling_rank,
                "reducing_verdict": t2.verdict,
                "theorem1": "pass" if t1.consistent else "fail",
                "theorem2": "pass" if t2.consistent else "fail",
                "details": t1.details + t2.details,
            }
        )
    return {"results": rows, "passed": all_ok}, EXIT_OK if all_ok else EXIT_FAIL


# -- entry point -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", type=int, default=hardy.DEFAULT_N, help="torus grid points per circle")
    common.add_argument("--ladder", type=str, default=None, help="comma-separated truncation degrees")
    common.add_argument("--tol-rank", type=float, default=analysis.RANK_TOL, help="relative rank tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", type=str, default=None, help="write the JSON report here")
    common.add_argument("--config", type=str, default=None, help=f"JSON config file (default ${CONFIG_ENV})")
    common.add_argument("--workers", type=int, default=None, help="threads for ladder rungs")

    p = argparse.ArgumentParser(prog="aglerkit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("verify-inner", parents=[common], help="check |theta| = 1 on the torus")
    s.add_argument("spec")
    s.set_defaults(func=cmd_verify_inner)
    s = sub.add_parser("agler-decompose", parents=[common], help="extremal Agler pair")
    s.add_argument("spec")
    s.add_argument("--flavor", choices=["max1min2", "min1max2"], default="max1min2")
    s.set_defaults(func=cmd_agler_decompose)
    s = sub.add_parser("commutator-rank", parents=[common], help="rank ladder of the self-commutator")
    s.add_argument("spec")
    s.add_argument("--var", type=int, choices=[1, 2], default=1)
    s.set_defaults(func=cmd_commutator_rank)
    s = sub.add_parser("spectrum", parents=[common], help="eigenvalues of a compressed shift")
    s.add_argument("spec")
    s.add_argument("--var", type=int, choices=[1, 2], default=1)
    s.add_argument("--D", type=int, default=6)
    s.set_defaults(func=cmd_spectrum)
    s = sub.add_parser("reducing-test", parents=[common], help="reducing Agler pair test")
    s.add_argument("spec")
    s.set_defaults(func=cmd_reducing_test)
    s = sub.add_parser("theorem-suite", parents=[common], help="run both harnesses over a corpus")
    s.add_argument("corpus", nargs="?", default=None, help="directory of JSON specs (default: bundled)")
    s.set_defaults(func=cmd_theorem_suite)
    return p


def _config_from_args(args) -> RunConfig:
    base = RunConfig(grid_N=args.grid, seed=args.seed, output_path=args.out)
    if args.ladder:
        try:
            base = replace(base, ladder=tuple(int(x) for x in args.ladder.split(",")))
        except ValueError as exc:
            raise InputError(f"bad --ladder value {args.ladder!r}") from exc
    base = replace(base, tolerances={**base.tolerances, "rank_tol": args.tol_rank})
    return load_config(args.config, base).validate()


def _error(kind: str, message: str) -> None:
    sys.stderr.write(jsonio.dumps({"error": kind, "message": message}, indent=0))


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        cfg = _config_from_args(args)
        report, code = args.func(args, cfg)
    except InputError as exc:
        _error("InputError", str(exc))
        return EXIT_INPUT
    except AglerError as exc:
        _error(type(exc).__name__, str(exc))
        return EXIT_FAIL
    text = jsonio.dumps(report)
    if cfg.output_path:
        Path(cfg.output_path).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
