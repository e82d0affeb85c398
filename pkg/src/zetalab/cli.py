"""Command-line surface: config-file driven, hash-stamped artifacts.

Every command reads one JSON config, writes JSON/CSV artifacts into the
output directory, and stamps each artifact with the SHA-256 hash of the
parsed config. Timestamps are isolated in run_meta.json so the numeric
artifacts are byte-identical across reruns.

Exit codes: 0 success, 1 I/O or internal failure, 2 precondition or
schema error (an error.json report is written when possible).
"""

from __future__ import annotations

import argparse
import csv
import datetime
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import SchemaError, ZetalabError
from .jsonio import canonical_dumps, check_keys, config_hash, read_json, write_json
from .kronecker import TorusAngles, covering_number, find_shift, independence_check
from .regions import TowerParams, build_tower, enlarge, region_from_json
from .scanner import (
    ContinuousMode,
    DiscreteMode,
    OmegaSpec,
    ScanConfig,
    scan,
    scan_short_interval,
    scan_tower,
)
from .targets import (
    HybridConstraint,
    continuity_modulus,
    fit_exp_polynomial,
    fit_polynomial,
    lambda_modulus,
    target_from_json,
)
from .transfer import (
    TransferConstants,
    counting_inequality_check,
    empirical_density,
    neighborhood_expand,
)
from .witness import witness_from_json
from .zeta import EvalConfig, Strip
from .zspec import eval_zspec, zspec_from_json

COMMANDS = ("eval", "fit", "scan", "tower", "kronecker", "transfer", "verify", "density")


def _eval_config(cfg: dict) -> EvalConfig:
    kwargs = {}
    if "abs_tolerance" in cfg:
        kwargs["abs_tolerance"] = float(cfg["abs_tolerance"])
    if "max_terms" in cfg:
        kwargs["max_terms"] = int(cfg["max_terms"])
    return EvalConfig(**kwargs)


def _mode_from_json(obj: dict):
    check_keys(obj, "mode", ("type",), ("t_start", "t_end", "step", "alpha", "n_start", "n_end"))
    if obj["type"] == "continuous":
        return ContinuousMode(float(obj["t_start"]), float(obj["t_end"]), float(obj["step"]))
    if obj["type"] == "discrete":
        return DiscreteMode(float(obj["alpha"]), int(obj["n_start"]), int(obj["n_end"]))
    raise SchemaError(f"unknown mode type {obj['type']!r}")


def _density_json(ws) -> dict:
    prof = empirical_density(ws)
    return {
        "value": prof.value,
        "checkpoints": list(prof.checkpoints),
        "densities": list(prof.densities),
        "running_min": list(prof.running_min),
    }


def _write_rows_csv(path: Path, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(("shift", "sup_distance", "hybrid_max", "pass"))
        for shift, d, h, ok in rows:
            w.writerow((repr(shift), repr(d), "" if math.isnan(h) else repr(h), int(ok)))


def _cmd_eval(cfg: dict, out: Path, stamp: str, args) -> int:
    check_keys(cfg, "eval config", ("schema", "zspec", "points"),
               ("abs_tolerance", "max_terms"))
    z = zspec_from_json(cfg["zspec"])
    ec = _eval_config(cfg)
    values = []
    for re_, im_ in cfg["points"]:
        v = eval_zspec(z, complex(float(re_), float(im_)), ec)
        vs = [v] if z.arity == 1 else list(v)
        values.append([[c.real, c.imag] for c in vs])
        print(" ".join(f"{c.real:.12g}{c.imag:+.12g}i" for c in vs))
    write_json(out / "eval.json", {"config_hash": stamp, "values": values})
    return 0


def _cmd_fit(cfg: dict, out: Path, stamp: str, args) -> int:
    check_keys(cfg, "fit config", ("schema", "kind", "region", "degree", "bound"),
               ("samples", "sample_from", "abs_tolerance", "max_terms"))
    region = region_from_json(cfg["region"])
    if ("samples" in cfg) == ("sample_from" in cfg):
        raise SchemaError("fit config needs exactly one of samples / sample_from")
    if "samples" in cfg:
        samples = [
            (complex(*s), complex(*v)) for s, v in cfg["samples"]
        ]
    else:
        src = cfg["sample_from"]
        check_keys(src, "sample_from", ("zspec", "shift"))
        z = zspec_from_json(src["zspec"])
        if z.arity != 1:
            raise SchemaError("sample_from needs a scalar zspec")
        grid = region.grid()
        vals = z.bind(grid, _eval_config(cfg)).values(
            np.array([float(src["shift"])])
        )[0, 0, :]
        samples = list(zip(grid.tolist(), vals.tolist()))
    fitter = {"exp_polynomial": fit_exp_polynomial, "polynomial": fit_polynomial}.get(cfg["kind"])
    if fitter is None:
        raise SchemaError(f"unknown fit kind {cfg['kind']!r}")
    res = fitter(samples, region, int(cfg["degree"]), float(cfg["bound"]))
    write_json(out / "fit.json", {
        "config_hash": stamp,
        "target": res.target.to_json(),
        "sup_error": res.sup_error,
        "degree": res.degree,
    })
    print(f"fit degree {res.degree}, sup-grid error {res.sup_error:.6g}")
    return 0


def _scan_config_from_json(cfg: dict) -> tuple:
    check_keys(cfg, "scan config",
               ("schema", "zspec", "target", "region", "epsilon", "mode"),
               ("hybrid", "short_interval", "omega", "tower", "kind",
                "abs_tolerance", "max_terms"))
    hybrid = HybridConstraint.from_json(cfg["hybrid"]) if "hybrid" in cfg else None
    short = tuple(float(x) for x in cfg["short_interval"]) if "short_interval" in cfg else None
    sc = ScanConfig(
        zspec=zspec_from_json(cfg["zspec"]),
        target=target_from_json(cfg["target"]),
        region=region_from_json(cfg["region"]),
        epsilon=float(cfg["epsilon"]),
        mode=_mode_from_json(cfg["mode"]),
        hybrid=hybrid,
        short_interval=short,
        eval_config=_eval_config(cfg),
    )
    omega = None
    if "omega" in cfg:
        ob = cfg["omega"]
        check_keys(ob, "omega", ("form",), ("a", "b"))
        omega = OmegaSpec(ob["form"], float(ob.get("a", 1.0)), float(ob.get("b", 0.0)))
    return sc, omega, bool(cfg.get("tower", False)), cfg.get("kind")


def _cmd_scan(cfg: dict, out: Path, stamp: str, args) -> int:
    sc, omega, tower, kind = _scan_config_from_json(cfg)
    if tower:
        outcome = scan_tower(sc, kind=kind, threads=args.threads)
    elif sc.short_interval is not None:
        if omega is None:
            raise SchemaError("short_interval scan needs an omega spec")
        outcome = scan_short_interval(sc, omega, kind=kind, threads=args.threads)
    else:
        outcome = scan(sc, kind=kind, threads=args.threads)
    wj = outcome.witness.to_json()
    wj["config_hash"] = stamp
    write_json(out / "witness.json", wj)
    _write_rows_csv(out / "rows.csv", outcome.rows)
    write_json(out / "density.json",
               {"config_hash": stamp, "density": _density_json(outcome.witness)})
    size = (len(outcome.witness.members)
            if hasattr(outcome.witness, "members")
            else len(outcome.witness.intervals))
    print(f"witness size {size}, threshold {outcome.threshold}")
    return 0


def _cmd_tower(cfg: dict, out: Path, stamp: str, args) -> int:
    check_keys(cfg, "tower config", ("schema", "base", "params"))
    check_keys(cfg["params"], "params", ("alpha", "M", "N", "L"))
    base = region_from_json(cfg["base"])
    p = TowerParams.build(float(cfg["params"]["alpha"]), int(cfg["params"]["M"]),
                          int(cfg["params"]["N"]), int(cfg["params"]["L"]))
    region = build_tower(base, p)
    obj = region.to_json()
    obj["config_hash"] = stamp
    obj["pieces"] = len(region.shifts)
    write_json(out / "tower.json", obj)
    print(f"tower with {len(region.shifts)} disjoint pieces")
    return 0


def _cmd_kronecker(cfg: dict, out: Path, stamp: str, args) -> int:
    check_keys(cfg, "kronecker config", ("schema", "action"),
               ("angles", "lambdas", "alpha", "l1"))
    if "angles" in cfg:
        angles = TorusAngles(tuple(float(t) for t in cfg["angles"]))
    elif "lambdas" in cfg:
        angles = TorusAngles.from_lambdas(
            [float(x) for x in cfg["lambdas"]], int(cfg.get("l1", 1)),
            float(cfg.get("alpha", 1.0)))
    else:
        angles = None
    action = cfg["action"]
    result: dict = {"config_hash": stamp}
    if "find_shift" in action:
        a = action["find_shift"]
        check_keys(a, "find_shift", ("targets", "epsilon", "l_max"))
        if angles is None:
            raise SchemaError("find_shift needs angles or lambdas")
        l = find_shift(angles, [complex(*t) for t in a["targets"]],
                       float(a["epsilon"]), int(a["l_max"]))
        result["find_shift"] = {"l": l}
        print(f"find_shift: l = {l}")
    elif "covering" in action:
        a = action["covering"]
        check_keys(a, "covering", ("epsilon", "l_cap"))
        if angles is None:
            raise SchemaError("covering needs angles or lambdas")
        r = covering_number(angles, float(a["epsilon"]), int(a["l_cap"]))
        result["covering"] = {
            "L": r.L, "mesh_per_axis": r.mesh_per_axis, "mesh_step": r.mesh_step,
            "orbit_budget": r.orbit_budget, "slack": r.slack,
        }
        print(f"covering number L = {r.L}")
    elif "independence" in action:
        a = action["independence"]
        check_keys(a, "independence", ("height",))
        rep = independence_check([float(x) for x in cfg["lambdas"]],
                                 float(cfg.get("alpha", 1.0)), int(a["height"]))
        result["independence"] = rep.to_json()
        print(f"independence: {rep.verdict}")
    else:
        raise SchemaError("action must contain find_shift, covering, or independence")
    write_json(out / "kronecker.json", result)
    return 0


def _cmd_transfer(cfg: dict, out: Path, stamp: str, args) -> int:
    """Full campaign: fit constants, build the tower, scan both sides,
    expand, and check the counting inequalities, all from one config."""
    check_keys(cfg, "transfer config",
               ("schema", "zspec", "region", "target", "epsilon", "alpha",
                "delta0", "horizon"),
               ("lambdas", "unit_targets", "step", "l_cap", "params",
                "abs_tolerance", "max_terms", "strip"))
    z = zspec_from_json(cfg["zspec"])
    K = region_from_json(cfg["region"])
    g = target_from_json(cfg["target"])
    eps = float(cfg["epsilon"])
    alpha = float(cfg["alpha"])
    delta0 = float(cfg["delta0"])
    horizon = int(cfg["horizon"])
    lambdas = tuple(float(x) for x in cfg.get("lambdas", ()))
    unit_targets = tuple(complex(*t) for t in cfg.get("unit_targets", ()))
    ec = _eval_config(cfg)

    K0 = enlarge(K, delta0, K.strip)
    delta = continuity_modulus(g, K, K0, eps / 4.0)
    hybrid = None
    if lambdas:
        hybrid = HybridConstraint(lambdas, unit_targets, eps / 2.0)
        delta1 = lambda_modulus(hybrid, eps / 2.0, cap=delta)
    else:
        delta1 = delta / 2.0

    if args.paper_defaults or "params" not in cfg:
        M = int(math.floor(alpha / delta)) + 1
        im_lo, im_hi = K0.im_extent()
        N = max(1, int(math.ceil(max(abs(im_lo), abs(im_hi)) / alpha)))
        L1 = 4 * M * N
        if lambdas:
            angles = TorusAngles.from_lambdas(lambdas, L1, alpha)
            L = covering_number(angles, eps, int(cfg.get("l_cap", 10**6))).L
        else:
            angles, L = None, 0
        params = TowerParams.build(alpha, M, N, L)
    else:
        pj = cfg["params"]
        check_keys(pj, "params", ("alpha", "M", "N", "L"))
        params = TowerParams.build(float(pj["alpha"]), int(pj["M"]), int(pj["N"]),
                                   int(pj["L"]))
        angles = TorusAngles.from_lambdas(lambdas, params.L1, alpha) if lambdas else None
    tower = build_tower(K0, params)

    step = float(cfg.get("step", min(delta / 4.0, 0.05)))
    t_end = alpha * horizon
    v_out = scan_tower(
        ScanConfig(z, g, tower, eps, ContinuousMode(0.0, t_end, step),
                   eval_config=ec),
        threads=args.threads)
    w_horizon = horizon + int(math.ceil(
        (params.M**2 + params.L * params.L1) * alpha + 1 + delta)) + 1
    s_out = scan(
        ScanConfig(z, g, K0, eps / 2.0, DiscreteMode(alpha, 1, horizon),
                   eval_config=ec),
        kind="S", threads=args.threads)
    w_out = scan(
        ScanConfig(z, g, K0, eps, DiscreteMode(alpha, 0, w_horizon),
                   hybrid=HybridConstraint(lambdas, unit_targets, eps) if lambdas else None,
                   eval_config=ec),
        kind="W", threads=args.threads)

    xi1 = empirical_density(s_out.witness).value
    xi5 = empirical_density(v_out.witness).value
    tc = TransferConstants.build(delta0, delta, delta1, params,
                                 xi1=min(xi1, 1.0), xi3=0.0, xi5=min(xi5, 1.0))
    expanded = neighborhood_expand(s_out.witness, delta)
    report = counting_inequality_check(v_out.witness, w_out.witness, tc, alpha, horizon)

    for name, ws in (("V", v_out.witness), ("S", s_out.witness),
                     ("W", w_out.witness), ("S_expanded", expanded)):
        obj = ws.to_json()
        obj["config_hash"] = stamp
        write_json(out / f"witness_{name}.json", obj)
    cj = tc.to_json()
    cj["config_hash"] = stamp
    write_json(out / "constants.json", cj)
    with open(out / "counting.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        for row in report.to_csv_rows():
            w.writerow(row)
    summary = {
        "config_hash": stamp,
        "delta": delta,
        "delta1": delta1,
        "counting": report.to_json(),
        "xi": {str(i): v for i, v in tc.xi.items()},
        "expanded_density": empirical_density(expanded).value,
        "densities": {
            "S": _density_json(s_out.witness),
            "V": _density_json(v_out.witness),
            "W": _density_json(w_out.witness),
        },
    }
    write_json(out / "transfer.json", summary)
    print(f"transfer: counting {'ok' if report.all_ok else 'VIOLATED'}, "
          f"xi2={tc.xi2:.6g}, xi6={tc.xi6:.6g}")
    return 0


def _cmd_verify(cfg: dict, out: Path, stamp: str, args) -> int:
    check_keys(cfg, "verify config",
               ("schema", "v_file", "w_file", "constants_file", "alpha", "N"))
    base = Path(cfg["v_file"]).parent
    vj = read_json(cfg["v_file"])
    wj = read_json(cfg["w_file"])
    cj = read_json(cfg["constants_file"])
    stamps = {vj.get("config_hash"), wj.get("config_hash"), cj.get("config_hash")}
    if len(stamps) != 1 or None in stamps:
        raise SchemaError(f"mixed or missing config hashes in inputs: {stamps}")
    V = witness_from_json({k: v for k, v in vj.items() if k != "config_hash"})
    W = witness_from_json({k: v for k, v in wj.items() if k != "config_hash"})
    tower = TowerParams.from_json(cj["tower"])
    xi = {int(i): float(v) for i, v in cj["xi"].items()}
    tc = TransferConstants.build(float(cj["delta0"]), float(cj["delta"]),
                                 float(cj["delta1"]), tower,
                                 xi1=xi[1], xi3=xi[3], xi5=xi[5])
    report = counting_inequality_check(V, W, tc, float(cfg["alpha"]), int(cfg["N"]))
    with open(out / "counting.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        for row in report.to_csv_rows():
            w.writerow(row)
    write_json(out / "verify.json", {"config_hash": stamp, "report": report.to_json()})
    print(f"verify: {'ok' if report.all_ok else 'VIOLATIONS at j=' + str(list(report.violations))}")
    return 0 if report.all_ok else 1


def _cmd_density(cfg: dict, out: Path, stamp: str, args) -> int:
    check_keys(cfg, "density config", ("schema", "witness_file"))
    wj = read_json(cfg["witness_file"])
    ws = witness_from_json({k: v for k, v in wj.items() if k != "config_hash"})
    write_json(out / "density.json",
               {"config_hash": stamp, "density": _density_json(ws)})
    print(f"density {_density_json(ws)['value']:.6g}")
    return 0


_HANDLERS = {
    "eval": _cmd_eval,
    "fit": _cmd_fit,
    "scan": _cmd_scan,
    "tower": _cmd_tower,
    "kronecker": _cmd_kronecker,
    "transfer": _cmd_transfer,
    "verify": _cmd_verify,
    "density": _cmd_density,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="zetalab",
        description="Desk-scale universality laboratory for zeta-functions",
    )
    parser.add_argument("--version", action="version", version=f"zetalab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--out", required=True, type=Path)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--paper-defaults", action="store_true",
                       help="derive delta, M, N, L from the proof-faithful chain")
        p.add_argument("--seedless", action="store_true",
                       help="no-op; all commands are deterministic from the config")
    args = parser.parse_args(argv)

    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        cfg = read_json(args.config)
        if not isinstance(cfg, dict) or cfg.get("schema") != f"zetalab/{args.command}/v1":
            raise SchemaError(
                f"config schema must be 'zetalab/{args.command}/v1', "
                f"got {cfg.get('schema') if isinstance(cfg, dict) else type(cfg)}"
            )
        stamp = config_hash(cfg)
        code = _HANDLERS[args.command](cfg, out, stamp, args)
        write_json(out / "run_meta.json", {
            "command": args.command,
            "config_hash": stamp,
            "version": __version__,
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        })
        return code
    except (ZetalabError, ValueError) as exc:
        report = {"error": type(exc).__name__, "message": str(exc)}
        try:
            write_json(out / "error.json", report)
        except OSError:
            pass
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
