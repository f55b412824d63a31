"""Command-line front end: config validation, batch execution, report files.

Two subcommands.  ``run`` executes a list of verification cases and writes
JSON-lines records, a summary CSV, and per-case profile data.  ``sweep``
executes a 1- or 2-parameter family derived from a base case and writes a
long-format CSV plus the family member with the smallest margin.

Everything is driven by a JSON config with a versioned ``"schema"`` field.
Validation is strict and runs to completion before any case is executed:
unknown keys, malformed values, and weights that fail the admissibility
certificate are rejected with a dotted pointer to the offending entry
(``cases[2].weight.params``).  Exit codes: 0 all verdicts pass, 2 at least
one fail, 1 on any execution or configuration error.

Outputs are deterministic: records are sorted by case id, JSON is dumped
with sorted keys, and CSV floats are printed with ``%.17g``.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from .checker import (
    check_conjectures,
    check_theorem_main,
    check_theorem_sharper,
    find_trial_center,
)
from .mesh import SUPPORTED_SHAPES, DomainSpec, load as load_mesh
from .radial import (
    DEFAULT_OPTIONS,
    ShellSpec,
    check_lemma_monotone,
    extend_profile,
    shoot_first_mode,
)
from .spaceform import BallSpec, SpaceForm
from .weights import FAMILIES, make_weight, property_I_certify

SCHEMA_VERSION = 1
CHECK_NAMES = ("main", "sharper", "conjecture", "lemma23", "center")
SPACE_NAMES = ("euclidean", "hyperbolic")
PROFILE_SAMPLES = 400

EXIT_PASS = 0
EXIT_ERROR = 1
EXIT_FAIL = 2


class ConfigError(ValueError):
    """Configuration rejected; the message starts with a dotted pointer."""


def _fmt(value) -> str:
    if value is None:
        return ""
    return "%.17g" % float(value)


# ---------------------------------------------------------------------------
# validation


def _require_keys(obj: dict, where: str, allowed: dict, required: tuple):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object")
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"{where}.{key}: unknown key")
    for key in required:
        if key not in obj:
            raise ConfigError(f"{where}.{key}: missing required key")
    for key, kinds in allowed.items():
        if key in obj and not isinstance(obj[key], kinds):
            raise ConfigError(f"{where}.{key}: wrong type")


def _as_float(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number")
    out = float(value)
    if not math.isfinite(out):
        raise ConfigError(f"{where}: must be finite")
    return out


_DOMAIN_KEYS = {
    "shape": (str,),
    "radius": (int, float),
    "center": (list,),
    "aspect": (int, float),
    "semi_axis_x": (int, float),
    "semi_axis_y": (int, float),
    "inner_radius": (int, float),
    "outer_radius": (int, float),
    "vertices": (list,),
    "perturbation": (list,),
    "path": (str,),
}


def _build_domain(domain: dict, mesh_size: float, where: str):
    """Construct the solver-side domain object, raising pointered errors."""
    _require_keys(domain, where, _DOMAIN_KEYS, ("shape",))
    shape = domain["shape"]
    if shape == "shell":
        for key in domain:
            if key not in ("shape", "inner_radius", "outer_radius"):
                raise ConfigError(f"{where}.{key}: not a shell field")
        if "outer_radius" not in domain:
            raise ConfigError(f"{where}.outer_radius: missing required key")
        try:
            return ShellSpec(
                float(domain.get("inner_radius", 0.0)), float(domain["outer_radius"])
            )
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from None
    if shape == "mesh-file":
        for key in domain:
            if key not in ("shape", "path"):
                raise ConfigError(f"{where}.{key}: not a mesh-file field")
        if "path" not in domain:
            raise ConfigError(f"{where}.path: missing required key")
        try:
            return load_mesh(domain["path"])
        except OSError as exc:
            raise ConfigError(f"{where}.path: {exc}") from None
        except Exception as exc:
            raise ConfigError(f"{where}.path: {exc}") from None
    if shape not in SUPPORTED_SHAPES:
        raise ConfigError(
            f"{where}.shape: {shape!r} is not one of "
            f"{SUPPORTED_SHAPES + ('shell', 'mesh-file')}"
        )
    kwargs = {"shape": shape, "target_edge_length": mesh_size}
    scalar_fields = (
        "radius", "aspect", "semi_axis_x", "semi_axis_y",
        "inner_radius", "outer_radius",
    )
    for key in scalar_fields:
        if key in domain:
            kwargs[key] = _as_float(domain[key], f"{where}.{key}")
    if "center" in domain:
        center = domain["center"]
        if len(center) != 2:
            raise ConfigError(f"{where}.center: expected [x, y]")
        kwargs["center"] = (
            _as_float(center[0], f"{where}.center"),
            _as_float(center[1], f"{where}.center"),
        )
    if "vertices" in domain:
        verts = []
        for i, v in enumerate(domain["vertices"]):
            if not isinstance(v, list) or len(v) != 2:
                raise ConfigError(f"{where}.vertices[{i}]: expected [x, y]")
            verts.append(
                (
                    _as_float(v[0], f"{where}.vertices[{i}]"),
                    _as_float(v[1], f"{where}.vertices[{i}]"),
                )
            )
        kwargs["vertices"] = tuple(verts)
    if "perturbation" in domain:
        modes = []
        for i, pair in enumerate(domain["perturbation"]):
            if not isinstance(pair, list) or len(pair) != 2:
                raise ConfigError(
                    f"{where}.perturbation[{i}]: expected [mode, amplitude]"
                )
            modes.append(
                (int(pair[0]), _as_float(pair[1], f"{where}.perturbation[{i}]"))
            )
        kwargs["perturbation"] = tuple(modes)
    if "path" in domain:
        raise ConfigError(f"{where}.path: only valid with shape mesh-file")
    try:
        return DomainSpec(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _build_weight(weight: dict, where: str):
    _require_keys(
        weight,
        where,
        {"family": (str,), "params": (list,), "domain_cap": (int, float)},
        ("family", "params"),
    )
    family = weight["family"]
    if family not in FAMILIES:
        raise ConfigError(f"{where}.family: {family!r} is not one of {FAMILIES}")
    params = tuple(
        _as_float(p, f"{where}.params[{i}]") for i, p in enumerate(weight["params"])
    )
    cap = _as_float(weight.get("domain_cap", 50.0), f"{where}.domain_cap")
    try:
        phi = make_weight(family, params, domain_cap=cap)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    report = property_I_certify(phi)
    if not report.passed:
        raise ConfigError(
            f"{where}: weight fails the admissibility certificate "
            f"({report.first_violation_kind} at t = {report.first_violation_t:.6g})"
        )
    return phi


_CASE_KEYS = {
    "id": (str,),
    "space": (str,),
    "dimension": (int,),
    "domain": (dict,),
    "weight": (dict,),
    "checks": (list,),
    "mesh_size": (int, float),
    "refinement_levels": (int,),
    "tolerances": (dict,),
}

_TOLERANCE_KEYS = {
    "shooting_rtol": (int, float),
    "shooting_atol": (int, float),
    "residual_tol": (int, float),
}


def validate_case(case: dict, where: str, fallback_id: str) -> dict:
    """Full semantic validation; returns the normalised plain-dict case.

    Builds (and discards) the actual domain and weight objects so that
    every constructor-level complaint surfaces now, before any case runs.
    """
    _require_keys(case, where, _CASE_KEYS, ("space", "domain", "weight"))
    norm = {
        "id": case.get("id", fallback_id),
        "space": case["space"],
        "mesh_size": _as_float(case.get("mesh_size", 0.1), f"{where}.mesh_size"),
        "refinement_levels": case.get("refinement_levels", 2),
        "domain": case["domain"],
        "weight": case["weight"],
        "tolerances": case.get("tolerances", {}),
    }
    if not norm["id"]:
        raise ConfigError(f"{where}.id: must be a non-empty string")
    if norm["space"] not in SPACE_NAMES:
        raise ConfigError(f"{where}.space: expected one of {SPACE_NAMES}")
    if norm["mesh_size"] <= 0:
        raise ConfigError(f"{where}.mesh_size: must be positive")
    if norm["refinement_levels"] < 1:
        raise ConfigError(f"{where}.refinement_levels: must be >= 1")
    _require_keys(norm["tolerances"], f"{where}.tolerances", _TOLERANCE_KEYS, ())
    for key in norm["tolerances"]:
        if _as_float(norm["tolerances"][key], f"{where}.tolerances.{key}") <= 0:
            raise ConfigError(f"{where}.tolerances.{key}: must be positive")

    checks = case.get("checks", ["main"])
    seen = []
    for i, name in enumerate(checks):
        if name not in CHECK_NAMES:
            raise ConfigError(
                f"{where}.checks[{i}]: {name!r} is not one of {CHECK_NAMES}"
            )
        if name not in seen:
            seen.append(name)
    if not seen:
        raise ConfigError(f"{where}.checks: at least one check is required")
    norm["checks"] = sorted(seen, key=CHECK_NAMES.index)

    domain = _build_domain(case["domain"], norm["mesh_size"], f"{where}.domain")
    _build_weight(case["weight"], f"{where}.weight")

    is_shell = isinstance(domain, ShellSpec)
    dimension = case.get("dimension")
    if is_shell:
        if dimension is None:
            raise ConfigError(
                f"{where}.dimension: required for radially symmetric domains"
            )
        if dimension < 2:
            raise ConfigError(f"{where}.dimension: must be >= 2")
    elif dimension not in (None, 2):
        raise ConfigError(f"{where}.dimension: meshed domains are two-dimensional")
    norm["dimension"] = dimension if dimension is not None else 2

    if "sharper" in norm["checks"] and norm["space"] != "euclidean":
        raise ConfigError(
            f"{where}.checks: the sharper comparison is only formulated in "
            "euclidean space"
        )
    if "center" in norm["checks"]:
        if is_shell:
            raise ConfigError(
                f"{where}.checks: the center search needs a plane meshed domain"
            )
        if norm["space"] != "euclidean":
            raise ConfigError(
                f"{where}.checks: the center search is euclidean-only"
            )
    return norm


def validate_run_config(cfg: dict) -> list[dict]:
    _require_keys(cfg, "config", {"schema": (int,), "cases": (list,)}, ("schema", "cases"))
    if cfg["schema"] != SCHEMA_VERSION:
        raise ConfigError(f"config.schema: expected {SCHEMA_VERSION}")
    if not cfg["cases"]:
        raise ConfigError("config.cases: must not be empty")
    cases = [
        validate_case(case, f"cases[{i}]", f"case-{i:03d}")
        for i, case in enumerate(cfg["cases"])
    ]
    ids = [c["id"] for c in cases]
    for i, cid in enumerate(ids):
        if ids.index(cid) != i:
            raise ConfigError(f"cases[{i}].id: duplicate id {cid!r}")
    return cases


# ---------------------------------------------------------------------------
# execution


def _space_for(name: str) -> SpaceForm:
    return SpaceForm(curvature=0 if name == "euclidean" else -1)


def _options_for(tolerances: dict):
    opts = DEFAULT_OPTIONS
    mapping = {
        "shooting_rtol": "rtol",
        "shooting_atol": "atol",
        "residual_tol": "residual_tol",
    }
    overrides = {
        mapping[key]: float(value) for key, value in tolerances.items()
    }
    return replace(opts, **overrides) if overrides else opts


def _run_case(case: dict) -> dict:
    space = _space_for(case["space"])
    phi = _build_weight(case["weight"], "weight")
    domain = _build_domain(case["domain"], case["mesh_size"], "domain")
    options = _options_for(case["tolerances"])
    checks = case["checks"]
    is_shell = isinstance(domain, ShellSpec)
    dimension = case["dimension"] if is_shell else None
    kwargs = {
        "dimension": dimension,
        "refinements": case["refinement_levels"],
        "options": options,
    }

    if "sharper" in checks:
        report = check_theorem_sharper(domain, space, phi, **kwargs)
        if "conjecture" in checks:
            report.conjecture = check_conjectures(
                domain, space, phi, **kwargs
            ).conjecture
    elif "conjecture" in checks:
        report = check_conjectures(domain, space, phi, **kwargs)
    else:
        report = check_theorem_main(domain, space, phi, **kwargs)

    n = report.dimension
    ball = BallSpec(report.matched_radius, n, space)
    mode = shoot_first_mode(ball, phi, options)

    record = {
        "id": case["id"],
        "status": "pass",
        "checks": list(checks),
        "report": report.as_dict(),
    }

    failed = []
    if "main" in checks and not report.passed:
        failed.append("main")
    if "sharper" in checks and not report.sharper["passed"]:
        failed.append("sharper")
    if "conjecture" in checks and (
        report.conjecture["verdict"] != "conjecture-consistent"
    ):
        failed.append("conjecture")

    if "lemma23" in checks:
        ext = extend_profile(mode, domain_cap=report.matched_radius * (1 + 1e-12))
        monotone = check_lemma_monotone(ext)
        record["lemma23"] = {
            k: (list(v) if isinstance(v, tuple) else v)
            for k, v in asdict(monotone).items()
        }
        if not monotone.passed:
            failed.append("lemma23")

    if "center" in checks:
        cap = 4.0 * (report.matched_radius + 1.0)
        ext = extend_profile(mode, domain_cap=min(cap, phi.domain_cap))
        result = find_trial_center(domain, phi, ext)
        record["center"] = {
            "center": list(result.center),
            "residual": result.residual,
            "iterations": result.iterations,
            "converged": result.converged,
            "escaped_hull": result.escaped_hull,
            "note": result.note,
        }
        if not result.converged:
            failed.append("center")

    ts = np.linspace(float(mode.ts[0]), report.matched_radius, PROFILE_SAMPLES)
    values = np.asarray(mode.T(ts), dtype=float)
    derivs = np.asarray(mode.Tprime(ts), dtype=float)
    metric = ts if space.curvature == 0 else np.sinh(ts)
    record["profile_data"] = [
        (float(t), float(v), float(d), float(v / s))
        for t, v, d, s in zip(ts, values, derivs, metric)
    ]

    if failed:
        record["status"] = "fail"
        record["failed_checks"] = failed
    return record


def _execute_case(case: dict) -> dict:
    try:
        return _run_case(case)
    except Exception as exc:  # solver failure: mark and continue with the batch
        return {
            "id": case["id"],
            "status": "error",
            "checks": list(case["checks"]),
            "error": f"{type(exc).__name__}: {exc}",
        }


def _execute_batch(cases: list[dict], jobs: int) -> list[dict]:
    if jobs <= 1 or len(cases) == 1:
        records = [_execute_case(case) for case in cases]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_execute_case, cases))
    return sorted(records, key=lambda r: r["id"])


def _exit_code(records: list[dict]) -> int:
    if any(r["status"] == "error" for r in records):
        return EXIT_ERROR
    if any(r["status"] == "fail" for r in records):
        return EXIT_FAIL
    return EXIT_PASS


def _write_reports(records: list[dict], out: Path) -> None:
    with open(out / "reports.jsonl", "w") as fh:
        for record in records:
            slim = {k: v for k, v in record.items() if k != "profile_data"}
            fh.write(json.dumps(slim, sort_keys=True) + "\n")


def _weight_tag(weight: dict) -> str:
    params = ",".join("%g" % p for p in weight["params"])
    return f"{weight['family']}({params})"


def _write_summary(records: list[dict], out: Path) -> None:
    lines = ["case_id,n,kappa,weight,R,lhs,rhs,gap,sharper_gap,verdict"]
    for record in records:
        if record["status"] == "error":
            lines.append(f"{record['id']},,,,,,,,,error")
            continue
        rep = record["report"]
        sharper_gap = rep["sharper"]["gap"] if rep.get("sharper") else None
        lines.append(
            ",".join(
                [
                    record["id"],
                    str(rep["dimension"]),
                    str(rep["curvature"]),
                    '"%s"' % _weight_tag(rep["weight"]),
                    _fmt(rep["matched_radius"]),
                    _fmt(rep["lhs"]),
                    _fmt(rep["rhs"]),
                    _fmt(rep["gap"]),
                    _fmt(sharper_gap),
                    record["status"],
                ]
            )
        )
    (out / "summary.csv").write_text("\n".join(lines) + "\n")


def _write_profiles(records: list[dict], out: Path) -> None:
    plots = out / "plots"
    plots.mkdir(exist_ok=True)
    for record in records:
        rows = record.get("profile_data")
        if not rows:
            continue
        lines = ["t,T,Tprime,f_over_S"]
        lines.extend(",".join(_fmt(v) for v in row) for row in rows)
        (plots / f"{record['id']}_profile.csv").write_text("\n".join(lines) + "\n")


def run(config_path: str, out_dir: str, jobs: int = 1, verbose: bool = False) -> int:
    cfg = _load_json(config_path)
    cases = validate_run_config(cfg)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = _execute_batch(cases, jobs)
    _write_reports(records, out)
    _write_summary(records, out)
    _write_profiles(records, out)
    if verbose:
        for record in records:
            if record["status"] == "error":
                print(f"{record['id']}: error ({record['error']})")
            else:
                gap = record["report"]["gap"]
                print(f"{record['id']}: {record['status']} (gap={gap:.3e})")
    counts = {s: sum(r["status"] == s for r in records) for s in ("pass", "fail", "error")}
    print(
        f"{len(records)} case(s): {counts['pass']} pass, "
        f"{counts['fail']} fail, {counts['error']} error -> {out}"
    )
    return _exit_code(records)


# ---------------------------------------------------------------------------
# sweeps


def _resolve_path(case: dict, path: str, where: str):
    """Walk a dotted path; integer segments index lists.  Returns the holder
    and final segment so the caller can assign."""
    segments = path.split(".")
    node = case
    for depth, seg in enumerate(segments[:-1]):
        if isinstance(node, list):
            try:
                node = node[int(seg)]
            except (ValueError, IndexError):
                raise ConfigError(
                    f"{where}: segment {seg!r} does not index the list"
                ) from None
        elif isinstance(node, dict) and seg in node:
            node = node[seg]
        else:
            raise ConfigError(
                f"{where}: {'.'.join(segments[: depth + 1])!r} does not exist "
                "in base_case"
            )
    last = segments[-1]
    if isinstance(node, list):
        try:
            index = int(last)
        except ValueError:
            raise ConfigError(f"{where}: {last!r} cannot index a list") from None
        if not -len(node) <= index < len(node):
            raise ConfigError(f"{where}: index {index} out of range")
        return node, index
    if isinstance(node, dict) and last in node:
        return node, last
    raise ConfigError(f"{where}: {path!r} does not address an existing field")


def validate_sweep_config(cfg: dict):
    _require_keys(
        cfg,
        "config",
        {"schema": (int,), "base_case": (dict,), "sweep": (dict,)},
        ("schema", "base_case", "sweep"),
    )
    if cfg["schema"] != SCHEMA_VERSION:
        raise ConfigError(f"config.schema: expected {SCHEMA_VERSION}")
    _require_keys(cfg["sweep"], "sweep", {"parameters": (list,)}, ("parameters",))
    params = cfg["sweep"]["parameters"]
    if not 1 <= len(params) <= 2:
        raise ConfigError("sweep.parameters: expected one or two parameters")
    axes = []
    for i, param in enumerate(params):
        where = f"sweep.parameters[{i}]"
        _require_keys(param, where, {"path": (str,), "values": (list,)}, ("path", "values"))
        if not param["values"]:
            raise ConfigError(f"{where}.values: must not be empty")
        values = [
            _as_float(v, f"{where}.values[{j}]") for j, v in enumerate(param["values"])
        ]
        _resolve_path(cfg["base_case"], param["path"], f"{where}.path")
        axes.append((param["path"], values))
    if len(axes) == 2 and axes[0][0] == axes[1][0]:
        raise ConfigError("sweep.parameters: the two parameters share a path")
    base_id = cfg["base_case"].get("id", "sweep")

    grid = []
    combos = (
        [(a,) for a in axes[0][1]]
        if len(axes) == 1
        else [(a, b) for a in axes[0][1] for b in axes[1][1]]
    )
    for combo in combos:
        raw = copy.deepcopy(cfg["base_case"])
        suffix = []
        for (path, _values), value in zip(axes, combo):
            holder, key = _resolve_path(raw, path, "sweep")
            holder[key] = value
            suffix.append(f"{path.replace('.', '_')}={value:.6g}")
        raw["id"] = base_id + "--" + "--".join(suffix)
        grid.append(
            (
                validate_case(raw, "base_case", raw["id"]),
                {path: value for (path, _values), value in zip(axes, combo)},
            )
        )
    ids = [case["id"] for case, _params in grid]
    if len(set(ids)) != len(ids):
        raise ConfigError(
            "sweep.parameters: grid values collide after formatting; ids not unique"
        )
    return [path for path, _values in axes], grid


def _margin(record: dict):
    """Sweep ordering key: conjecture margin when present, else the plain gap."""
    if record["status"] == "error":
        return None
    rep = record["report"]
    if rep.get("conjecture"):
        return rep["conjecture"]["gap"]
    return rep["gap"]


def sweep(config_path: str, out_dir: str, jobs: int = 1, verbose: bool = False) -> int:
    cfg = _load_json(config_path)
    paths, grid = validate_sweep_config(cfg)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    params_by_id = {case["id"]: params for case, params in grid}
    records = _execute_batch([case for case, _params in grid], jobs)
    _write_reports(records, out)

    lines = ["case_id," + ",".join(paths) + ",gap,sharper_gap,conjecture_margin,verdict"]
    best = None
    for record in records:
        params = params_by_id[record["id"]]
        if record["status"] == "error":
            row = [record["id"], *(_fmt(params[p]) for p in paths), "", "", "", "error"]
            lines.append(",".join(row))
            continue
        rep = record["report"]
        sharper_gap = rep["sharper"]["gap"] if rep.get("sharper") else None
        margin = _margin(record)
        conj = rep["conjecture"]["gap"] if rep.get("conjecture") else None
        lines.append(
            ",".join(
                [
                    record["id"],
                    *(_fmt(params[p]) for p in paths),
                    _fmt(rep["gap"]),
                    _fmt(sharper_gap),
                    _fmt(conj),
                    record["status"],
                ]
            )
        )
        if margin is not None and (best is None or margin < best[0]):
            best = (margin, record["id"], params)
    (out / "sweep.csv").write_text("\n".join(lines) + "\n")

    summary = {
        "cases": len(records),
        "errors": sum(r["status"] == "error" for r in records),
        "fails": sum(r["status"] == "fail" for r in records),
        "margin_kind": "conjecture" if any(
            r["status"] != "error" and r["report"].get("conjecture") for r in records
        ) else "main-gap",
        "minimal_margin": None
        if best is None
        else {"margin": best[0], "case_id": best[1], "parameters": best[2]},
    }
    (out / "sweep_summary.json").write_text(
        json.dumps(summary, sort_keys=True, indent=2) + "\n"
    )
    if verbose:
        for record in records:
            print(f"{record['id']}: {record['status']}")
    if best is not None:
        print(
            f"{len(records)} case(s); minimal margin {best[0]:.6g} at {best[1]} -> {out}"
        )
    else:
        print(f"{len(records)} case(s); no margins computed -> {out}")
    return _exit_code(records)


# ---------------------------------------------------------------------------
# entry point


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON ({exc})") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config: top level must be an object")
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wittenlab",
        description="Weighted Neumann eigenvalue comparisons against matched balls.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, blurb in (
        ("run", "execute the cases of a config file"),
        ("sweep", "execute a parameter family derived from a base case"),
    ):
        cmd = sub.add_parser(name, help=blurb)
        cmd.add_argument("config", help="path to the JSON config")
        cmd.add_argument("--out", default="wittenlab-out", help="output directory")
        cmd.add_argument("--jobs", type=int, default=1, help="parallel worker count")
        cmd.add_argument("--verbose", action="store_true", help="per-case lines")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return run(args.config, args.out, jobs=args.jobs, verbose=args.verbose)
        return sweep(args.config, args.out, jobs=args.jobs, verbose=args.verbose)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_ERROR
