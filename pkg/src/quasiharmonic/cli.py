"""Scenario runner: ``quasiharmonic <command> --config FILE``.

Commands: approx, chi, regularity, two-constants, uniqueness.  A config is
a JSON object with ``schema_version`` 1, a ``scene`` of sampled sets, an
optional ``function`` and one section named after the command.  Unknown
keys are rejected before anything is computed.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import copy
import json
import logging
import os
import sys
import tempfile
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import rates
from .chi_measure import ChiParams, ChiSolver, chi_field, is_null_chi
from .geometry import GeometryError, SampledSet, Scene, ShapeDescriptor, sample_shape
from .harmonic_basis import BasisError, BasisSpec
from .minimax import deviation_sequence, results_to_csv, target_from_spec
from .regularity import ANNIHILATED, radius_profiles, regularity_profile
from .two_constants import verify_random, with_adversary
from .uniqueness import UniquenessConfig, run_pipeline

SCHEMA_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
COMMANDS = ("approx", "chi", "regularity", "two-constants", "uniqueness")

log = logging.getLogger("quasiharmonic")


class ConfigError(ValueError):
    pass


# allowed keys per command section
_SECTIONS = {
    "approx": {"m_max", "window", "theta"},
    "chi": {"epsilon_grid", "alpha_per_epsilon", "surrogate_degree", "tolerance", "t_max", "grid"},
    "regularity": {"x0", "r", "m_max", "window", "theta", "mesh", "radius_grid"},
    "two-constants": {"alpha", "eps", "degree", "n_samples", "t_grid", "check_region", "chi_degree"},
    "uniqueness": set(UniquenessConfig.__dataclass_fields__) - {"seed"},
}
_SCENE_SETS = {
    "approx": {"K"},
    "chi": {"E", "D"},
    "regularity": {"E"},
    "two-constants": {"E", "K", "D"},
    "uniqueness": {"K", "E", "D"},
}
_TOP = {"schema_version", "description", "seed", "scene", "function"}


@dataclass
class Prepared:
    command: str
    config: dict
    seed: int
    sets: dict
    function: object
    section: dict
    scene: Scene | None = None


def _check_keys(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be an object")
    extra = set(obj) - set(allowed)
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(extra)}")


def _build_set(name, spec, sets, function):
    _check_keys(spec, {"shape", "mesh", "zero_set_of", "tol"}, f"scene.{name}")
    if "zero_set_of" in spec:
        src = spec["zero_set_of"]
        if src not in sets:
            raise ConfigError(f"scene.{name}: zero_set_of refers to undefined set {src!r}")
        if function is None:
            raise ConfigError(f"scene.{name}: zero_set_of needs a 'function'")
        S = sets[src]
        tol = float(spec.get("tol", 1e-9))
        out = S.subset(np.abs(function(S.points)) < tol, name)
        if out.is_empty:
            raise ConfigError(f"scene.{name}: the function has no samples with |f| < {tol:g}")
        return out
    if "shape" not in spec or "mesh" not in spec:
        raise ConfigError(f"scene.{name} needs 'shape' and 'mesh' (or 'zero_set_of')")
    shape = ShapeDescriptor.from_dict(spec["shape"])
    return sample_shape(shape, float(spec["mesh"]), name)


def _refined(config: dict) -> dict:
    # halve every mesh and double the chi grid
    cfg = copy.deepcopy(config)
    for spec in cfg.get("scene", {}).values():
        if isinstance(spec, dict) and "mesh" in spec:
            spec["mesh"] = spec["mesh"] / 2
    chi = cfg.get("chi")
    if isinstance(chi, dict) and "grid" in chi:
        chi["grid"] = 2 * chi["grid"]
    return cfg


def load_config(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None


def bundled_scenarios() -> list[str]:
    root = resources.files("quasiharmonic") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def bundled_path(name: str):
    p = resources.files("quasiharmonic") / "scenarios" / f"{name}.json"
    if not p.is_file():
        raise ConfigError(f"no bundled scenario {name!r}; available: {bundled_scenarios()}")
    return p


def prepare(command: str, config: dict, *, refine: bool = False, seed: int | None = None) -> Prepared:
    """Validate ``config`` for ``command`` and build every object it names.

    Raises :class:`ConfigError` on anything wrong with the configuration.
    """
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    _check_keys(config, _TOP | {command}, "config")
    if config.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}")
    if refine:
        config = _refined(config)
    section = config.get(command, {})
    _check_keys(section, _SECTIONS[command], command)
    run_seed = int(config.get("seed", 0) if seed is None else seed)
    try:
        function = None
        if "function" in config:
            fn = config["function"]
            _check_keys(fn, {"kind", "params"}, "function")
            function = target_from_spec(fn.get("kind"), fn.get("params"))
        elif command in ("approx", "uniqueness"):
            raise ConfigError(f"{command} needs a 'function'")
        scene = config.get("scene")
        needed = _SCENE_SETS[command]
        allowed = needed | ({"delta"} if command == "uniqueness" else set())
        _check_keys(scene, allowed, "scene")
        missing = needed - set(scene)
        if missing:
            raise ConfigError(f"scene is missing {sorted(missing)}")
        sets: dict = {}
        # sets defined by shape first, then those derived from them
        order = sorted(sorted(needed), key=lambda n: "zero_set_of" in scene[n])
        for name in order:
            sets[name] = _build_set(name, scene[name], sets, function)
        prepared = Prepared(command, config, run_seed, sets, function, section)
        if command == "uniqueness":
            if "delta" not in scene:
                raise ConfigError("scene.delta is required for uniqueness")
            prepared.scene = Scene(sets["K"], sets["E"], sets["D"], float(scene["delta"]))
            UniquenessConfig(**section, seed=run_seed)
        elif command == "chi":
            _chi_params(section)
        elif command == "regularity":
            if "x0" not in section or "r" not in section:
                raise ConfigError("regularity needs 'x0' and 'r'")
        elif command == "approx":
            BasisSpec(sets["K"].dim, int(section.get("m_max", 20)))
        return prepared
    except ConfigError:
        raise
    except (GeometryError, BasisError, ValueError, TypeError, KeyError) as exc:
        raise ConfigError(str(exc)) from None


def _chi_params(section) -> ChiParams:
    keys = {"epsilon_grid", "alpha_per_epsilon", "surrogate_degree", "tolerance", "t_max"}
    kw = {k: v for k, v in section.items() if k in keys}
    if "epsilon_grid" in kw:
        kw["epsilon_grid"] = tuple(kw["epsilon_grid"])
    return ChiParams(**kw)


# ---------------------------------------------------------------- outputs

def _json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def write_atomic(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _clean(v):
    # JSON has no inf/nan
    if isinstance(v, float):
        if v != v:
            return None
        if v in (float("inf"), float("-inf")):
            return "inf" if v > 0 else "-inf"
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    return v


def _with_schema(d: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, **_clean(d)}


# ---------------------------------------------------------------- commands

def run_approx(p: Prepared, out: Path, svg: bool) -> dict:
    K = p.sets["K"]
    s = p.section
    m_max = int(s.get("m_max", 20))
    window = int(s.get("window", 6))
    results = deviation_sequence(p.function, K, m_max)
    devs = [r.deviation for r in results]
    report = rates.classify(devs, window, float(s.get("theta", rates.DEFAULT_THETA)), exact_tol=1e-9)
    files = {
        "deviations.csv": results_to_csv(results),
        "decay_report.json": _json(_with_schema({"function": p.function.label, **report.to_dict()})),
    }
    if svg:
        ms = list(range(m_max + 1))
        files["deviations.svg"] = rates.semilog_svg({"l_m": (ms, devs)}, f"least deviation of {p.function.label}")
    return {"files": files, "summary": f"{report.classification} (limsup {report.limsup_estimate:.4f}, "
                                       f"liminf {report.liminf_estimate:.4f})"}


def run_chi(p: Prepared, out: Path, svg: bool) -> dict:
    E, D = p.sets["E"], p.sets["D"]
    params = _chi_params(p.section)
    field_ = chi_field(int(p.section.get("grid", 20)), E, D, params)
    null = is_null_chi(E, D, params, field=field_)
    on_E = _chi0_on_E(E, D, params)
    verdict = {
        **null.to_dict(),
        "chi0_range": [float(field_.chi0.min()), float(field_.chi0.max())],
        "chi0_max_on_E": on_E,
        "grid_points": len(field_.grid),
        "surrogate_degree": params.surrogate_degree,
        "epsilon_grid": list(params.epsilon_grid),
    }
    files = {"chi_field.csv": field_.to_csv(), "null_verdict.json": _json(_with_schema(verdict))}
    if svg and E.dim == 2:
        files["chi_field.svg"] = field_.to_svg()
    return {"files": files, "summary": f"chi_0 in [{verdict['chi0_range'][0]:.4f}, {verdict['chi0_range'][1]:.4f}], "
                                       f"null={null.is_null}"}


def _chi0_on_E(E: SampledSet, D: SampledSet, params: ChiParams) -> float:
    # chi_0 must vanish on E; eight evenly spread samples are checked
    solver = ChiSolver(E, D, params)
    idx = np.linspace(0, len(E) - 1, min(len(E), 8)).round().astype(int)
    return float(max(solver.chi_eps_values(E.points[i])[-1] for i in np.unique(idx)))


def run_regularity(p: Prepared, out: Path, svg: bool) -> dict:
    E = p.sets["E"]
    s = p.section
    kw = dict(window=int(s.get("window", 5)), theta=float(s.get("theta", 0.1)), mesh=s.get("mesh"))
    m_max = int(s.get("m_max", 15))
    if s.get("radius_grid", False):
        profiles = radius_profiles(E, s["x0"], float(s["r"]), m_max, **kw)
    else:
        profiles = [regularity_profile(E, s["x0"], float(s["r"]), m_max, **kw)]
    main = profiles[0]
    files = {
        "regularity.json": _json(_with_schema({"profiles": [q.to_dict() for q in profiles]})),
        "regularity.csv": main.to_csv(),
    }
    summary = f"{main.verdict} (growth {main.growth_estimate:.4f})"
    if main.verdict == ANNIHILATED:
        coeffs = ", ".join(f"{c:.6g}" for c in main.witness.coeffs)
        summary += f"; witness coefficients [{coeffs}]"
    return {"files": files, "summary": summary}


def run_two_constants(p: Prepared, out: Path, svg: bool) -> dict:
    E, K, D = p.sets["E"], p.sets["K"], p.sets["D"]
    s = p.section
    alpha, eps = float(s.get("alpha", 0.2)), float(s.get("eps", 0.2))
    chi_params = ChiParams(surrogate_degree=int(s.get("chi_degree", 12)))
    rep = verify_random(E, K, D, alpha, eps, int(s.get("degree", 10)), int(s.get("n_samples", 500)), p.seed,
                        check_region=bool(s.get("check_region", True)), chi_params=chi_params)
    rep = with_adversary(rep, E, D, s.get("t_grid", [1, 10, 100, 1000]))
    files = {"two_constants.json": _json(_with_schema(rep.to_dict())), "ratios.csv": rep.ratios_csv()}
    return {"files": files, "summary": f"worst_ratio {rep.worst_ratio:.4f}, fitted_C {rep.fitted_C:.4f}, "
                                       f"adversarial_ratio {rep.adversarial_ratio:.4f}"}


def run_uniqueness(p: Prepared, out: Path, svg: bool) -> dict:
    cfg = UniquenessConfig(**p.section, seed=p.seed)
    rep = run_pipeline(p.function, p.scene, cfg)
    verdict = {
        "conclusion": rep.conclusion,
        "hypothesis_checks": rep.hypothesis_checks,
        "d_estimate": rep.d_estimate,
        "f_bound_U": rep.f_bound_U,
        "notes": rep.notes,
    }
    files = {
        "uniqueness.json": _json(_with_schema(rep.to_dict())),
        "chain.csv": rep.chain_csv(),
        "verdict.json": _json(_with_schema(verdict)),
    }
    if svg and rep.records:
        files["norm_U.svg"] = rep.to_svg()
    return {"files": files, "summary": rep.conclusion}


RUNNERS = {
    "approx": run_approx,
    "chi": run_chi,
    "regularity": run_regularity,
    "two-constants": run_two_constants,
    "uniqueness": run_uniqueness,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="quasiharmonic", description=__doc__.splitlines()[0])
    ap.add_argument("--list-scenarios", action="store_true", help="print the bundled scenario names and exit")
    sub = ap.add_subparsers(dest="command")
    for name in COMMANDS:
        sp = sub.add_parser(name)
        src = sp.add_mutually_exclusive_group(required=True)
        src.add_argument("--config", help="path of a JSON scenario")
        src.add_argument("--scenario", help="name of a bundled scenario")
        sp.add_argument("--out", default="out", help="output directory (default: ./out)")
        sp.add_argument("--refine", action="store_true", help="halve every mesh (oracle runs)")
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
        sp.add_argument("--svg", choices=("on", "off"), default="on")
        sp.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    if args.list_scenarios:
        print("\n".join(bundled_scenarios()))
        return EXIT_OK
    if args.command is None:
        ap.print_usage(sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        path = args.config if args.config is not None else bundled_path(args.scenario)
        prepared = prepare(args.command, load_config(path), refine=args.refine, seed=args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out)
    try:
        result = RUNNERS[args.command](prepared, out, args.svg == "on")
    except Exception as exc:  # any failure past validation is numerical
        log.debug("numerical failure", exc_info=True)
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for name, text in result["files"].items():
        write_atomic(out / name, text)
    print(f"{args.command}: {result['summary']}")
    print(f"wrote {', '.join(sorted(result['files']))} to {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
