"""Command-line interface: distributions, observable sweeps, self-validation."""

from __future__ import annotations

import argparse
import io
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__, kernels
from .detection import PnrPovm, joint_distribution
from .errors import DomainError, HeraldImpossibleError, TrimerError
from .evolution import (
    DEFAULT_TAIL_TOLERANCE,
    SqueezeSource,
    default_lmax,
    evolve_multinomial,
    evolve_oracle,
    prepare_input,
    tail_mass,
)
from .optics import DEFAULT_SPLIT_RATIO, SQRT2, CouplerConfig, intensity_ratio, solve_zf, unitary_from_theta
from .simulation import OBSERVABLES, distribution, observable

log = logging.getLogger("tmsv_trimer")

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_VALIDATION = 0, 1, 2, 3
FLOAT_FORMAT = "{:.12g}"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    r_values: list[float] = field(default_factory=list)
    N_values: list[int] = field(default_factory=lambda: [0, 1, 2, 3])
    eta_b: float = 1.0
    eta_outer: float = 1.0
    kappa: float = 1.0
    z: float | None = None
    ratio: float = DEFAULT_SPLIT_RATIO
    l_max: int | None = None
    tail_tolerance: float = DEFAULT_TAIL_TOLERANCE
    output_format: str = "csv"
    output_path: str | None = None
    jobs: int = 1
    observable: str | None = None

    def validate(self) -> None:
        if self.output_format not in ("csv", "json"):
            raise UsageError(f"unknown format {self.output_format!r}")
        if self.jobs < 1:
            raise UsageError("--jobs must be at least 1")
        for r in self.r_values:
            if not 0 < r < 1:
                raise DomainError(f"|r| must lie in (0, 1), got {r}")
        if any(n < 0 for n in self.N_values):
            raise DomainError("subtracted photon numbers must be non-negative")
        for name in ("eta_b", "eta_outer"):
            eta = getattr(self, name)
            if not 0 < eta <= 1:
                raise DomainError(f"{name} must lie in (0, 1], got {eta}")
        if self.l_max is not None and self.l_max < 0:
            raise DomainError("l_max must be non-negative")
        if not self.tail_tolerance > 0:
            raise DomainError("tail tolerance must be positive")
        CouplerConfig(self.kappa, self.resolved_z)

    @property
    def resolved_z(self) -> float:
        return self.z if self.z is not None else solve_zf(self.kappa, self.ratio)

    @property
    def theta(self) -> float:
        return SQRT2 * self.kappa * self.resolved_z

    def lmax_for(self, r: float) -> int:
        return self.l_max if self.l_max is not None else default_lmax(r, self.tail_tolerance)

    def provenance(self) -> dict[str, Any]:
        info = asdict(self)
        # execution details that do not affect results
        info.pop("output_path")
        info.pop("jobs")
        info["z"] = self.resolved_z
        info["z_mode"] = "explicit" if self.z is not None else "ratio"
        info["theta"] = self.theta
        info["l_max_resolved"] = {_fmt(r): self.lmax_for(r) for r in self.r_values}
        info["kernel_backend"] = kernels.BACKEND
        info["version"] = __version__
        return info


def _fmt(x: float) -> str:
    return FLOAT_FORMAT.format(x)


def _round(obj):
    """Recursively fix floats to 12 significant digits for byte-stable JSON."""
    if isinstance(obj, float):
        return float(_fmt(obj)) if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, np.generic):
        return _round(obj.item())
    return obj


# --- config file ---------------------------------------------------------

_KEY_ALIASES = {
    "r": "r_values",
    "r_values": "r_values",
    "n": "N_values",
    "n_values": "N_values",
    "eta_b": "eta_b",
    "eta_outer": "eta_outer",
    "kappa": "kappa",
    "z": "z",
    "ratio": "ratio",
    "lmax": "l_max",
    "l_max": "l_max",
    "tail_tol": "tail_tolerance",
    "tail_tolerance": "tail_tolerance",
    "format": "output_format",
    "output_format": "output_format",
    "out": "output_path",
    "output_path": "output_path",
    "jobs": "jobs",
    "observable": "observable",
}
_LIST_KEYS = {"r_values": float, "N_values": int}
_SCALAR_KEYS = {
    "eta_b": float,
    "eta_outer": float,
    "kappa": float,
    "z": float,
    "ratio": float,
    "l_max": int,
    "tail_tolerance": float,
    "output_format": str,
    "output_path": str,
    "jobs": int,
    "observable": str,
}


def _parse_ratio(text: str) -> float:
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)


def _split_list(values: Sequence[str], cast) -> list:
    out = []
    for item in values:
        out.extend(cast(tok) for tok in str(item).replace(",", " ").split())
    return out


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Read a flat ``key = value`` file; keys mirror the command-line flags."""
    values: dict[str, Any] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":" if ":" in line else None
        if sep is None:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split(sep, 1))
        name = _KEY_ALIASES.get(key.lower().replace("-", "_"))
        if name is None:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            if name in _LIST_KEYS:
                values[name] = _split_list([raw], _LIST_KEYS[name])
            elif name == "ratio":
                values[name] = _parse_ratio(raw)
            else:
                values[name] = _SCALAR_KEYS[name](raw)
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {exc}") from None
    return values


# --- argument parsing ----------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file; flags override it")
    common.add_argument("--r", nargs="+", help="squeeze magnitudes |r| (space or comma separated)")
    common.add_argument("--N", nargs="+", help="numbers of photons detected in the central waveguide")
    common.add_argument("--eta-b", type=float, help="efficiency of the central (herald) detector")
    common.add_argument("--eta-outer", type=float, help="efficiency of the detectors at ports a and c")
    common.add_argument("--kappa", type=float, help="coupling constant")
    common.add_argument("--z", type=float, help="explicit propagation length (overrides --ratio)")
    common.add_argument("--ratio", type=_parse_ratio, help="target I_center/I_outer, default 1/9")
    common.add_argument("--lmax", type=int, help="truncation of the squeeze sum")
    common.add_argument("--tail-tol", type=float, help="tail probability bound used to pick l_max")
    common.add_argument("--format", choices=["csv", "json"], help="output format")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--jobs", type=int, help="worker processes for sweep points")

    parser = _Parser(prog="tmsv-trimer", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("jointdist", parents=[common], help="joint photon-number distributions")
    sweep = sub.add_parser("sweep", parents=[common], help="observable over an (r, N) grid")
    sweep.add_argument("--observable", choices=OBSERVABLES)
    val = sub.add_parser("validate", parents=[common], help="run the invariant checks")
    val.add_argument("--perturb-theta", type=float, default=0.0, help=argparse.SUPPRESS)
    sub.add_parser("zf", parents=[common], help="coupling length for a target split ratio")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values: dict[str, Any] = load_config_file(args.config) if args.config else {}
    flags = {
        "r_values": _split_list(args.r, float) if args.r else None,
        "N_values": _split_list(args.N, int) if args.N else None,
        "eta_b": args.eta_b,
        "eta_outer": args.eta_outer,
        "kappa": args.kappa,
        "z": args.z,
        "ratio": args.ratio,
        "l_max": args.lmax,
        "tail_tolerance": args.tail_tol,
        "output_format": args.format,
        "output_path": args.out,
        "jobs": args.jobs,
        "observable": getattr(args, "observable", None),
    }
    values.update({k: v for k, v in flags.items() if v is not None})
    config = RunConfig(**values)
    config.validate()
    return config


# --- computations --------------------------------------------------------


def _distribution_rows(config: RunConfig, r: float) -> list[dict[str, Any]]:
    rows = []
    for N in config.N_values:
        params = {"r": r, "N": N, "eta_b": config.eta_b, "eta_outer": config.eta_outer, "theta": config.theta,
                  "l_max": config.lmax_for(r)}
        try:
            d = distribution(r, N, config.theta, config.eta_b, config.eta_outer, config.l_max, config.tail_tolerance)
        except HeraldImpossibleError as exc:
            rows.append({"params": params, "error": f"herald impossible: {exc}"})
            continue
        rows.append({"params": params, "matrix": d.trimmed().tolist(), "success_probability": d.success_probability})
    return rows


def _sweep_rows(config: RunConfig, r: float) -> list[dict[str, Any]]:
    rows = []
    for N in config.N_values:
        try:
            value = observable(config.observable, r, N, config.theta, config.eta_b, config.eta_outer,
                               config.l_max, config.tail_tolerance)
        except HeraldImpossibleError as exc:
            log.warning("r=%s N=%s: %s", r, N, exc)
            value = float("nan")
        rows.append({"r": r, "N": N, "eta_b": config.eta_b, "eta_outer": config.eta_outer, "theta": config.theta,
                     "observable": config.observable, "value": value})
    return rows


def _map_r(func, config: RunConfig) -> list[dict[str, Any]]:
    if config.jobs > 1 and len(config.r_values) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            chunks = list(pool.map(func, [config] * len(config.r_values), config.r_values))
    else:
        chunks = [func(config, r) for r in config.r_values]
    return [row for chunk in chunks for row in chunk]


def _provenance_lines(config: RunConfig) -> list[str]:
    return [f"# {k}={json.dumps(_round(v), sort_keys=True)}" for k, v in config.provenance().items()]


def render_jointdist(config: RunConfig, rows: list[dict[str, Any]]) -> str:
    if config.output_format == "json":
        return json.dumps(_round({"config": config.provenance(), "results": rows}), indent=1) + "\n"
    buf = io.StringIO()
    buf.writelines(line + "\n" for line in _provenance_lines(config))
    buf.write("r,N,eta_b,eta_outer,theta,success_probability,m,n,probability\n")
    for row in rows:
        p = row["params"]
        head = ",".join(_fmt(p[k]) for k in ("r", "N", "eta_b", "eta_outer", "theta"))
        if "error" in row:
            buf.write(f"# {head}: {row['error']}\n")
            continue
        succ = _fmt(row["success_probability"])
        for m, line in enumerate(row["matrix"]):
            for n, prob in enumerate(line):
                buf.write(f"{head},{succ},{m},{n},{_fmt(prob)}\n")
    return buf.getvalue()


def render_sweep(config: RunConfig, rows: list[dict[str, Any]]) -> str:
    if config.output_format == "json":
        return json.dumps(_round({"config": config.provenance(), "rows": rows}), indent=1) + "\n"
    buf = io.StringIO()
    buf.writelines(line + "\n" for line in _provenance_lines(config))
    buf.write("r,N,eta_b,eta_outer,theta,observable,value\n")
    for row in rows:
        buf.write(",".join([_fmt(row["r"]), str(row["N"]), _fmt(row["eta_b"]), _fmt(row["eta_outer"]),
                            _fmt(row["theta"]), row["observable"], _fmt(row["value"])]) + "\n")
    return buf.getvalue()


@dataclass
class Check:
    name: str
    passed: bool
    residual: float
    tolerance: float
    detail: str = ""


def run_validation(config: RunConfig, perturb_theta: float = 0.0) -> list[Check]:
    """Invariant suite; ``perturb_theta`` shifts the multinomial path only (negative control)."""
    checks: list[Check] = []
    r_values = config.r_values or [0.2, 0.6]
    theta = config.theta

    rng = np.random.default_rng(0)
    res = max(
        float(np.abs(u @ u.conj().T - np.eye(3)).max())
        for u in (unitary_from_theta(t).entries for t in rng.uniform(0, 2 * math.pi, 100))
    )
    checks.append(Check("unitarity", res < 1e-12, res, 1e-12))

    res = abs(intensity_ratio(CouplerConfig(config.kappa, solve_zf(config.kappa, config.ratio))) - config.ratio)
    checks.append(Check("zf-round-trip", res < 1e-10, res, 1e-10))

    worst, norm_worst = 0.0, 0.0
    for r in r_values:
        for th in (theta, 1.0):
            source = SqueezeSource(r, min(config.lmax_for(r), 10))
            state = prepare_input(source)
            a = evolve_multinomial(state, unitary_from_theta(th + perturb_theta))
            b = evolve_oracle(state, CouplerConfig.from_theta(th, kappa=config.kappa))
            keys = set(a.to_dict()) | set(b.to_dict())
            worst = max(worst, max(abs(a.amplitude(k) - b.amplitude(k)) for k in keys))
            norm_worst = max(norm_worst, abs(a.norm_squared() - state.norm_squared()))
    checks.append(Check("oracle-equivalence", worst < 1e-9, worst, 1e-9))
    checks.append(Check("norm-preservation", norm_worst < 1e-10, norm_worst, 1e-10))

    parity = sym = norm = 0.0
    for r in r_values:
        for N in config.N_values:
            try:
                ideal = distribution(r, N, theta, 1.0, 1.0, config.l_max, config.tail_tolerance).probabilities
                real = distribution(r, N, theta, config.eta_b, config.eta_outer, config.l_max,
                                    config.tail_tolerance).probabilities
            except HeraldImpossibleError:
                continue
            m, n = np.indices(ideal.shape)
            parity = max(parity, float(ideal[(m + n + N) % 2 == 1].max(initial=0.0)))
            for p in (ideal, real):
                sym = max(sym, float(np.abs(p - p.T).max()))
                norm = max(norm, abs(float(p.sum()) - 1.0))
    checks.append(Check("parity-selection", parity < 1e-12, parity, 1e-12))
    checks.append(Check("exchange-symmetry", sym < 1e-10, sym, 1e-10))
    checks.append(Check("normalization", norm < 1e-9, norm, 1e-9))

    tail = max(tail_mass(r, config.lmax_for(r)) for r in r_values)
    drift = 0.0
    for r in r_values:
        lm = config.lmax_for(r)
        for N in config.N_values:
            try:
                drift = max(drift, abs(observable("detM", r, N, theta, 1.0, 1.0, lm)
                                       - observable("detM", r, N, theta, 1.0, 1.0, lm + 4)))
            except HeraldImpossibleError:
                continue
    checks.append(Check("truncation-convergence", tail <= config.tail_tolerance, tail, config.tail_tolerance,
                        f"tail mass {tail:.3e}; Det(M) drift under l_max+4 = {drift:.3e}"))
    return checks


def render_validation(config: RunConfig, checks: list[Check]) -> str:
    if config.output_format == "json":
        return json.dumps(_round({"config": config.provenance(), "checks": [asdict(c) for c in checks]}), indent=1) + "\n"
    lines = []
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        extra = f"  ({c.detail})" if c.detail else ""
        lines.append(f"{status} {c.name}: residual={c.residual:.3e} tol={c.tolerance:.1e}{extra}")
    return "\n".join(lines) + "\n"


def _emit(config: RunConfig, text: str) -> None:
    if config.output_path:
        Path(config.output_path).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"tmsv-trimer: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        config = resolve_config(args)
        if args.command in ("jointdist", "sweep") and not config.r_values:
            raise UsageError("at least one --r value is required")
        if args.command == "jointdist":
            _emit(config, render_jointdist(config, _map_r(_distribution_rows, config)))
        elif args.command == "sweep":
            if config.observable is None:
                raise UsageError("sweep needs --observable")
            if config.observable == "xi" and (config.eta_b != 1.0 or config.eta_outer != 1.0):
                raise DomainError("xi is only defined for ideal detection; set --eta-b 1 --eta-outer 1")
            _emit(config, render_sweep(config, _map_r(_sweep_rows, config)))
        elif args.command == "validate":
            checks = run_validation(config, args.perturb_theta)
            _emit(config, render_validation(config, checks))
            if not all(c.passed for c in checks):
                return EXIT_VALIDATION
        elif args.command == "zf":
            info = {"kappa": config.kappa, "ratio": config.ratio, "z_f": solve_zf(config.kappa, config.ratio),
                    "theta": SQRT2 * config.kappa * solve_zf(config.kappa, config.ratio)}
            if config.output_format == "json":
                _emit(config, json.dumps(_round(info)) + "\n")
            else:
                _emit(config, "kappa,ratio,z_f,theta\n" + ",".join(_fmt(v) for v in info.values()) + "\n")
    except UsageError as exc:
        print(f"tmsv-trimer: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TrimerError, TypeError) as exc:
        print(f"tmsv-trimer: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
