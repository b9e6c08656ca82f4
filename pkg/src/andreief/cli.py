"""Command-line verification frontend.

Resolves a run configuration from a flat JSON config file and/or command
line flags (flags win), executes the requested verification engine, and
emits a machine-readable report that embeds the fully resolved
configuration, so pass/fail decisions are recomputable from the report
alone.  Exit status: 0 when every check passed, 1 when an identity check
failed, 2 on usage or engine errors.
"""

from __future__ import annotations

import argparse
import io
import csv
import json
import sys
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from .biortho import biorthogonality_residuals, biorthogonalize, partition_function
from .discrete import (
    block_reclaims_cauchy_binet,
    cauchy_binet_lhs,
    cauchy_binet_rhs,
    DiscretePointSet,
    discretized_andreief,
    minor_summation_lhs,
    minor_summation_rhs,
)
from .ensembles import EnsembleSpec, KernelFunction, build_ensemble
from .identities import (
    DEFAULT_SEED,
    DEFAULT_TOLERANCE,
    VerifyConfig,
    andreief_rhs,
    chebyshev_gap,
    debruijn_lhs_quadrature,
    debruijn_rhs,
    gram_matrix,
    mc_agrees,
    verify_andreief,
)
from .linalg import relative_gap
from .quadrature import DEFAULT_NODES_1D, DEFAULT_NODES_TENSOR, Domain

__all__ = ["RunConfig", "main", "parse_config", "run"]

COMMANDS = (
    "verify-andreief",
    "verify-debruijn",
    "verify-discrete",
    "verify-chebyshev",
    "biorthogonalize",
    "partition",
)

# named integrands for the covariance-gap checks; kept tiny on purpose,
# arbitrary code in a config file is a non-goal
CHEBYSHEV_FUNCTIONS = {
    "x": lambda x: x,
    "-x": lambda x: -x,
    "x^2": lambda x: x**2,
    "-x^2": lambda x: -(x**2),
    "x^3": lambda x: x**3,
    "exp": np.exp,
    "-exp": lambda x: -np.exp(x),
    "cos": np.cos,
}

_INT_KEYS = {"size", "n_nodes", "mc_samples", "seed", "nu", "m", "rows", "cols", "instances"}
_FLOAT_KEYS = {"tolerance", "theta", "c", "a", "b"}


class UsageError(ValueError):
    """Configuration input that cannot be resolved into a run."""


@dataclass(frozen=True)
class CheckResult:
    """One verified equality; sigma is the MC standard error when the
    left side is a Monte Carlo mean, else None."""

    name: str
    lhs: float
    rhs: float
    abs_gap: float
    rel_gap: float
    sigma: float | None
    passed: bool


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run description.

    ensemble_params records the constructor arguments of the resolved
    ensemble and extras the command-specific settings; both go into the
    report verbatim.  timestamp=False drops the timestamp field so
    repeated runs byte-compare equal.
    """

    command: str
    ensemble: EnsembleSpec
    ensemble_params: dict
    n_nodes: int = DEFAULT_NODES_1D
    mc_samples: int = 0
    seed: int = DEFAULT_SEED
    tolerance: float = DEFAULT_TOLERANCE
    output_path: str | None = None
    format: str = "json"
    extras: dict | None = None
    timestamp: bool = True

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(
                f"unknown command {self.command!r}; choose from: " + ", ".join(COMMANDS)
            )
        if not self.tolerance > 0:
            raise UsageError("tolerance must be positive")
        if self.mc_samples < 0:
            raise UsageError("mc_samples must be non-negative")
        if self.n_nodes < 1:
            raise UsageError("n_nodes must be at least 1")
        if self.format not in ("json", "csv"):
            raise UsageError(f"unknown format {self.format!r}; choose json or csv")
        if self.extras is None:
            object.__setattr__(self, "extras", {})


# ---------------------------------------------------------------------------
# configuration resolution


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="andreief",
        description="Verify determinant/Pfaffian integration identities "
        "and their discrete analogues.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="JSON file with flat key-value settings")
    parser.add_argument("--ensemble", help="built-in ensemble name")
    parser.add_argument("--n", "--size", dest="size", type=int, help="number of functions N")
    parser.add_argument("--theta", type=float, help="stretching exponent")
    parser.add_argument("--c", type=float, help="Laguerre weight exponent")
    parser.add_argument("--nu", type=int, help="product-kernel offset")
    parser.add_argument("--m", type=int, help="number of product-kernel factors")
    parser.add_argument("--shifts", help="comma-separated shift list")
    parser.add_argument("--kernel", help="antisymmetric kernel name (verify-debruijn)")
    parser.add_argument("--rows", type=int, help="row count M (verify-discrete)")
    parser.add_argument("--cols", type=int, help="column count N (verify-discrete)")
    parser.add_argument("--instances", type=int, help="random instances (verify-discrete)")
    parser.add_argument("--f", help="first function name (verify-chebyshev)")
    parser.add_argument("--g", help="second function name (verify-chebyshev)")
    parser.add_argument("--a", type=float, help="interval start (verify-chebyshev)")
    parser.add_argument("--b", type=float, help="interval end (verify-chebyshev)")
    parser.add_argument("--n-nodes", dest="n_nodes", type=int, help="1-D quadrature nodes")
    parser.add_argument("--mc-samples", dest="mc_samples", type=int, help="Monte Carlo samples (0 disables)")
    parser.add_argument("--seed", type=int, help="random seed")
    parser.add_argument("--tolerance", type=float, help="relative pass tolerance")
    parser.add_argument("--output", dest="output_path", help="report file (default stdout)")
    parser.add_argument("--format", choices=("json", "csv"), help="report format")
    parser.add_argument("--no-timestamp", action="store_true", help="omit the timestamp field")
    return parser


def _coerce(key: str, value):
    try:
        if key in _INT_KEYS:
            if isinstance(value, bool) or not float(value) == int(value):
                raise ValueError
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except (TypeError, ValueError):
        raise UsageError(f"invalid value for {key!r}: {value!r}") from None
    return value


def _load_config_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path!r}: {exc}") from None
    return _load_config_text(text)


def _load_config_text(text: str) -> dict:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise UsageError("config must be a flat JSON object")
    return {key: _coerce(key, value) for key, value in raw.items()}


def _parse_shifts(value) -> tuple | None:
    if value is None:
        return None
    if isinstance(value, str):
        parts = [p for p in value.split(",") if p.strip()]
    elif isinstance(value, (list, tuple)):
        parts = list(value)
    else:
        raise UsageError(f"invalid value for 'shifts': {value!r}")
    try:
        return tuple(float(p) for p in parts)
    except (TypeError, ValueError):
        raise UsageError(f"invalid value for 'shifts': {value!r}") from None


def parse_config(source) -> RunConfig:
    """Resolve a RunConfig from CLI argv tokens or JSON config text.

    A list is parsed as flags (with --config merged underneath them); a
    string is parsed as the config text itself.  All defaults are applied
    here, so the result is fully resolved.
    """
    if isinstance(source, str):
        file_values = _load_config_text(source)
        flags = argparse.Namespace(**{a.dest: None for a in build_parser()._actions})
        command = file_values.get("command")
        if command is None:
            raise UsageError("config must name a command")
    else:
        flags = build_parser().parse_args(list(source))
        file_values = _load_config_file(flags.config) if flags.config else {}
        command = flags.command

    def pick(key, default, flag_name=None):
        flag_value = getattr(flags, flag_name or key, None)
        if flag_value is not None:
            return flag_value
        if key in file_values:
            return file_values[key]
        return default

    name = pick("ensemble", "uniform-monomial")
    size = pick("size", 2)
    shifts = _parse_shifts(pick("shifts", None))
    ensemble = build_ensemble(
        name,
        size,
        theta=pick("theta", 2.0),
        c=pick("c", 0.0),
        shifts=shifts,
        nu=pick("nu", 1),
        m=pick("m", 1),
    )
    ensemble_params = {
        "name": name,
        "size": size,
        "theta": pick("theta", 2.0),
        "c": pick("c", 0.0),
        "shifts": None if shifts is None else list(shifts),
        "nu": pick("nu", 1),
        "m": pick("m", 1),
    }

    extras: dict = {}
    if command == "verify-debruijn":
        extras["kernel"] = pick("kernel", "difference")
    elif command == "verify-discrete":
        extras["rows"] = pick("rows", 4)
        extras["cols"] = pick("cols", 3)
        extras["instances"] = pick("instances", 25)
        if extras["instances"] < 1:
            raise UsageError("instances must be at least 1")
    elif command == "verify-chebyshev":
        for key, default in (("f", "x"), ("g", "x^2")):
            chosen = pick(key, default)
            if chosen not in CHEBYSHEV_FUNCTIONS:
                raise UsageError(
                    f"unknown function {chosen!r} for {key!r}; choose from: "
                    + ", ".join(sorted(CHEBYSHEV_FUNCTIONS))
                )
            extras[key] = chosen
        extras["a"] = pick("a", 0.0)
        extras["b"] = pick("b", 1.0)

    return RunConfig(
        command=command,
        ensemble=ensemble,
        ensemble_params=ensemble_params,
        n_nodes=pick("n_nodes", DEFAULT_NODES_1D),
        mc_samples=pick("mc_samples", 0),
        seed=pick("seed", DEFAULT_SEED),
        tolerance=pick("tolerance", DEFAULT_TOLERANCE),
        output_path=pick("output_path", None),
        format=pick("format", "json"),
        extras=extras,
        # store_true flag: only True is informative, so merge with or
        timestamp=not (
            bool(getattr(flags, "no_timestamp", False))
            or bool(file_values.get("no_timestamp", False))
        ),
    )


# ---------------------------------------------------------------------------
# command engines


def _check(name, lhs, rhs, tolerance, sigma=None, passed=None) -> CheckResult:
    rel = relative_gap(lhs, rhs)
    return CheckResult(
        name=name,
        lhs=lhs,
        rhs=rhs,
        abs_gap=abs(lhs - rhs),
        rel_gap=rel,
        sigma=sigma,
        passed=bool(rel <= tolerance) if passed is None else bool(passed),
    )


def _run_verify_andreief(config: RunConfig):
    report = verify_andreief(
        config.ensemble,
        VerifyConfig(
            n_nodes_1d=config.n_nodes,
            n_nodes_tensor=DEFAULT_NODES_TENSOR,
            mc_samples=config.mc_samples,
            seed=config.seed,
            tolerance=config.tolerance,
        ),
    )
    checks = [
        _check("andreief-quadrature", report.lhs_quadrature, report.rhs, config.tolerance)
    ]
    if report.lhs_mc is not None:
        checks.append(
            _check(
                "andreief-mc",
                report.lhs_mc.mean,
                report.rhs,
                config.tolerance,
                sigma=report.lhs_mc.std_error,
                passed=mc_agrees(report.lhs_mc, report.rhs),
            )
        )
    return checks, {}


def _run_verify_debruijn(config: RunConfig):
    spec = config.ensemble
    kernel = KernelFunction.builtin(config.extras["kernel"])
    two_n = spec.size
    # both sides share one 1-D rule: the identity then holds exactly over
    # the discrete node measure, even for the discontinuous sign kernel
    rhs = debruijn_rhs(spec.left, kernel, spec.domain, config.n_nodes, two_n)
    lhs = debruijn_lhs_quadrature(
        spec.left, kernel, spec.domain, config.n_nodes, two_n
    )
    return [_check(f"debruijn-{kernel.kind}", lhs, rhs, config.tolerance)], {}


def _sample_points(domain: Domain, count: int, rng) -> DiscretePointSet:
    if domain.kind == "finite":
        pts = rng.uniform(domain.a, domain.b, size=count)
    elif domain.kind == "half_line":
        pts = rng.exponential(1.0, size=count)
    else:
        pts = rng.standard_normal(count)
    return DiscretePointSet(np.sort(pts))


def _worst_of(rows):
    return max(rows, key=lambda row: row[3])


def _run_verify_discrete(config: RunConfig):
    rng = np.random.default_rng(config.seed)
    rows_m = config.extras["rows"]
    cols_n = config.extras["cols"]
    instances = config.extras["instances"]
    spec = config.ensemble
    tolerance = config.tolerance

    def draw(r, c):
        return rng.integers(-3, 4, size=(r, c))

    def skew(order):
        raw = rng.integers(-3, 4, size=(order, order))
        return raw - raw.T

    cb_rows, ms_rows, bridge_rows, block_rows = [], [], [], []
    block_ratios = set()
    bridge_bitwise = True
    # minor summation needs an even row count; shrink odd requests by one
    ms_cols = cols_n - (cols_n % 2)
    for _ in range(instances):
        x, y = draw(rows_m, cols_n), draw(rows_m, cols_n)
        lhs, rhs = cauchy_binet_lhs(x, y), cauchy_binet_rhs(x, y)
        cb_rows.append((lhs, rhs, lhs == rhs, abs(lhs - rhs)))

        a, t = skew(rows_m), draw(ms_cols, rows_m)
        lhs, rhs = minor_summation_lhs(a, t), minor_summation_rhs(a, t)
        ms_rows.append((lhs, rhs, lhs == rhs, abs(lhs - rhs)))

        pts = _sample_points(spec.domain, max(rows_m, spec.size), rng)
        res = discretized_andreief(spec, pts)
        direct = cauchy_binet_lhs(res.x_matrix, res.y_matrix)
        bridge_bitwise = bridge_bitwise and res.lhs == direct
        gap = relative_gap(res.lhs, res.rhs)
        bridge_rows.append((res.lhs, res.rhs, gap <= tolerance, gap))

        ms, cb = block_reclaims_cauchy_binet(x, y)
        if cb != 0:
            block_ratios.add(ms // cb)
        block_rows.append((abs(ms), abs(cb), abs(ms) == abs(cb), abs(abs(ms) - abs(cb))))

    def summarize(name, rows, extra_ok=True):
        lhs, rhs, ok, _ = _worst_of(rows)
        return _check(
            name,
            lhs,
            rhs,
            tolerance,
            passed=extra_ok and all(r[2] for r in rows),
        )

    checks = [
        summarize("cauchy-binet", cb_rows),
        summarize("minor-summation", ms_rows),
        summarize("discretization-bridge", bridge_rows, extra_ok=bridge_bitwise),
        summarize("block-reclaims", block_rows, extra_ok=len(block_ratios) <= 1),
    ]
    payload = {"instances": instances, "bridge_bitwise": bool(bridge_bitwise)}
    return checks, payload


def _run_verify_chebyshev(config: RunConfig):
    f = CHEBYSHEV_FUNCTIONS[config.extras["f"]]
    g = CHEBYSHEV_FUNCTIONS[config.extras["g"]]
    domain = Domain.finite(config.extras["a"], config.extras["b"])
    direct, pair_form = chebyshev_gap(f, g, domain, config.n_nodes)
    checks = [_check("chebyshev-gap-identity", direct, pair_form, config.tolerance)]
    payload = {
        "gap": direct,
        "direction_reversed": bool(direct < -config.tolerance),
    }
    return checks, payload


def _run_biorthogonalize(config: RunConfig):
    system = biorthogonalize(config.ensemble, config.n_nodes)
    residuals = biorthogonality_residuals(system, config.n_nodes)
    scale = max(1.0, float(np.abs(system.h).max()))
    checks = [
        _check(f"pairing-{j}", float(residuals[j, j]), float(system.h[j]), config.tolerance)
        for j in range(system.size)
    ]
    off = residuals - np.diag(np.diag(residuals))
    worst = float(np.abs(off).max())
    checks.append(
        _check(
            "off-diagonal-residual",
            worst,
            0.0,
            config.tolerance,
            passed=worst <= config.tolerance * scale,
        )
    )
    payload = {
        "coefficients": {
            "c": system.c.tolist(),
            "d": system.d.tolist(),
            "h": system.h.tolist(),
        }
    }
    return checks, payload


def _run_partition(config: RunConfig):
    value = partition_function(config.ensemble, config.n_nodes)
    reference = andreief_rhs(gram_matrix(config.ensemble, config.n_nodes))
    checks = [_check("partition-vs-gram-determinant", value, reference, config.tolerance)]
    return checks, {"value": value}


_ENGINES = {
    "verify-andreief": _run_verify_andreief,
    "verify-debruijn": _run_verify_debruijn,
    "verify-discrete": _run_verify_discrete,
    "verify-chebyshev": _run_verify_chebyshev,
    "biorthogonalize": _run_biorthogonalize,
    "partition": _run_partition,
}


# ---------------------------------------------------------------------------
# report rendering


def _config_section(config: RunConfig) -> dict:
    return {
        "command": config.command,
        "ensemble": config.ensemble_params,
        "extras": config.extras,
        "format": config.format,
        "mc_samples": config.mc_samples,
        "n_nodes": config.n_nodes,
        "n_nodes_tensor": DEFAULT_NODES_TENSOR,
        "seed": config.seed,
        "tolerance": config.tolerance,
    }


def _render_json(checks, payload, config, timestamp) -> str:
    report = {
        "checks": [
            {
                "abs_gap": c.abs_gap,
                "lhs": c.lhs,
                "name": c.name,
                "passed": c.passed,
                "rel_gap": c.rel_gap,
                "rhs": c.rhs,
                "sigma": c.sigma,
            }
            for c in checks
        ],
        "config": _config_section(config),
        "passed": all(c.passed for c in checks),
    }
    report.update(payload)
    if timestamp is not None:
        report["timestamp"] = timestamp
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def _flatten(prefix: str, value):
    if isinstance(value, dict):
        for key in sorted(value):
            yield from _flatten(f"{prefix}.{key}" if prefix else key, value[key])
    else:
        yield prefix, json.dumps(value)


def _render_csv(checks, payload, config, timestamp) -> str:
    buffer = io.StringIO()
    for key, rendered in _flatten("config", _config_section(config)):
        buffer.write(f"# {key}={rendered}\n")
    for key, rendered in _flatten("", {k: v for k, v in payload.items() if not isinstance(v, dict)}):
        buffer.write(f"# {key}={rendered}\n")
    buffer.write(f"# passed={json.dumps(all(c.passed for c in checks))}\n")
    if timestamp is not None:
        buffer.write(f"# timestamp={timestamp}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["name", "lhs", "rhs", "abs_gap", "rel_gap", "sigma", "passed"])
    for c in checks:
        writer.writerow(
            [
                c.name,
                repr(float(c.lhs)),
                repr(float(c.rhs)),
                repr(float(c.abs_gap)),
                repr(float(c.rel_gap)),
                "" if c.sigma is None else repr(float(c.sigma)),
                json.dumps(c.passed),
            ]
        )
    return buffer.getvalue()


def run(config: RunConfig) -> int:
    """Execute the configured command and write its report.

    Returns the process exit code; diagnostic text for failures goes to
    stderr, the report to the configured output path or stdout.
    """
    try:
        checks, payload = _ENGINES[config.command](config)
    except (ValueError, NotImplementedError, RuntimeError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    timestamp = datetime.now(timezone.utc).isoformat() if config.timestamp else None
    render = _render_json if config.format == "json" else _render_csv
    text = render(checks, payload, config, timestamp)
    if config.output_path:
        try:
            with open(config.output_path, "w", encoding="utf-8") as handle:
                handle.write(text)
        except OSError as exc:
            print(f"error: cannot write report: {exc}", file=sys.stderr)
            return 2
    else:
        sys.stdout.write(text)
    return 0 if all(c.passed for c in checks) else 1


def main(argv=None) -> int:
    try:
        config = parse_config(sys.argv[1:] if argv is None else list(argv))
    except SystemExit as exc:
        # argparse already printed its diagnostic
        return int(exc.code or 0)
    except (ValueError, NotImplementedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
