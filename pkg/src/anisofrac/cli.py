"""Configuration-driven command line: scenarios in, CSV/SVG artifacts out.

Config files are flat ``key = value`` text with sections (INI syntax), e.g.::

    [run]
    command = solve-elliptic
    seed = 0
    serial = true

    [domain]
    a = -1.0
    b = 1.0
    h = 0.03125
    collar = 2.0

    [kernel]
    s = 0.5
    n = 1

    [tensor]
    id = identity

    [forcing]
    id = constant
    value = 1.0

Commands: verify, solve-elliptic, solve-parabolic, solve-transport,
kernel-table, convergence.  Unknown sections or keys are rejected with the
offending name.  Exit codes: 0 ok, 2 config error, 3 numerical failure,
4 identity-check failure.
"""

import argparse
import configparser
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .assembly import AsymmetryError, assemble_load, build_system, export_matrix
from .fields import smooth_bump, truncated_gaussian
from .grid import build_grid
from .kernels import (
    KernelSpec,
    constant_tensor,
    equivalence_kernel,
    eval_gamma_fl,
    identity_tensor,
    sine_scalar_tensor,
)
from .quadrature import NonConvergenceError, QuadratureBudget
from .solvers import (
    FactorizationError,
    OrderRangeError,
    StabilityError,
    TimeSteppingConfig,
    export_trajectory,
    solve_elliptic,
    solve_parabolic,
    solve_transport,
)
from .svg import line_chart
from . import verify as verify_mod

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IDENTITY = 4

COMMANDS = (
    "verify",
    "solve-elliptic",
    "solve-parabolic",
    "solve-transport",
    "kernel-table",
    "convergence",
)

_ALLOWED_KEYS = {
    "run": {"command", "seed", "serial", "out"},
    "domain": {"a", "b", "h", "collar"},
    "kernel": {"s", "n", "r_inner", "r_outer"},
    "tensor": {"id", "base", "amplitude", "value"},
    "forcing": {"id", "value"},
    "initial": {"id", "center", "width", "radius"},
    "advection": {"speed"},
    "time": {"t_end", "dt", "theta", "stride"},
    "convergence": {"problem", "h_list"},
}


class ConfigError(ValueError):
    """Malformed or invalid run configuration."""


@dataclass
class RunConfig:
    command: str
    seed: int = 0
    serial: bool = True
    out: str = "out"
    domain: tuple = (-1.0, 1.0)
    h: float = 1 / 32
    collar: float = 2.0
    s: float = 0.5
    n: int = 1
    r_inner: float = 1e-3
    r_outer: float = 50.0
    tensor_id: str = "identity"
    tensor_params: dict = field(default_factory=dict)
    forcing_id: str = "none"
    forcing_value: float = 1.0
    initial_id: str = "bump"
    initial_params: dict = field(default_factory=dict)
    advection_speed: float = 0.0
    time: TimeSteppingConfig = None
    convergence_problem: str = "getoor"
    convergence_h: tuple = (1 / 16, 1 / 32, 1 / 64, 1 / 128)

    def kernel_spec(self):
        return KernelSpec(s=self.s, n=self.n, r_inner=self.r_inner, r_outer=self.r_outer)

    def tensor(self):
        if self.tensor_id == "identity":
            return identity_tensor(self.n)
        if self.tensor_id == "sine-scalar":
            base = self.tensor_params.get("base", 2.0)
            amp = self.tensor_params.get("amplitude", 1.0)
            return sine_scalar_tensor(base, amp, n=self.n)
        if self.tensor_id == "constant-scalar":
            value = self.tensor_params.get("value", 1.0)
            return constant_tensor(np.eye(self.n) * value)
        raise ConfigError(f"unknown tensor id {self.tensor_id!r}")

    def forcing(self):
        if self.forcing_id == "none":
            return None
        if self.forcing_id == "constant":
            v = self.forcing_value
            return lambda x: np.full_like(np.asarray(x, dtype=float), v)
        raise ConfigError(f"unknown forcing id {self.forcing_id!r}")

    def initial_field(self):
        p = self.initial_params
        if self.initial_id == "zero":
            return None
        if self.initial_id == "bump":
            return smooth_bump(p.get("radius", 1.0))
        if self.initial_id == "gaussian":
            return truncated_gaussian(
                p.get("center", -0.5), p.get("width", 0.1), p.get("radius", 0.45)
            )
        raise ConfigError(f"unknown initial state id {self.initial_id!r}")


def _get_typed(section, key, cast, default=None, where=""):
    if key not in section:
        if default is not None:
            return default
        raise ConfigError(f"missing required key {key!r} in section [{where}]")
    raw = section[key]
    try:
        if cast is bool:
            return raw.strip().lower() in ("1", "true", "yes", "on")
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"key {key!r} in [{where}]: cannot parse {raw!r}") from exc


def parse_config(text):
    """Parse and validate a flat key = value config document."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        lineno = getattr(exc, "lineno", None)
        loc = f" (line {lineno})" if lineno else ""
        raise ConfigError(f"config parse error{loc}: {exc.message}") from exc

    for sec in parser.sections():
        if sec not in _ALLOWED_KEYS:
            raise ConfigError(f"unknown section [{sec}]")
        for key in parser[sec]:
            if key not in _ALLOWED_KEYS[sec]:
                raise ConfigError(f"unknown key {key!r} in section [{sec}]")

    if "run" not in parser or "command" not in parser["run"]:
        raise ConfigError("missing required key 'command' in section [run]")
    command = parser["run"]["command"].strip()
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}; expected one of {COMMANDS}")

    cfg = RunConfig(command=command)
    run = parser["run"]
    cfg.seed = _get_typed(run, "seed", int, 0, "run")
    cfg.serial = _get_typed(run, "serial", bool, True, "run")
    cfg.out = run.get("out", "out")

    if "domain" in parser:
        dom = parser["domain"]
        a = _get_typed(dom, "a", float, -1.0, "domain")
        b = _get_typed(dom, "b", float, 1.0, "domain")
        cfg.domain = (a, b)
        cfg.h = _get_typed(dom, "h", float, cfg.h, "domain")
        cfg.collar = _get_typed(dom, "collar", float, cfg.collar, "domain")
        if not b > a:
            raise ConfigError(f"field 'a'/'b': degenerate domain ({a}, {b})")
        if cfg.h <= 0:
            raise ConfigError("field 'h': mesh size must be positive")
        if cfg.collar < cfg.h:
            raise ConfigError("field 'collar': collar width must be at least h")

    if "kernel" in parser:
        ker = parser["kernel"]
        cfg.s = _get_typed(ker, "s", float, cfg.s, "kernel")
        cfg.n = _get_typed(ker, "n", int, cfg.n, "kernel")
        cfg.r_inner = _get_typed(ker, "r_inner", float, cfg.r_inner, "kernel")
        cfg.r_outer = _get_typed(ker, "r_outer", float, cfg.r_outer, "kernel")
    if not (0.0 < cfg.s < 1.0):
        raise ConfigError(f"field 's': fractional order must lie in (0, 1), got {cfg.s}")
    if cfg.n not in (1, 2):
        raise ConfigError(f"field 'n': dimension must be 1 or 2, got {cfg.n}")
    if command == "solve-transport" and not 0.5 <= cfg.s < 1.0:
        raise ConfigError(
            f"field 's': the advection-diffusion problem restricts the fractional "
            f"order to s in [0.5, 1); got {cfg.s}"
        )

    if "tensor" in parser:
        ten = parser["tensor"]
        cfg.tensor_id = ten.get("id", "identity")
        for key in ("base", "amplitude", "value"):
            if key in ten:
                cfg.tensor_params[key] = _get_typed(ten, key, float, None, "tensor")

    return _parse_tail(parser, cfg, command)


def _parse_tail(parser, cfg, command):
    if "forcing" in parser:
        fo = parser["forcing"]
        cfg.forcing_id = fo.get("id", "none")
        cfg.forcing_value = _get_typed(fo, "value", float, 1.0, "forcing")
        if cfg.forcing_id not in ("none", "constant"):
            raise ConfigError(f"field 'id': unknown forcing {cfg.forcing_id!r}")

    if "initial" in parser:
        ini = parser["initial"]
        cfg.initial_id = ini.get("id", "bump")
        for key in ("center", "width", "radius"):
            if key in ini:
                cfg.initial_params[key] = _get_typed(ini, key, float, None, "initial")
        if cfg.initial_id not in ("zero", "bump", "gaussian"):
            raise ConfigError(f"field 'id': unknown initial state {cfg.initial_id!r}")

    if "advection" in parser:
        cfg.advection_speed = _get_typed(parser["advection"], "speed", float, 0.0, "advection")

    if "time" in parser:
        tm = parser["time"]
        try:
            cfg.time = TimeSteppingConfig(
                t_end=_get_typed(tm, "t_end", float, None, "time"),
                dt=_get_typed(tm, "dt", float, None, "time"),
                theta=_get_typed(tm, "theta", float, 1.0, "time"),
                stride=_get_typed(tm, "stride", int, 1, "time"),
            )
        except ValueError as exc:
            raise ConfigError(f"section [time]: {exc}") from exc
    elif command in ("solve-parabolic", "solve-transport"):
        raise ConfigError(f"command {command!r} requires a [time] section")

    if "convergence" in parser:
        co = parser["convergence"]
        cfg.convergence_problem = co.get("problem", "getoor")
        if "h_list" in co:
            try:
                cfg.convergence_h = tuple(float(tok) for tok in co["h_list"].split(","))
            except ValueError as exc:
                raise ConfigError(f"field 'h_list': {exc}") from exc
        if cfg.convergence_problem not in ("getoor", "zero"):
            raise ConfigError(f"field 'problem': unknown study {cfg.convergence_problem!r}")
    return cfg


def _write_solution_csv(path, xs, us, label="u"):
    with open(path, "w") as fh:
        fh.write(f"x,{label}\n")
        for x, u in zip(xs, us):
            fh.write(f"{x:.17g},{u:.17g}\n")


def _cmd_verify(cfg, outdir):
    reports = verify_mod.run_suite(seed=cfg.seed, fast=False, parallel=not cfg.serial)
    verify_mod.write_report(os.path.join(outdir, "identity_report.csv"), reports)
    print(verify_mod.summarize(reports))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_IDENTITY


def _cmd_elliptic(cfg, outdir):
    grid = build_grid(cfg.domain, cfg.h, cfg.collar)
    system = build_system(grid, cfg.kernel_spec(), cfg.tensor(), forcing=cfg.forcing(),
                          parallel=not cfg.serial)
    u = solve_elliptic(system)
    xs = grid.interior_nodes
    _write_solution_csv(os.path.join(outdir, "solution.csv"), xs, u.values)
    line_chart(
        os.path.join(outdir, "solution.svg"),
        xs,
        [u.values],
        labels=["u_h"],
        title="elliptic solution",
        xlabel="x",
        ylabel="u",
    )
    export_matrix(os.path.join(outdir, "stiffness.txt"), system.K_A, "K_A", grid, system.spec)
    print(f"elliptic solve: {grid.n_interior} dofs; artifacts in {outdir}")
    return EXIT_OK


def _evolution(cfg, outdir, transport):
    grid = build_grid(cfg.domain, cfg.h, cfg.collar)
    spec = cfg.kernel_spec()
    velocity = cfg.advection_speed if transport else None
    system = build_system(grid, spec, cfg.tensor(), forcing=None, velocity=velocity,
                          parallel=not cfg.serial)
    u0f = cfg.initial_field()
    u0 = np.zeros(grid.n_interior) if u0f is None else u0f(grid.interior_nodes)
    forcing = cfg.forcing()
    F = None if forcing is None else assemble_load(grid, forcing)
    solver = solve_transport if transport else solve_parabolic
    result = solver(system, u0, F, cfg.time)
    export_trajectory(outdir, grid, result)
    xs = grid.interior_nodes
    for i, (t, state) in enumerate(zip(result.times, result.states)):
        line_chart(
            os.path.join(outdir, f"state_{i:05d}.svg"),
            xs,
            [state],
            labels=[f"t={t:.4g}"],
            title="solution snapshot",
            xlabel="x",
            ylabel="u",
        )
    led = result.ledger
    line_chart(
        os.path.join(outdir, "ledger.svg"),
        led.t,
        [np.array(led.l2) + np.array(led.energy), led.rhs],
        labels=["lhs: L2 + energy", "rhs bound"],
        title="energy ledger",
        xlabel="t",
        ylabel="energy",
    )
    ok = led.slack() <= 0.05
    print(
        f"{'transport' if transport else 'parabolic'} run: {len(result.times)} records; "
        f"ledger slack {led.slack():.3e}; artifacts in {outdir}"
    )
    return EXIT_OK if ok else EXIT_IDENTITY


def _cmd_kernel_table(cfg, outdir):
    spec = cfg.kernel_spec()
    tensor = identity_tensor(spec.n)
    seps = np.linspace(0.25, 4.0, 16)
    path = os.path.join(outdir, "kernel_table.csv")
    budget = QuadratureBudget(panels=12, levels=2, tolerance=1e-4)
    rows = []
    for d in seps:
        x = 0.0 if spec.n == 1 else np.zeros(2)
        z = d if spec.n == 1 else np.array([d, 0.0])
        ge = equivalence_kernel(spec, tensor, x, z, budget)
        gf = eval_gamma_fl(spec, x, z)
        rows.append((d, ge, gf, ge / gf))
    with open(path, "w") as fh:
        fh.write("separation,gamma_eq,gamma_fl,ratio\n")
        for row in rows:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
    line_chart(
        os.path.join(outdir, "kernel_table.svg"),
        [r[0] for r in rows],
        [[r[3] for r in rows]],
        labels=["gamma_eq / gamma_fl"],
        title="equivalence kernel vs fractional kernel",
        xlabel="separation",
        ylabel="ratio",
    )
    print(f"kernel table with {len(rows)} separations in {outdir}")
    return EXIT_OK


def _cmd_convergence(cfg, outdir):
    rows = verify_mod.run_convergence_study(
        cfg.convergence_problem, cfg.convergence_h, s=cfg.s, domain=cfg.domain, collar=cfg.collar
    )
    path = os.path.join(outdir, "convergence.csv")
    with open(path, "w") as fh:
        fh.write("h,n_dofs,l2_error,observed_order\n")
        for row in rows:
            fh.write(
                f"{row['h']:.17g},{row['n_dofs']},{row['l2_error']:.17g},{row['order']:.17g}\n"
            )
    line_chart(
        os.path.join(outdir, "convergence.svg"),
        [row["h"] for row in rows],
        [[row["l2_error"] for row in rows]],
        labels=["L2 error"],
        title=f"convergence: {cfg.convergence_problem}",
        xlabel="h",
        ylabel="error",
    )
    print(f"convergence study ({cfg.convergence_problem}) in {outdir}")
    return EXIT_OK


def run(cfg, outdir=None):
    """Execute a validated RunConfig; returns the process exit code."""
    outdir = outdir or cfg.out
    os.makedirs(outdir, exist_ok=True)
    np.random.seed(cfg.seed % 2**32)  # for any library-internal draws
    try:
        if cfg.command == "verify":
            return _cmd_verify(cfg, outdir)
        if cfg.command == "solve-elliptic":
            return _cmd_elliptic(cfg, outdir)
        if cfg.command == "solve-parabolic":
            return _evolution(cfg, outdir, transport=False)
        if cfg.command == "solve-transport":
            return _evolution(cfg, outdir, transport=True)
        if cfg.command == "kernel-table":
            return _cmd_kernel_table(cfg, outdir)
        if cfg.command == "convergence":
            return _cmd_convergence(cfg, outdir)
        raise ConfigError(f"unknown command {cfg.command!r}")
    except (NonConvergenceError, FactorizationError, StabilityError, AsymmetryError,
            OrderRangeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="anisofrac",
        description="Anisotropic nonlocal/fractional diffusion scenarios and identity checks.",
        epilog="exit codes: 0 ok, 2 config error, 3 numerical failure, 4 identity-check failure",
    )
    ap.add_argument("--config", required=True, help="path to a key = value config file")
    ap.add_argument("--out", default=None, help="output directory (overrides config)")
    ap.add_argument("--serial", action="store_true", help="force deterministic serial mode")
    ap.add_argument("--seed", type=int, default=None, help="seed for randomized checks")
    args = ap.parse_args(argv)

    try:
        with open(args.config) as fh:
            cfg = parse_config(fh.read())
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.seed is not None:
        cfg.seed = args.seed
    if args.serial:
        cfg.serial = True
    return run(cfg, outdir=args.out)


if __name__ == "__main__":
    sys.exit(main())
