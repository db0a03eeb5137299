"""Experiment driver.

Subcommands: solve, flow, convergence, sweep, approx, validate-path.
Configuration lives in a flat INI file with one section per subcommand
(``key = value``); ``--set key=value`` overrides single keys.  No positional
arguments.  Every run writes one CSV per result table plus a metadata
sidecar; with a fixed seed and ``--threads=1`` repeated runs are
byte-identical (wall-clock timings go to a separate, volatile
``timings.json``).

Exit codes: 0 ok, 2 configuration error, 3 numerical failure (the message
names the failing module).
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .density import Density, gaussian_bump
from .errors import BeckflowError, ConfigError, NumericalError
from .flow import AnalyticVelocity, node_seeded_flow, pushforward_density, transport_error
from .flux import flux_from_potential
from .grid import Grid, ScalarField, divergence, gradient, integrate, vector_field
from .parametric import ParametricFamily, solve_family, stability_ratios
from .paths import FisherRaoPath, LinearPath, eval_path, path_derivative, validate_path
from .poisson import NeumannProblem, apply_laplacian, solve_neumann, solve_residual
from .splines import rate_study
from .transport import chebyshev_nodes, continuity_residual, linear_transport_field, path_transport_field

SCHEMA = "beckflow.v1"


# ---------------------------------------------------------------------------
# config schema and parsing
# ---------------------------------------------------------------------------


def _parse_int(s):
    return int(s)


def _parse_float(s):
    return float(s)


def _parse_str(s):
    return str(s).strip()


def _parse_int_list(s):
    items = [p.strip() for p in str(s).split(",") if p.strip()]
    return [int(p) for p in items]


def _parse_float_list(s):
    items = [p.strip() for p in str(s).split(",") if p.strip()]
    return [float(p) for p in items]


def _parse_point(s):
    vals = _parse_float_list(s)
    return vals[0] if len(vals) == 1 else tuple(vals)


_DENSITY_KEYS = {
    "kind": (_parse_str, "bump"),
    "center": (_parse_point, None),  # default filled per side
    "sigma": (_parse_float, 0.12),
    "floor": (_parse_float, 1e-6),
    "background": (_parse_float, 0.05),
}


def _density_schema(prefix, default_center):
    out = {}
    for key, (parse, default) in _DENSITY_KEYS.items():
        if key == "center":
            default = default_center
        out[f"{prefix}_{key}"] = (parse, default)
    return out


_COMMON = {
    "d": (_parse_int, 1),
    "n": (_parse_int, 128),
    "cg_tol": (_parse_float, 1e-10),
    "max_iter": (_parse_int, 0),  # 0 means the solver default
}

SCHEMAS = {
    "solve": {
        **_COMMON,
        **_density_schema("rho_nu", 0.35),
        **_density_schema("rho_mu", 0.65),
        "rhs": (_parse_str, "pair"),
    },
    "flow": {
        **_COMMON,
        **_density_schema("rho_nu", 0.35),
        **_density_schema("rho_mu", 0.65),
        "path": (_parse_str, "linear"),
        "steps": (_parse_int, 256),
        "t_nodes": (_parse_int, 65),
        "snapshots": (_parse_float_list, [0.25, 0.5, 0.75]),
    },
    "convergence": {
        **_COMMON,
        **_density_schema("rho_nu", 0.35),
        **_density_schema("rho_mu", 0.65),
        "study": (_parse_str, "poisson"),
        "n_list": (_parse_int_list, [32, 64, 128, 256]),
        "steps_list": (_parse_int_list, [16, 32, 64, 128]),
        "path": (_parse_str, "linear"),
        "steps": (_parse_int, 128),
        "t_nodes": (_parse_int, 33),
    },
    "sweep": {
        **_COMMON,
        **_density_schema("rho_nu", 0.5),
        "family": (_parse_str, "shift"),
        "n_list": (_parse_int_list, [32, 64]),
        "theta_count": (_parse_int, 9),
        "k": (_parse_int, 0),
        "alpha": (_parse_float, 0.5),
        "beta": (_parse_float, 0.5),
        "pair_budget": (_parse_int, 1 << 22),
        "sigma": (_parse_float, 0.1),
    },
    "approx": {
        **_COMMON,
        **_density_schema("rho_nu", 0.35),
        **_density_schema("rho_mu", 0.65),
        "target": (_parse_str, "sine"),
        "k_list": (_parse_int_list, [4, 8, 16, 32]),
        "ells": (_parse_int_list, [0, 1]),
        "degree": (_parse_int, 3),
        "t_nodes": (_parse_int, 33),
    },
    "validate-path": {
        **_COMMON,
        **_density_schema("rho_nu", 0.35),
        **_density_schema("rho_mu", 0.65),
        "path": (_parse_str, "linear"),
        "t_count": (_parse_int, 11),
    },
}

_CHOICES = {
    "d": {1, 2},
    "path": {"linear", "fisher-rao"},
    "study": {"poisson", "flux", "continuity", "flow-steps"},
    "family": {"shift", "scale"},
    "target": {"sine", "poly", "transport"},
    "rhs": {"pair", "one"},
}


def load_config(command: str, config_path: str | None, overrides: list[str]) -> dict:
    """Resolve the section for ``command`` plus overrides against the schema."""
    schema = SCHEMAS[command]
    raw: dict[str, str] = {}
    if config_path is not None:
        path = Path(config_path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {config_path}")
        cp = configparser.ConfigParser(interpolation=None)
        try:
            cp.read(path)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse config: {exc}") from exc
        if cp.has_section(command):
            raw.update(dict(cp.items(command)))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        raw[key.strip()] = value.strip()

    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"unknown keys for [{command}]: {', '.join(unknown)}")

    resolved = {}
    for key, (parse, default) in schema.items():
        if key in raw:
            try:
                resolved[key] = parse(raw[key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key}: {raw[key]!r}") from exc
        else:
            resolved[key] = default
    for key, allowed in _CHOICES.items():
        if key in resolved and resolved[key] not in allowed:
            raise ConfigError(f"{key} must be one of {sorted(map(str, allowed))}")
    if "n_list" in resolved and not resolved["n_list"]:
        raise ConfigError("n_list must not be empty")
    if "steps_list" in resolved and not resolved["steps_list"]:
        raise ConfigError("steps_list must not be empty")
    return resolved


# ---------------------------------------------------------------------------
# output writers
# ---------------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


class RunWriter:
    """Accumulates result tables and writes them with metadata sidecars."""

    def __init__(self, out_dir: str, command: str, config: dict, fmt: str, seed: int):
        self.out = Path(out_dir)
        self.command = command
        self.config = config
        self.fmt = fmt
        self.seed = seed
        self.tables: dict[str, tuple[list[str], list[list]]] = {}
        self.timings: dict[str, float] = {}

    def add_table(self, name: str, columns: list[str], rows: list[list]) -> None:
        self.tables[name] = (columns, rows)

    def finish(self) -> None:
        self.out.mkdir(parents=True, exist_ok=True)
        for name, (columns, rows) in self.tables.items():
            if self.fmt == "csv":
                lines = [f"# schema={SCHEMA} command={self.command} table={name}"]
                lines.append(",".join(columns))
                for row in rows:
                    lines.append(",".join(_fmt(v) for v in row))
                data = "\n".join(lines) + "\n"
                (self.out / f"{name}.csv").write_text(data, newline="\n")
            else:
                payload = {
                    "schema": SCHEMA,
                    "command": self.command,
                    "table": name,
                    "columns": columns,
                    "rows": [[_fmt(v) for v in row] for row in rows],
                }
                text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
                (self.out / f"{name}.json").write_text(text, newline="\n")
        meta = {
            "schema": SCHEMA,
            "command": self.command,
            "seed": self.seed,
            "config": {k: self._jsonable(v) for k, v in sorted(self.config.items())},
            "versions": {
                "python": ".".join(map(str, sys.version_info[:3])),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "beckflow": __version__,
            },
            "tables": sorted(self.tables),
        }
        (self.out / "metadata.json").write_text(
            json.dumps(meta, indent=2, sort_keys=True) + "\n", newline="\n"
        )
        # volatile by design: kept out of the deterministic sidecar
        (self.out / "timings.json").write_text(
            json.dumps({"seconds": self.timings}, indent=2, sort_keys=True) + "\n",
            newline="\n",
        )

    @staticmethod
    def _jsonable(v):
        if isinstance(v, tuple):
            return list(v)
        return v


# ---------------------------------------------------------------------------
# fixture builders
# ---------------------------------------------------------------------------


def _density_from_config(grid: Grid, cfg: dict, prefix: str) -> Density:
    kind = cfg[f"{prefix}_kind"]
    floor = cfg[f"{prefix}_floor"]
    if kind == "uniform":
        return gaussian_bump(grid, [0.5] * grid.dim, sigma=1e3, floor=floor)
    if kind != "bump":
        raise ConfigError(f"{prefix}_kind must be 'bump' or 'uniform'")
    center = cfg[f"{prefix}_center"]
    if np.ndim(center) == 0:
        center = [float(center)] * grid.dim
    elif len(center) != grid.dim:
        raise ConfigError(f"{prefix}_center needs {grid.dim} coordinates")
    return gaussian_bump(
        grid,
        center,
        sigma=cfg[f"{prefix}_sigma"],
        floor=floor,
        background=cfg[f"{prefix}_background"],
    )


def _build_path(grid: Grid, cfg: dict):
    rho_nu = _density_from_config(grid, cfg, "rho_nu")
    rho_mu = _density_from_config(grid, cfg, "rho_mu")
    if cfg["path"] == "linear":
        return LinearPath(rho_nu, rho_mu)
    return FisherRaoPath(rho_nu, rho_mu)


def _transport_field(path, cfg):
    t_nodes = chebyshev_nodes(cfg["t_nodes"])
    if isinstance(path, LinearPath):
        rhs = ScalarField(path.grid, path.rho_nu.values - path.rho_mu.values)
        pot = solve_neumann(NeumannProblem(rhs), cg_tol=cfg["cg_tol"])
        fl = flux_from_potential(pot, rhs)
        return linear_transport_field(fl, path, t_nodes), fl
    return path_transport_field(path, t_nodes, cg_tol=cfg["cg_tol"]), None


# ---------------------------------------------------------------------------
# subcommand runners
# ---------------------------------------------------------------------------


def run_solve(cfg: dict, writer: RunWriter, threads: int, seed: int) -> None:
    grid = Grid(cfg["d"], cfg["n"])
    t0 = time.perf_counter()
    if cfg["rhs"] == "one":
        # forced-failure probe: a constant rhs violates the mean-free condition
        f = ScalarField(grid, np.ones(grid.shape))
    else:
        rho_nu = _density_from_config(grid, cfg, "rho_nu")
        rho_mu = _density_from_config(grid, cfg, "rho_mu")
        f = ScalarField(grid, rho_nu.values - rho_mu.values)
    pot = solve_neumann(NeumannProblem(f), cg_tol=cfg["cg_tol"],
                        max_iter=cfg["max_iter"] or None)
    fl = flux_from_potential(pot, f)
    writer.timings["solve"] = time.perf_counter() - t0

    writer.add_table(
        "solve_summary",
        ["metric", "value"],
        [
            ["compat_integral", integrate(f)],
            ["cg_iterations", pot.iterations],
            ["cg_residual_inf", pot.residual_inf],
            ["solve_residual_inf", solve_residual(pot, f)],
            ["div_residual_inf", fl.div_residual_inf],
            ["boundary_flux_inf", fl.boundary_flux_inf],
            ["objective", fl.objective],
        ],
    )
    pts = grid.points()
    warr = fl.w.as_array().reshape(grid.dim, -1)
    if grid.dim == 1:
        cols = ["x", "f", "u", "w_x"]
        rows = [
            [pts[i, 0], f.values.ravel()[i], pot.u.values.ravel()[i], warr[0, i]]
            for i in range(grid.size)
        ]
    else:
        cols = ["x", "y", "f", "u", "w_x", "w_y"]
        rows = [
            [pts[i, 0], pts[i, 1], f.values.ravel()[i], pot.u.values.ravel()[i],
             warr[0, i], warr[1, i]]
            for i in range(grid.size)
        ]
    writer.add_table("solve_fields", cols, rows)


def run_flow(cfg: dict, writer: RunWriter, threads: int, seed: int) -> None:
    grid = Grid(cfg["d"], cfg["n"])
    t0 = time.perf_counter()
    path = _build_path(grid, cfg)
    snapshots = [t for t in cfg["snapshots"] if 0.0 < t < 1.0]
    report = validate_path(path, sorted(set(snapshots) | {0.0, 0.5, 1.0}))
    tf, _ = _transport_field(path, cfg)
    writer.timings["transport_field"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    fm = node_seeded_flow(tf, steps=cfg["steps"], record_ts=snapshots)
    writer.timings["flow"] = time.perf_counter() - t0

    rows = []
    for t in sorted(set(snapshots) | {1.0}):
        push = pushforward_density(fm, path.rho_nu, t=t)
        err = transport_error(push.field, eval_path(path, t))
        min_det = float(np.linalg.det(fm.jacobians(t)).min())
        rows.append([t, err.l1, err.linf, push.mass_defect, push.filled_nodes, min_det])
    writer.add_table(
        "flow_metrics",
        ["t", "l1", "linf", "mass_defect", "filled_nodes", "min_det"],
        rows,
    )

    snap_rows = []
    pts = grid.points()
    for t in sorted(set(snapshots) | {0.0, 1.0}):
        rho = eval_path(path, t).values.ravel()
        xi = tf.velocity(t).as_array().reshape(grid.dim, -1)
        for i in range(grid.size):
            row = [t] + [pts[i, a] for a in range(grid.dim)] + [rho[i]]
            row += [xi[a, i] for a in range(grid.dim)]
            snap_rows.append(row)
    cols = (
        ["t", "x", "rho", "xi_x"]
        if grid.dim == 1
        else ["t", "x", "y", "rho", "xi_x", "xi_y"]
    )
    writer.add_table("flow_snapshots", cols, snap_rows)

    writer.add_table(
        "flow_summary",
        ["metric", "value"],
        [
            ["projection_events", fm.projection_events],
            ["steps", cfg["steps"]],
            ["t_nodes", cfg["t_nodes"]],
            ["kappa_observed", report.kappa_path],
            ["kappa_bound", path.kappa_path],
        ],
    )


def _poisson_fixture(grid: Grid):
    if grid.dim == 1:
        x = grid.meshgrid()[0]
        f = np.cos(np.pi * x)
        u = -np.cos(np.pi * x) / np.pi**2
    else:
        x, y = grid.meshgrid()
        f = np.cos(np.pi * x) * np.cos(np.pi * y)
        u = -f / (2.0 * np.pi**2)
    return ScalarField(grid, f), u - u.mean()


def run_convergence(cfg: dict, writer: RunWriter, threads: int, seed: int) -> None:
    study = cfg["study"]
    t0 = time.perf_counter()

    def one_n(n):
        grid = Grid(cfg["d"], n)
        if study == "poisson":
            f, u_exact = _poisson_fixture(grid)
            pot = solve_neumann(NeumannProblem(f), cg_tol=cfg["cg_tol"])
            err = float(np.abs(pot.u.values - u_exact).max())
            mms = float(np.abs(apply_laplacian(u_exact, grid.h) - f.values).max())
            return [n, err, mms]
        if study == "flux":
            rho_nu = _density_from_config(grid, cfg, "rho_nu")
            rho_mu = _density_from_config(grid, cfg, "rho_mu")
            f = ScalarField(grid, rho_nu.values - rho_mu.values)
            pot = solve_neumann(NeumannProblem(f), cg_tol=cfg["cg_tol"])
            fl = flux_from_potential(pot, f)
            return [n, fl.div_residual_inf, fl.boundary_flux_inf]
        # continuity
        sub = dict(cfg)
        sub["n"] = n
        path = _build_path(grid, sub)
        tf, _ = _transport_field(path, sub)
        worst = max(continuity_residual(tf, t) for t in np.arange(0.1, 0.91, 0.1))
        return [n, worst]

    rows = []
    slopes = []
    if study in ("poisson", "flux", "continuity"):
        ns = cfg["n_list"]
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as ex:
                rows = list(ex.map(one_n, ns))
        else:
            rows = [one_n(n) for n in ns]
        cols = {
            "poisson": ["n", "solution_error", "mms_residual_inf"],
            "flux": ["n", "div_residual_inf", "boundary_flux_inf"],
            "continuity": ["n", "max_residual"],
        }[study]
        logn = np.log([r[0] for r in rows])
        for j, name in enumerate(cols[1:], start=1):
            errs = np.array([r[j] for r in rows])
            order = -float(np.polyfit(logn, np.log(errs), 1)[0])
            slopes.append([name, order])
    elif study == "flow-steps":
        # time-order study on an analytic zero-flux velocity: grid-sampled
        # fields are piecewise multilinear and would cap the order at two
        grid = Grid(cfg["d"], cfg["n"])

        def fn(t, pts):
            amp = 0.25 * (1.0 + 0.5 * np.sin(2.0 * np.pi * t))
            out = np.empty_like(pts)
            for a in range(pts.shape[1]):
                out[:, a] = amp * np.sin(np.pi * pts[:, a]) * (0.5 + 0.5 * a)
            return out

        field = AnalyticVelocity(grid=grid, fn=fn)
        starts = grid.points()
        from .flow import integrate_flow

        def endpoint(steps):
            return integrate_flow(field, starts, steps).positions(1.0)

        ref = endpoint(10 * max(cfg["steps_list"]))
        rows = []
        for steps in cfg["steps_list"]:
            err = float(np.abs(endpoint(steps) - ref).max())
            rows.append([steps, err])
        cols = ["steps", "endpoint_error"]
        logm = np.log([r[0] for r in rows])
        errs = np.array([r[1] for r in rows])
        order = -float(np.polyfit(logm, np.log(errs), 1)[0])
        slopes.append(["endpoint_error", order])
    writer.timings["convergence"] = time.perf_counter() - t0

    writer.add_table("convergence", cols, rows)
    writer.add_table("slopes", ["quantity", "order"], slopes)


def _family(grid: Grid, cfg: dict, seed: int) -> ParametricFamily:
    rho_nu = _density_from_config(grid, cfg, "rho_nu")
    thetas = tuple((t,) for t in np.linspace(0.0, 1.0, cfg["theta_count"]))
    sigma = cfg["sigma"]
    floor = cfg["rho_nu_floor"]
    bg = cfg["rho_nu_background"]
    if cfg["family"] == "shift":
        def rho_mu_of(theta):
            c = 0.3 + 0.4 * theta[0]
            return gaussian_bump(grid, [c] * grid.dim, sigma, floor=floor, background=bg)
    else:  # scale: f(theta) = theta * f1 via blending toward the source
        base = gaussian_bump(grid, [0.7] * grid.dim, sigma, floor=floor, background=bg)

        def rho_mu_of(theta):
            v = (1.0 - theta[0]) * rho_nu.values + theta[0] * base.values
            return Density(
                ScalarField(grid, v), kappa=float(v.min()), big_k=float(v.max())
            )

    return ParametricFamily(theta_nodes=thetas, rho_nu=rho_nu, rho_mu_of=rho_mu_of)


def run_sweep(cfg: dict, writer: RunWriter, threads: int, seed: int) -> None:
    t0 = time.perf_counter()

    def one_n(n):
        grid = Grid(cfg["d"], n)
        fam = _family(grid, cfg, seed)
        sols = solve_family(fam, cg_tol=cfg["cg_tol"])
        return n, stability_ratios(
            fam, sols, k=cfg["k"], alpha=cfg["alpha"], beta=cfg["beta"],
            pair_budget=cfg["pair_budget"],
        )

    ns = cfg["n_list"]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(one_n, ns))
    else:
        results = [one_n(n) for n in ns]
    writer.timings["sweep"] = time.perf_counter() - t0

    pair_rows = []
    summary_rows = []
    for n, rep in results:
        for p in rep.pairs:
            pair_rows.append([n, p.theta[0], p.vartheta[0], p.num, p.den, p.ratio])
        summary_rows.append(
            [n, rep.max_ratio if rep.max_ratio is not None else "", len(rep.pairs),
             rep.skipped]
        )
    writer.add_table(
        "stability_pairs",
        ["n", "theta", "vartheta", "num", "den", "ratio"],
        pair_rows,
    )
    writer.add_table(
        "sweep_summary", ["n", "max_ratio", "pairs", "skipped"], summary_rows
    )


def run_approx(cfg: dict, writer: RunWriter, threads: int, seed: int) -> None:
    t0 = time.perf_counter()
    target_name = cfg["target"]
    if target_name == "sine":
        dim_in = 1
        target = lambda p: np.sin(2.0 * np.pi * p[:, 0])
        jac = lambda p: (2.0 * np.pi * np.cos(2.0 * np.pi * p[:, 0]))[:, None, None]
    elif target_name == "poly":
        dim_in = 1
        target = lambda p: p[:, 0] ** 3 - 0.5 * p[:, 0]
        jac = lambda p: (3.0 * p[:, 0] ** 2 - 0.5)[:, None, None]
    else:  # transport: xi(t, x) of the 1D linear bump fixture
        sub = dict(cfg)
        sub["d"], sub["path"] = 1, "linear"
        grid = Grid(1, cfg["n"])
        path = _build_path(grid, sub)
        tf, _ = _transport_field(path, sub)
        dim_in = 2

        def target(p):
            out = np.empty(p.shape[0])
            order = np.argsort(p[:, 0], kind="stable")
            for i in order:
                out[i] = tf.velocity_at(float(p[i, 0]), p[i, 1:2])[0, 0]
            return out

        jac = None

    rows = []
    slopes = []
    for ell in cfg["ells"]:
        if ell == 1 and jac is None:
            continue
        study = rate_study(
            target, dim_in, cfg["k_list"], ell,
            degree=cfg["degree"], target_jacobian=jac,
        )
        for K, err in zip(study.Ks, study.errors):
            rows.append([target_name, ell, K, err])
        slopes.append([target_name, ell, study.slope])
    writer.timings["approx"] = time.perf_counter() - t0

    writer.add_table("approx_errors", ["target", "ell", "K", "error"], rows)
    writer.add_table("approx_slopes", ["target", "ell", "slope"], slopes)


def run_validate_path(cfg: dict, writer: RunWriter, threads: int, seed: int) -> None:
    grid = Grid(cfg["d"], cfg["n"])
    t0 = time.perf_counter()
    path = _build_path(grid, cfg)
    ts = np.linspace(0.0, 1.0, cfg["t_count"])
    report = validate_path(path, ts)
    writer.timings["validate"] = time.perf_counter() - t0

    writer.add_table(
        "path_report",
        ["t", "mass", "min_value", "mass_defect"],
        [[c.t, c.mass, c.min_value, c.mass_defect] for c in report.nodes],
    )
    writer.add_table(
        "path_summary",
        ["metric", "value"],
        [
            ["kappa_observed", report.kappa_path],
            ["kappa_bound", path.kappa_path],
            ["nodes", len(report.nodes)],
        ],
    )


RUNNERS = {
    "solve": run_solve,
    "flow": run_flow,
    "convergence": run_convergence,
    "sweep": run_sweep,
    "approx": run_approx,
    "validate-path": run_validate_path,
}


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beckflow",
        description="Beckmann flux / probability flow experiment driver",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in RUNNERS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", default=None, help="INI config file")
        p.add_argument("--out", default="runs/latest", help="output directory")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads; 1 is the deterministic reference mode")
        p.add_argument("--seed", type=int, default=0, help="seed for sampled estimators")
        p.add_argument("--format", choices=("csv", "json"), default="csv",
                       help="result table format")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="override a config key")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        cfg = load_config(args.command, args.config, args.overrides)
        writer = RunWriter(args.out, args.command, cfg, args.format, args.seed)
        RUNNERS[args.command](cfg, writer, args.threads, args.seed)
        writer.finish()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"error in module {exc.module}: {exc}", file=sys.stderr)
        return 3
    except BeckflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
