"""Command-line front end.

Every command writes a table as CSV (default) or JSON to stdout or to
``--output``. CSV output starts with comment lines naming the tool version,
the quantity, its scale and an anchor id, followed by a fixed column header.
Floats are written with ``repr`` so identical runs give identical bytes.

Exit codes: 0 success, 2 domain error, 3 tolerance failure in ``verify``.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .lattice import DomainError, LatticeSequence, lp_norm

OUTPUT_DIR_ENV = "LATTICEHARM_OUTPUT_DIR"
EXIT_OK, EXIT_DOMAIN, EXIT_VERIFY = 0, 2, 3

COMMANDS = ("heat-kernel", "evolve", "decay-fit", "mass-theorem", "poisson", "frac-kernel",
            "frac-apply", "riesz", "hilbert", "gk", "multiplier", "verify")
PATHS = ("kernel", "spectral", "both")
FORMATS = ("csv", "json")


@dataclass
class ExperimentConfig:
    command: str
    dim: int = 1
    radius: int | None = None      # None: command default / auto
    t: float = 1.0
    sigma: float | None = None
    s: float | None = None
    k: int = 1
    axis: int = 1
    gamma: float = 1.0
    tmin: float | None = None
    tmax: float | None = None
    ratio: float = 2.0
    norm: float = 2.0              # r for decay-fit
    p: float = math.inf
    q: float = 1.0
    kind: str = "heat"             # gk: heat | poisson
    path: str = "kernel"
    format: str = "csv"
    seed: int = 0
    input: str | None = None
    output: str | None = None
    suite: str = "all"
    threads: int = 1
    tolerances: dict = field(default_factory=dict)

    def validate(self):
        """Check parameter domains before dispatch; raises DomainError."""
        if self.command not in COMMANDS:
            raise DomainError(f"unknown command {self.command!r}")
        if self.dim < 1:
            raise DomainError("requires N >= 1")
        if self.radius is not None and self.radius < 0:
            raise DomainError("requires radius >= 0")
        if self.path not in PATHS:
            raise DomainError(f"path must be one of {PATHS}")
        if self.format not in FORMATS:
            raise DomainError(f"format must be one of {FORMATS}")
        if self.threads < 1:
            raise DomainError("requires threads >= 1")
        if not self.t > 0:
            raise DomainError("requires t > 0")
        if self.sigma is not None and not 0 < 2 * self.sigma < self.dim:
            raise DomainError(f"requires 0 < 2 sigma < N (got sigma={self.sigma}, N={self.dim})")
        if self.s is not None and not 0 < self.s < 1:
            raise DomainError(f"requires 0 < s < 1 (got s={self.s})")
        for name in ("norm", "p", "q"):
            if not getattr(self, name) >= 1:
                raise DomainError(f"requires {name} in [1, inf]")
        if self.k < 1:
            raise DomainError("requires k >= 1")
        if self.command == "riesz":
            if self.dim < 2:
                raise DomainError("Riesz transforms require N >= 2; use hilbert for N = 1")
            if not 1 <= self.axis <= self.dim:
                raise DomainError(f"axis must be in 1..{self.dim}")
        if self.command == "hilbert" and self.dim != 1:
            raise DomainError("the discrete Hilbert transform is defined for N = 1")
        if self.command in ("frac-kernel", "frac-apply") and (self.sigma is None) == (self.s is None):
            raise DomainError("give exactly one of --sigma (negative power) or --s (positive power)")
        if self.kind not in ("heat", "poisson"):
            raise DomainError("kind must be 'heat' or 'poisson'")
        return self


@dataclass
class Table:
    quantity: str
    scale: str
    anchor: str
    columns: list
    rows: list
    summary: dict = field(default_factory=dict)
    exit_code: int = EXIT_OK


# ------------------------------------------------------------------ helpers

def _tol(cfg: ExperimentConfig, name: str, default: float) -> float:
    return float(cfg.tolerances.get(name, default))


def _coords(dim: int, radius: int):
    c = np.arange(-radius, radius + 1)
    grids = np.meshgrid(*([c] * dim), indexing="ij")
    return [g.ravel().tolist() for g in grids]


def _coord_cols(dim: int) -> list:
    return [f"n{i + 1}" for i in range(dim)]


def _sequence_rows(seqs: list) -> list:
    """Rows (n1..nN, values...) for sequences sharing a window."""
    f0 = seqs[0]
    cols = _coords(f0.dim, f0.radius)
    vals = [s.values.ravel() for s in seqs]
    return [[c[j] for c in cols] + [v[j] for v in vals] for j in range(f0.values.size)]


def _input_sequence(cfg: ExperimentConfig, default_radius: int = 8, mean_zero: bool = False,
                    support: int | None = None) -> LatticeSequence:
    """The --input sequence, or a seeded random one on the default window."""
    if cfg.input:
        text = sys.stdin.read() if cfg.input == "-" else Path(cfg.input).read_text()
        f = LatticeSequence.from_json(text)
        if f.dim != cfg.dim:
            raise DomainError(f"input has N={f.dim} but --dim is {cfg.dim}")
        return f
    R = default_radius if cfg.radius is None else cfg.radius
    rng = np.random.default_rng(cfg.seed)
    sup = R if support is None else min(support, R)
    return LatticeSequence.random(cfg.dim, R, rng, support=sup, mean_zero=mean_zero)


def _time_grid(cfg: ExperimentConfig, tmin: float, tmax: float) -> np.ndarray:
    from .heat import geometric_grid
    return geometric_grid(cfg.tmin or tmin, cfg.tmax or tmax, cfg.ratio)


def _dual(name: str, cfg: ExperimentConfig, kernel_fn, spectral_fn) -> Table:
    """Run the kernel and/or spectral route; with path=both report the discrepancy."""
    if cfg.path == "kernel":
        outs, cols = [kernel_fn()], ["value"]
    elif cfg.path == "spectral":
        outs, cols = [spectral_fn()], ["value"]
    else:
        outs, cols = [kernel_fn(), spectral_fn()], ["kernel", "spectral"]
    summary = {}
    if len(outs) == 2:
        a, b = outs
        disc = lp_norm(a - b, math.inf)
        summary = {"max_discrepancy": disc, "relative_discrepancy": disc / max(lp_norm(a, math.inf), 1e-300),
                   "tolerance": _tol(cfg, "discrepancy", 1e-6)}
    return Table(name, "linear", f"{cfg.command}-values", _coord_cols(cfg.dim) + cols,
                 _sequence_rows(outs), summary)


# ------------------------------------------------------------------ commands

def cmd_heat_kernel(cfg):
    from .heat import heat_kernel
    G = heat_kernel(cfg.t, cfg.dim, "auto" if cfg.radius is None else cfg.radius,
                    _tol(cfg, "tail", 1e-10))
    return Table("heat kernel G_t(n)", "linear", "heat-kernel-values", _coord_cols(cfg.dim) + ["value"],
                 _sequence_rows([G.values]),
                 {"t": G.t, "radius": G.radius, "tail_mass_bound": G.tail_mass_bound,
                  "sum": G.values.total()})


def cmd_evolve(cfg):
    from .heat import evolve, heat_kernel
    from .spectral import apply_multiplier, default_grid, symbol
    f = _input_sequence(cfg)
    R = f.radius if cfg.radius is None else cfg.radius

    def spectral():
        Rp = max(R, f.radius) + heat_kernel(cfg.t, 1).radius
        g = default_grid(f.dim, Rp)
        return apply_multiplier(f.pad(Rp), symbol("heat", g, t=cfg.t)).crop(R)

    return _dual("heat semigroup W_t f", cfg, lambda: evolve(f, cfg.t, radius=R), spectral)


def cmd_decay_fit(cfg):
    from .heat import decay_slope_fit, predicted_decay_slope
    t = _time_grid(cfg, 16.0, 4096.0)
    slope, norms = decay_slope_fit(cfg.dim, cfg.norm, t)
    return Table(f"||G_t||_r, r={cfg.norm!r}", "log-log", "heat-kernel-norm-decay", ["t", "norm"],
                 [[a, b] for a, b in zip(t.tolist(), norms.tolist())],
                 {"slope": slope, "predicted_slope": predicted_decay_slope(cfg.dim, cfg.norm)})


def cmd_mass_theorem(cfg):
    from .heat import mass_slope_fit, predicted_mass_slope
    f = _input_sequence(cfg, default_radius=3)
    t = _time_grid(cfg, 64.0, 8192.0)
    slope, res = mass_slope_fit(f, cfg.p, cfg.q, t)
    return Table(f"||W_t f - (sum f) G_t||_p, p={cfg.p!r}", "log-log", "mass-residual-decay",
                 ["t", "residual"], [[a, b] for a, b in zip(t.tolist(), res.tolist())],
                 {"mass": f.total(), "slope": slope,
                  "predicted_slope": predicted_mass_slope(cfg.dim, cfg.p, cfg.q)})


def cmd_poisson(cfg):
    from .subordination import poisson_kernel
    Q = poisson_kernel(cfg.t, cfg.dim, 16 if cfg.radius is None else cfg.radius)
    return Table("Poisson kernel Q_t(n)", "linear", "poisson-kernel-values",
                 _coord_cols(cfg.dim) + ["value"], _sequence_rows([Q.values]),
                 {"t": Q.t, "radius": Q.radius, "tail_mass": Q.tail_mass,
                  "sum_plus_tail": Q.values.total() + Q.tail_mass})


def cmd_frac_kernel(cfg):
    from .fractional import frac_integral_kernel, frac_power_kernel
    R = 16 if cfg.radius is None else cfg.radius
    if cfg.sigma is not None:
        K = frac_integral_kernel(cfg.sigma, cfg.dim, R)
        name, anchor = f"K_sigma(n), sigma={cfg.sigma!r}", "frac-integral-kernel"
    else:
        K = frac_power_kernel(cfg.s, cfg.dim, R)
        name, anchor = f"Ks_s(n), s={cfg.s!r}", "frac-power-kernel"
    return Table(name, "linear", anchor, _coord_cols(cfg.dim) + ["value"], _sequence_rows([K.values]),
                 {"radius": R, "diagonal": K.diagonal})


def cmd_frac_apply(cfg):
    from .fractional import apply_frac_integral, apply_frac_power
    neg = cfg.sigma is not None
    f = _input_sequence(cfg, mean_zero=neg and cfg.path != "kernel")
    if neg:
        op = lambda path: apply_frac_integral(f, cfg.sigma, path, cfg.radius)
    else:
        op = lambda path: apply_frac_power(f, cfg.s, path, cfg.radius)
    return _dual("fractional power applied to f", cfg, lambda: op("kernel"), lambda: op("spectral"))


def cmd_riesz(cfg):
    from .riesz import apply_riesz, riesz_kernel
    if not cfg.input:
        K = riesz_kernel(cfg.axis, cfg.dim, 16 if cfg.radius is None else cfg.radius)
        return Table(f"Riesz kernel R_{cfg.axis}(n)", "linear", "riesz-kernel-values",
                     _coord_cols(cfg.dim) + ["value"], _sequence_rows([K.values]),
                     {"axis": cfg.axis, "radius": K.radius})
    f = _input_sequence(cfg)
    return _dual(f"Riesz transform R_{cfg.axis} f", cfg,
                 lambda: apply_riesz(f, cfg.axis, "kernel", cfg.radius),
                 lambda: apply_riesz(f, cfg.axis, "spectral", cfg.radius))


def cmd_hilbert(cfg):
    from .riesz import hilbert_apply
    f = _input_sequence(cfg)
    H = hilbert_apply(f, cfg.radius)
    return Table("discrete Hilbert transform H f", "linear", "hilbert-values",
                 ["n1", "value"], _sequence_rows([H]), {"l2_ratio": lp_norm(H) / lp_norm(f)})


def cmd_gk(cfg):
    from .squarefn import gk, gk_poisson, l2_identity_constant
    f = _input_sequence(cfg, support=4)
    if cfg.kind == "heat":
        g = gk(f, cfg.k, radius=cfg.radius, path="spectral" if cfg.path == "spectral" else "kernel")
    else:
        g = gk_poisson(f, cfg.k, radius=cfg.radius)
    return Table(f"{cfg.kind} square function, k={cfg.k}", "linear", f"{cfg.kind}-square-function",
                 _coord_cols(cfg.dim) + ["value"], _sequence_rows([g]),
                 {"l2_ratio_on_window": lp_norm(g) ** 2 / lp_norm(f) ** 2,
                  "l2_identity_constant": l2_identity_constant(cfg.k)})


def cmd_multiplier(cfg):
    from .squarefn import imaginary_power_apply
    f = _input_sequence(cfg, mean_zero=True)
    T = imaginary_power_apply(f, cfg.gamma, cfg.radius)
    v = T.values
    Tc = LatticeSequence(v.real, f.dim)
    Ti = LatticeSequence(v.imag, f.dim)
    return Table(f"imaginary power (-Delta)^(i gamma) f, gamma={cfg.gamma!r}", "linear",
                 "imaginary-power-values", _coord_cols(cfg.dim) + ["real", "imag"],
                 _sequence_rows([Tc, Ti]), {"l2_ratio": lp_norm(T) / lp_norm(f)})


def cmd_verify(cfg):
    from .verify import FIXTURE_VERSION, run_suite
    size = cfg.tolerances.get("size")
    rep = run_suite(cfg.suite, seed=cfg.seed, size=None if size is None else int(size))
    rows = [[i.key, "pass" if i.passed else "FAIL", i.points, i.C, i.worst_ratio, i.worst_margin,
             json.dumps(i.location, sort_keys=True, default=_jsonable)] for i in rep.items]
    return Table("inequality ratio against constant", "ratio", "inequality-suite",
                 ["inequality", "result", "points", "C", "worst_ratio", "margin", "location"], rows,
                 {"suite": cfg.suite, "seed": cfg.seed, "passed": rep.passed,
                  "fixture_version": FIXTURE_VERSION},
                 EXIT_OK if rep.passed else EXIT_VERIFY)


HANDLERS = {
    "heat-kernel": cmd_heat_kernel, "evolve": cmd_evolve, "decay-fit": cmd_decay_fit,
    "mass-theorem": cmd_mass_theorem, "poisson": cmd_poisson, "frac-kernel": cmd_frac_kernel,
    "frac-apply": cmd_frac_apply, "riesz": cmd_riesz, "hilbert": cmd_hilbert, "gk": cmd_gk,
    "multiplier": cmd_multiplier, "verify": cmd_verify,
}

COLUMNS_HELP = {
    "heat-kernel": "n1..nN, value",
    "evolve": "n1..nN, value (or kernel, spectral with --path both)",
    "decay-fit": "t, norm",
    "mass-theorem": "t, residual",
    "poisson": "n1..nN, value",
    "frac-kernel": "n1..nN, value",
    "frac-apply": "n1..nN, value (or kernel, spectral)",
    "riesz": "n1..nN, value (kernel without --input; transform with --input)",
    "hilbert": "n1, value",
    "gk": "n1..nN, value",
    "multiplier": "n1..nN, real, imag",
    "verify": "inequality, result, points, C, worst_ratio, margin, location",
}


# ------------------------------------------------------------------ output

def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


def _cell(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    s = str(x)
    if any(c in s for c in ',"\n'):
        s = '"' + s.replace('"', '""') + '"'
    return s


def _meta(cfg: ExperimentConfig, table: Table) -> dict:
    from .verify import FIXTURE_VERSION
    conf = {k: v for k, v in asdict(cfg).items() if k not in ("output", "threads")}
    return {"tool": "latticeharm", "tool_version": __version__, "fixture_version": FIXTURE_VERSION,
            "command": cfg.command, "quantity": table.quantity, "scale": table.scale,
            "anchor": table.anchor, "config": conf}


def render(cfg: ExperimentConfig, table: Table) -> str:
    meta = _meta(cfg, table)
    if cfg.format == "json":
        doc = {"meta": meta, "columns": table.columns, "rows": table.rows, "summary": table.summary}
        return json.dumps(_jsonable(doc), sort_keys=True, indent=1) + "\n"
    lines = [f"# latticeharm {__version__} command={cfg.command}",
             f"# quantity={table.quantity}; scale={table.scale}; anchor={table.anchor}"]
    for k in sorted(table.summary):
        lines.append(f"# {k}={_cell(table.summary[k])}")
    lines.append(",".join(table.columns))
    lines.extend(",".join(_cell(x) for x in row) for row in table.rows)
    return "\n".join(lines) + "\n"


def _output_path(name: str) -> Path:
    p = Path(name)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


# ------------------------------------------------------------------ parsing

def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    a = common.add_argument
    a("--config", help="JSON file of ExperimentConfig fields; explicit flags override it")
    a("--dim", type=int, help="lattice dimension N")
    a("--radius", type=int, help="window radius (default: command specific or auto)")
    a("--t", type=float, help="time t > 0")
    a("--sigma", type=float, help="negative power order, 0 < 2 sigma < N")
    a("--s", type=float, help="positive power order, 0 < s < 1")
    a("--k", type=int, help="square function order")
    a("--axis", type=int, help="Riesz axis i")
    a("--gamma", type=float, help="imaginary power exponent")
    a("--tmin", type=float)
    a("--tmax", type=float)
    a("--ratio", type=float, help="geometric t-grid ratio")
    a("--norm", type=float, help="kernel norm exponent r (inf allowed)")
    a("--p", type=float)
    a("--q", type=float)
    a("--kind", choices=("heat", "poisson"))
    a("--path", choices=PATHS)
    a("--format", choices=FORMATS)
    a("--seed", type=int)
    a("--input", help="JSON sequence {dim, radius, values}; '-' reads stdin")
    a("--output", help=f"output file (relative paths resolve under ${OUTPUT_DIR_ENV} if set)")
    a("--suite", help="verify: all, a suite name or an inequality id")
    a("--threads", type=int, help="accepted for compatibility; evaluation is serial")
    a("--tol", action="append", metavar="NAME=VALUE", help="tolerance override, repeatable")
    ap = argparse.ArgumentParser(prog="latticeharm", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for c in COMMANDS:
        sub.add_parser(c, parents=[common], help=f"columns: {COLUMNS_HELP[c]}",
                       description=f"CSV columns: {COLUMNS_HELP[c]}")
    return ap


def build_config(argv=None) -> ExperimentConfig:
    ns = _parser().parse_args(argv)
    data = {}
    if ns.config:
        data = json.loads(Path(ns.config).read_text())
    names = {f.name for f in fields(ExperimentConfig)}
    unknown = set(data) - names
    if unknown:
        raise DomainError(f"unknown config keys {sorted(unknown)}")
    data["command"] = ns.command
    for k, v in vars(ns).items():
        if k in names and k != "command" and v is not None:
            data[k] = v
    tols = dict(data.get("tolerances", {}))
    for item in ns.tol or []:
        name, _, val = item.partition("=")
        tols[name] = float(val)
    data["tolerances"] = tols
    for k in ("t", "sigma", "s", "gamma", "tmin", "tmax", "ratio", "norm", "p", "q"):
        if data.get(k) is not None:
            data[k] = float(data[k])
    return ExperimentConfig(**data).validate()


def run(cfg: ExperimentConfig) -> tuple:
    """(rendered text, exit code) for a validated config."""
    table = HANDLERS[cfg.command](cfg)
    return render(cfg, table), table.exit_code


def main(argv=None) -> int:
    try:
        cfg = build_config(argv)
        text, code = run(cfg)
    except DomainError as e:
        print(f"domain error: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    if cfg.output:
        _output_path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
