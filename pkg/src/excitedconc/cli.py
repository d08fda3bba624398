"""Command-line entry point: ``sweep``, ``scaling`` and ``levels``.

Settings are layered as defaults < JSON config file (``--config``) < flags.
Exit codes: 0 success, 2 configuration error, 3 solver error, 4 fit error.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import analysis
from .analysis import Flag, PointResult, SweepResult
from .eigensolver import DEFAULT_SEED
from .errors import ConfigurationError, ContractViolation, FitError, SolverError
from .lattice import ModelKind, ModelSpec

__all__ = [
    "main",
    "RunConfig",
    "format_number",
    "sweep_to_csv",
    "sweep_from_csv",
    "scaling_report",
    "EXIT_OK",
    "EXIT_CONFIG",
    "EXIT_SOLVER",
    "EXIT_FIT",
]

log = logging.getLogger("excitedconc")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_FIT = 0, 2, 3, 4
SIG_DIGITS = 12


def format_number(x) -> str:
    """Locale-independent text with 12 significant digits."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.{SIG_DIGITS}g}"


# ----------------------------------------------------------------------------- config


@dataclass
class RunConfig:
    command: str = "sweep"
    model: str = "chain1d"
    n: int = 16
    alpha: tuple | None = None
    k: int = 3
    seed: int = DEFAULT_SEED
    jump_threshold: float = analysis.JUMP_THRESHOLD
    resolution: float = analysis.RESOLUTION
    out: str | None = None
    sizes: tuple = ()
    alpha_c: float | None = None
    ground: bool = False

    def validate(self) -> "RunConfig":
        kind = ModelKind.parse(self.model)
        self.model = kind.value
        if self.alpha is None:
            self.alpha = analysis.DEFAULT_GRIDS[kind]
        self.alpha = parse_range(self.alpha)
        start, stop, step = self.alpha
        if not step > 0:
            raise ConfigurationError(f"alpha step must be positive, got {step}")
        if not start < stop:
            raise ConfigurationError(f"alpha range {start}:{stop} is empty (start must be < stop)")
        if start < 0:
            raise ConfigurationError("alpha must be non-negative")
        for size in (self.n, *self.sizes):
            ModelSpec(kind, size)
        if self.k < 1:
            raise ConfigurationError(f"k must be positive, got {self.k}")
        if not self.jump_threshold > 0:
            raise ConfigurationError("jump threshold must be positive")
        if not self.resolution > 0:
            raise ConfigurationError("resolution must be positive")
        return self

    @property
    def spec(self) -> ModelSpec:
        return ModelSpec(self.model, self.n)

    @property
    def grid(self) -> np.ndarray:
        return analysis.alpha_grid(*self.alpha)


def parse_range(value) -> tuple[float, float, float]:
    """``"start:stop:step"`` or a three-element sequence."""
    if isinstance(value, str):
        parts = value.split(":")
    else:
        parts = list(value)
    if len(parts) != 3:
        raise ConfigurationError(f"alpha range must be start:stop:step, got {value!r}")
    try:
        return tuple(float(p) for p in parts)
    except (TypeError, ValueError):
        raise ConfigurationError(f"alpha range must be numeric, got {value!r}") from None


def _parse_sizes(value) -> tuple[int, ...]:
    if isinstance(value, str):
        value = [v for v in value.replace(",", " ").split() if v]
    try:
        return tuple(int(v) for v in value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"sizes must be integers, got {value!r}") from None


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigurationError("config file must hold a JSON object")
    known = {f.name for f in fields(RunConfig)}
    norm = {key.replace("-", "_"): val for key, val in data.items()}
    unknown = sorted(set(norm) - known)
    if unknown:
        raise ConfigurationError(f"unknown config keys: {', '.join(unknown)}")
    return norm


def build_config(args: argparse.Namespace) -> RunConfig:
    settings = load_config(args.config)
    for f in fields(RunConfig):
        val = getattr(args, f.name, None)
        if val is not None:
            settings[f.name] = val
    settings["command"] = args.command
    if "sizes" in settings:
        settings["sizes"] = _parse_sizes(settings["sizes"])
    try:
        cfg = RunConfig(**settings)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from None
    return cfg.validate()


# ----------------------------------------------------------------------------- CSV


def _meta_line(result: SweepResult) -> str:
    m = result.model
    return (
        f"# model={m.kind.value} n={m.n_sites} j1={format_number(m.j1)} "
        f"k={result.k} seed={result.seed} pair={result.pair[0]}-{result.pair[1]}\n"
    )


def sweep_to_csv(result: SweepResult, k: int | None = None) -> str:
    """Serialize a sweep: one metadata comment, the header, one row per alpha."""
    k = result.k if k is None else k
    buf = io.StringIO(newline="")
    buf.write(_meta_line(result))
    header = ["alpha", *(f"E{i}" for i in range(k)), "d1", "S0", "S1", "C0", "C1", "flag"]
    buf.write(",".join(header) + "\n")
    for r in result.records:
        ev = list(r.eigenvalues[:k]) + [math.nan] * max(0, k - len(r.eigenvalues))
        spins = list(r.spins[:2]) + [""] * max(0, 2 - len(r.spins))
        row = [format_number(r.alpha), *map(format_number, ev), str(r.d1), *spins,
               format_number(r.C0), format_number(r.C1), r.flag]
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def sweep_from_csv(text: str) -> SweepResult:
    """Parse :func:`sweep_to_csv` output back into a SweepResult."""
    meta = {}
    lines = text.splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            for item in line[1:].split():
                key, _, val = item.partition("=")
                meta[key] = val
        elif line.strip():
            body.append(line)
    if not body:
        raise ConfigurationError("sweep CSV has no header")
    for key in ("model", "n", "k", "seed"):
        if key not in meta:
            raise ConfigurationError(f"sweep CSV lacks the '{key}' metadata comment")
    header = body[0].split(",")
    if header[0] != "alpha" or header[-6:] != ["d1", "S0", "S1", "C0", "C1", "flag"]:
        raise ConfigurationError("unexpected sweep CSV header")
    n_e = len(header) - 7
    records = []
    for line in body[1:]:
        cells = line.split(",")
        if len(cells) != len(header):
            raise ConfigurationError(f"malformed sweep CSV row: {line!r}")
        ev = np.array([float(c) for c in cells[1 : 1 + n_e]])
        rest = cells[1 + n_e :]
        d1 = int(rest[0])
        records.append(
            PointResult(
                alpha=float(cells[0]),
                eigenvalues=ev[~np.isnan(ev)],
                degeneracies=(0, d1) if d1 else (),
                spins=tuple(s for s in rest[1:3] if s),
                C0=float(rest[3]),
                C1=float(rest[4]),
                flag=rest[5],
            )
        )
    pair = tuple(int(p) for p in meta.get("pair", "0-1").split("-"))
    spec = ModelSpec(meta["model"], int(meta["n"]), float(meta.get("j1", 1.0)))
    return SweepResult(spec, np.array([r.alpha for r in records]), tuple(records),
                       int(meta["k"]), int(meta["seed"]), pair)


# ----------------------------------------------------------------------------- scaling


@dataclass(frozen=True)
class ScalingReport:
    rows: tuple  # (N, series, Discontinuity)
    rational: analysis.RationalFit | None
    alpha_c: float
    loglog: dict

    def text(self) -> str:
        out = ["N,series,alpha_star,bracket_lo,bracket_hi,jump"]
        for n, series, d in self.rows:
            out.append(",".join([str(n), series, format_number(d.alpha_star),
                                 format_number(d.bracket[0]), format_number(d.bracket[1]),
                                 format_number(d.jump)]))
        out.append("")
        out.append("fit,parameter,value")
        if self.rational is not None:
            for name in ("p1", "p2", "p3", "q1", "q2", "sse"):
                out.append(f"rational,{name},{format_number(getattr(self.rational, name))}")
        out.append(f"alpha_c,value,{format_number(self.alpha_c)}")
        for series, fit in self.loglog.items():
            for name in ("beta", "c", "prefactor", "sse"):
                out.append(f"loglog_{series},{name},{format_number(getattr(fit, name))}")
        return "\n".join(out) + "\n"


def _series_points(rows, series):
    return {n: d.alpha_star for n, s, d in rows if s == series}


def scaling_report(sweeps, jump_threshold=analysis.JUMP_THRESHOLD,
                   resolution=analysis.RESOLUTION, alpha_c=None) -> ScalingReport:
    """Locate discontinuities of chain sweeps and fit their size dependence.

    Even sizes feed the rational extrapolation (at least five needed) whose
    limit serves as alpha_c unless one is given.  Odd sizes contribute their
    lower (right-shifting) and upper (left-shifting) discontinuities.
    """
    rows = []
    for result in sorted(sweeps, key=lambda r: r.model.n_sites):
        n = result.model.n_sites
        rep = analysis.locate_discontinuities(result, jump_threshold, resolution)
        rep = analysis.assign_sides(analysis.DiscontinuityReport(
            tuple(d for d in rep.locations if not d.flagged), rep.jump_threshold, rep.resolution
        ), n)
        if n % 2 == 0:
            if len(rep.locations) != 1:
                log.warning("N=%d: %d discontinuities, expected 1; skipped", n, len(rep))
                continue
            rows.append((n, "even", rep.locations[0]))
        else:
            if len(rep.locations) != 2:
                log.warning("N=%d: %d discontinuities, expected 2; skipped", n, len(rep))
                continue
            rows.append((n, "odd_right", rep.locations[0]))
            rows.append((n, "odd_left", rep.locations[1]))
    even = _series_points(rows, "even")
    rational = None
    if even or alpha_c is None:
        if len(even) < 5:
            raise FitError(
                f"the rational extrapolation needs at least 5 even sizes, got {len(even)}"
            )
        rational = analysis.fit_rational_22(even)
    if alpha_c is None:
        alpha_c = rational.p1
    loglog = {}
    for series, side in (("even", "above"), ("odd_right", "below"), ("odd_left", "above")):
        pts = _series_points(rows, series)
        if pts:
            loglog[series] = analysis.fit_loglog(pts, alpha_c, side)
    return ScalingReport(tuple(rows), rational, float(alpha_c), loglog)


# ----------------------------------------------------------------------------- levels


def levels_to_csv(diagram: analysis.LevelDiagram, n_levels: int) -> str:
    header = ["alpha", *(f"L{i}" for i in range(n_levels)), *(f"d{i}" for i in range(n_levels)),
              "crossing", "bracket_lo", "bracket_hi"]
    rows = []
    for r in diagram.records:
        e = list(r.level_energies[:n_levels]) + [math.nan] * (n_levels - len(r.level_energies[:n_levels]))
        d = list(r.degeneracies[:n_levels]) + [0] * (n_levels - len(r.degeneracies[:n_levels]))
        rows.append((r.alpha, [format_number(r.alpha), *map(format_number, e), *map(str, d),
                               "", "", ""]))
    for c in diagram.crossings:
        marker = f"{c.levels[0]}-{c.levels[1]}" + ("?" if c.flagged else "")
        rows.append((c.alpha, [format_number(c.alpha), *(["nan"] * n_levels), *(["0"] * n_levels),
                               marker, format_number(c.bracket[0]), format_number(c.bracket[1])]))
    rows.sort(key=lambda t: t[0])
    return ",".join(header) + "\n" + "".join(",".join(r) + "\n" for _, r in rows)


# ----------------------------------------------------------------------------- commands


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigurationError(f"cannot write {out}: {exc.strerror}") from None


def cmd_sweep(cfg: RunConfig) -> int:
    if cfg.k < analysis.MIN_STATES:
        raise ConfigurationError(f"sweep needs --k >= {analysis.MIN_STATES}")
    result = analysis.sweep(cfg.spec, cfg.grid, cfg.k, cfg.seed)
    _emit(sweep_to_csv(result), cfg.out)
    failed = sum(r.flag == Flag.SOLVER_ERROR for r in result.records)
    if failed:
        print(f"error: solver failed at {failed} alpha values", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def _live_sweeps(cfg: RunConfig):
    if not cfg.sizes:
        raise ConfigurationError("live scaling needs --sizes")
    for n in cfg.sizes:
        result = analysis.sweep(ModelSpec(cfg.model, n), cfg.grid, cfg.k, cfg.seed)
        # round-trip through CSV so live and file-based reports agree exactly
        yield sweep_from_csv(sweep_to_csv(result))


def cmd_scaling(cfg: RunConfig, files: list[str]) -> int:
    if files:
        sweeps = []
        for path in files:
            try:
                sweeps.append(sweep_from_csv(Path(path).read_text(encoding="utf-8")))
            except OSError as exc:
                raise ConfigurationError(f"cannot read {path}: {exc.strerror}") from None
    else:
        if ModelKind.parse(cfg.model) is not ModelKind.CHAIN1D:
            raise ConfigurationError("scaling applies to chain1d sweeps")
        sweeps = list(_live_sweeps(cfg))
    report = scaling_report(sweeps, cfg.jump_threshold, cfg.resolution, cfg.alpha_c)
    _emit(report.text(), cfg.out)
    return EXIT_OK


def cmd_levels(cfg: RunConfig) -> int:
    if cfg.k < analysis.MIN_STATES:
        print(f"warning: k={cfg.k} < {analysis.MIN_STATES}: level curves only, "
              "no crossings computable", file=sys.stderr)
        from .eigensolver import lowest_k
        from .hamiltonian import hamiltonian

        records = []
        for a in cfg.grid:
            sol = lowest_k(hamiltonian(cfg.spec.with_alpha(a)), cfg.k, cfg.seed)
            records.append(PointResult(alpha=float(a), eigenvalues=sol.eigenvalues,
                                       level_energies=tuple(sol.level_energies),
                                       degeneracies=sol.degeneracies))
        diagram = analysis.LevelDiagram(cfg.spec, cfg.grid, tuple(records), ())
    else:
        diagram = analysis.energy_levels(cfg.spec, cfg.grid, cfg.k, cfg.seed, cfg.resolution,
                                         include_ground=cfg.ground)
    n_levels = min(len(r.level_energies) for r in diagram.records if r.level_energies)
    _emit(levels_to_csv(diagram, max(1, n_levels)), cfg.out)
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with default settings")
    common.add_argument("--model", choices=[m.value for m in ModelKind])
    common.add_argument("--n", type=int, help="number of sites")
    common.add_argument("--alpha", help="grid start:stop:step")
    common.add_argument("--k", type=int, help="minimum number of eigenpairs per point")
    common.add_argument("--seed", type=int)
    common.add_argument("--jump-threshold", dest="jump_threshold", type=float)
    common.add_argument("--resolution", type=float)
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="excitedconc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("sweep", parents=[common], help="concurrence and spectrum over an alpha grid")
    sc = sub.add_parser("scaling", parents=[common],
                        help="discontinuities and finite-size fits from sweep CSVs or live runs")
    sc.add_argument("files", nargs="*", help="sweep CSV files; omit for live runs over --sizes")
    sc.add_argument("--sizes", help="comma separated chain lengths for live runs")
    sc.add_argument("--alpha-c", dest="alpha_c", type=float,
                    help="fixed alpha_c for the log-log fits")
    lv = sub.add_parser("levels", parents=[common], help="level curves and crossings")
    lv.add_argument("--ground", action="store_true", default=None,
                    help="also report crossings involving the ground level")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = build_config(args)
        if cfg.command == "sweep":
            return cmd_sweep(cfg)
        if cfg.command == "scaling":
            return cmd_scaling(cfg, args.files)
        return cmd_levels(cfg)
    except (ConfigurationError, ContractViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FitError as exc:
        print(f"fit error: {exc}", file=sys.stderr)
        return EXIT_FIT
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
