"""Command-line front end: QFI reports, precision sweeps, sampling, MLE and Wigner grids.

Every option can also come from a flat JSON config file (``--config``); flags
win over the file. Outputs carry the resolved configuration in their metadata,
so feeding that block back through ``--config`` reproduces the numbers.

Exit codes: 0 success, 2 bad configuration or usage, 3 numerical failure,
4 file input/output error.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import sys
from dataclasses import asdict, dataclass, fields
from typing import IO

import numpy as np

from . import __version__
from . import io as eio
from .fisher_c import QuadratureError, mle, mle_campaign, precision_sweep
from .fisher_q import qfi
from .measure import DensityUnderflowError, Scheme, sample
from .states import (
    DephasingParams,
    Family,
    InterferometerParams,
    StateFamily,
    TruncationError,
    UnsupportedFamilyError,
    alpha_from_mean_photons,
    reduced_wigner_ecs,
)

__all__ = ["ConfigError", "RunConfig", "build_parser", "main", "resolve_config"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

STOCHASTIC = ("sample", "mle-campaign")
SWEEP_SCHEMES = ("homodyne", "counting", "quantum")


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


@dataclass
class RunConfig:
    """Resolved run configuration; ``None`` marks an unset option."""

    command: str
    state: str = "ecs"
    N: int | None = None
    alpha: float | None = None
    n_bar: float | None = None
    phi1: float | None = None
    phi2: float | None = None
    phi: float | None = None
    phi_bar: float | None = None
    loss_p: float = 0.0
    chi: float = 0.0
    vartheta: float = 0.0
    scheme: str | None = None
    axis: str = "phi"
    grid_from: float | None = None
    grid_to: float | None = None
    points: int = 128
    grid: str | None = None
    M: int = 1
    trials: int = 500
    seed: int | None = None
    count: int | None = None
    samples: str | None = None
    window_lo: float = -math.pi
    window_hi: float = math.pi
    coarse_points: int = 256
    resolution: int = 400
    extent: float | None = None
    output_path: str | None = None
    output_format: str = "csv"
    threads: int = 1

    # --- derived objects -----------------------------------------------------

    def family(self) -> StateFamily:
        return StateFamily.parse(self.state, self.N)

    def alpha_value(self) -> float:
        fam = self.family()
        if fam.tag is Family.NOON:
            return 0.0
        if self.alpha is not None:
            return float(self.alpha)
        return alpha_from_mean_photons(fam, float(self.n_bar))

    def params(self) -> InterferometerParams:
        a = self.alpha_value()
        if self.phi1 is not None or self.phi2 is not None:
            return InterferometerParams(a, self.phi1 or 0.0, self.phi2 or 0.0, self.loss_p)
        return InterferometerParams.from_phase(a, self.phi or 0.0, self.phi_bar or 0.0, self.loss_p)

    def deph(self) -> DephasingParams:
        return DephasingParams(self.chi, self.vartheta)

    def echo(self) -> dict:
        """Options this command uses, in a form ``--config`` accepts back."""
        keep = _COMMON_KEYS + _COMMAND_KEYS.get(self.command, ())
        return {k: v for k, v in asdict(self).items() if v is not None and k in keep}


_FIELDS = {f.name for f in fields(RunConfig)}
_INT_KEYS = {"N", "points", "M", "trials", "seed", "count", "coarse_points", "resolution", "threads"}
_STR_KEYS = {"state", "scheme", "axis", "grid", "samples", "output_path", "output_format"}
_AMPLITUDE = ("alpha", "n_bar")
_COMMON_KEYS = (
    "state", "N", "alpha", "n_bar", "phi1", "phi2", "phi", "phi_bar",
    "loss_p", "chi", "vartheta", "output_path", "output_format",
)
_MLE_KEYS = ("scheme", "window_lo", "window_hi", "coarse_points")
_COMMAND_KEYS = {
    "qfi": ("M",),
    "sweep": ("scheme", "axis", "grid_from", "grid_to", "points", "grid", "M", "threads"),
    "sample": ("scheme", "count", "seed"),
    "mle": _MLE_KEYS + ("samples",),
    "mle-campaign": _MLE_KEYS + ("M", "trials", "seed", "threads"),
    "wigner": ("resolution", "extent"),
}
_PHASE_ARMS = ("phi1", "phi2")
_PHASE_DIFF = ("phi", "phi_bar")


def _coerce(key: str, val):
    if val is None:
        return None
    if key in _STR_KEYS:
        if not isinstance(val, str):
            raise ConfigError(f"{key} must be a string, got {val!r}")
        return val
    if key in _INT_KEYS:
        if isinstance(val, bool) or not float(val).is_integer():
            raise ConfigError(f"{key} must be an integer, got {val!r}")
        return int(val)
    if isinstance(val, bool):
        raise ConfigError(f"{key} must be a number, got {val!r}")
    try:
        out = float(val)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a number, got {val!r}") from None
    if not math.isfinite(out):
        raise ConfigError(f"{key} must be finite")
    return out


def load_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a flat JSON object of key/value pairs")
    # accept an echoed metadata block directly
    if "config" in data and isinstance(data["config"], dict) and "tool" in data:
        data = data["config"]
    for k, v in data.items():
        if isinstance(v, (dict, list)):
            raise ConfigError(f"config key {k!r} must hold a scalar (the format is flat)")
    return data


def resolve_config(command: str, flags: dict, file_cfg: dict | None = None) -> RunConfig:
    """Merge config-file values under command-line flags and validate.

    A flag that sets part of the amplitude or phase specification replaces that
    whole specification from the file, so the two sources never mix.
    """
    file_cfg = dict(file_cfg or {})
    unknown = sorted(set(file_cfg) - _FIELDS - {"command"})
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    file_cfg.pop("command", None)
    if any(k in flags for k in _AMPLITUDE):
        for k in _AMPLITUDE:
            file_cfg.pop(k, None)
    if any(k in flags for k in _PHASE_ARMS + _PHASE_DIFF):
        for k in _PHASE_ARMS + _PHASE_DIFF:
            file_cfg.pop(k, None)
    merged = {**file_cfg, **flags}
    merged = {k: _coerce(k, v) for k, v in merged.items()}
    merged = {k: v for k, v in merged.items() if v is not None}
    cfg = RunConfig(command=command, **merged)
    if command == "sweep" and cfg.scheme is None:
        cfg.scheme = ",".join(SWEEP_SCHEMES)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    try:
        fam = cfg.family()
    except ValueError as exc:
        raise ConfigError(f"bad state: {exc} (use --state ecs|qwp|noon, with --N for noon)") from None
    if cfg.alpha is not None and cfg.n_bar is not None:
        raise ConfigError("give exactly one of --alpha and --n-bar")
    if fam.tag is not Family.NOON and cfg.alpha is None and cfg.n_bar is None:
        raise ConfigError("missing amplitude: give --alpha or --n-bar")
    if fam.tag is Family.NOON and (cfg.alpha is not None or cfg.n_bar is not None):
        raise ConfigError("N00N states take --N, not --alpha/--n-bar")
    arms = any(getattr(cfg, k) is not None for k in _PHASE_ARMS)
    diff = any(getattr(cfg, k) is not None for k in _PHASE_DIFF)
    if arms and diff:
        raise ConfigError("give either --phi1/--phi2 or --phi/--phi-bar, not both")
    if cfg.command in ("sample", "mle-campaign", "wigner") and not (arms or diff):
        raise ConfigError("missing phase: give --phi (and optionally --phi-bar) or --phi1/--phi2")
    if cfg.alpha is not None and cfg.alpha < 0:
        raise ConfigError("--alpha must be >= 0")
    if cfg.n_bar is not None and cfg.n_bar < 0:
        raise ConfigError("--n-bar must be >= 0")
    if not 0.0 <= cfg.loss_p <= 1.0:
        raise ConfigError("--loss must lie in [0, 1]")
    if cfg.chi < 0:
        raise ConfigError("--chi must be >= 0")
    if cfg.M < 1:
        raise ConfigError("--M must be a positive integer")
    if cfg.threads < 1:
        raise ConfigError("--threads must be >= 1")
    if cfg.command in STOCHASTIC and cfg.seed is None:
        raise ConfigError(f"{cfg.command} is stochastic and needs --seed")
    if cfg.seed is not None and cfg.seed < 0:
        raise ConfigError("--seed must be nonnegative")
    if cfg.command == "sweep":
        if cfg.axis not in ("phi", "n_bar"):
            raise ConfigError("--axis must be phi or n_bar")
        schemes = _schemes(cfg)
        bad = [s for s in schemes if s not in SWEEP_SCHEMES]
        if bad:
            raise ConfigError(f"unknown scheme(s) {bad}; choose from {', '.join(SWEEP_SCHEMES)}")
        if cfg.grid is None and (cfg.grid_from is None or cfg.grid_to is None):
            raise ConfigError("sweep needs --from and --to (or --grid a,b,c)")
        if cfg.grid is None and cfg.points < 1:
            raise ConfigError("--points must be >= 1")
    if cfg.command in ("sample", "mle", "mle-campaign"):
        if cfg.scheme is None:
            raise ConfigError("give --scheme homodyne or --scheme counting")
        if cfg.scheme not in ("homodyne", "counting"):
            raise ConfigError("--scheme must be homodyne or counting here")
        if fam.tag is Family.NOON:
            raise ConfigError("sampling and estimation are provided for ecs and qwp states only")
    if cfg.command == "sample" and (cfg.count is None or cfg.count < 1):
        raise ConfigError("sample needs --count >= 1")
    if cfg.command == "mle" and cfg.samples is None:
        raise ConfigError("mle needs --samples FILE")
    if cfg.command in ("mle", "mle-campaign") and not cfg.window_lo < cfg.window_hi:
        raise ConfigError("--window-lo must be below --window-hi")
    if cfg.command == "mle-campaign" and cfg.trials < 100:
        raise ConfigError("--trials must be >= 100")
    if cfg.command == "wigner":
        if fam.tag is not Family.ECS:
            raise ConfigError("wigner grids are provided for --state ecs only")
        if cfg.loss_p != 0.0:
            raise ConfigError("wigner grids are provided for --loss 0 only")
        if cfg.resolution < 2:
            raise ConfigError("--resolution must be >= 2")
        if cfg.extent is not None and cfg.extent <= 0:
            raise ConfigError("--extent must be positive")
    formats = ("csv", "json", "jsonl") if cfg.command == "sample" else ("csv", "json")
    if cfg.output_format not in formats:
        raise ConfigError(f"--format must be one of {', '.join(formats)}")


def _schemes(cfg: RunConfig) -> list[str]:
    return [s.strip() for s in cfg.scheme.split(",") if s.strip()]


def _grid(cfg: RunConfig) -> np.ndarray:
    if cfg.grid is not None:
        try:
            return np.array([float(g) for g in cfg.grid.split(",")])
        except ValueError:
            raise ConfigError("--grid must be a comma-separated list of numbers") from None
    return np.linspace(cfg.grid_from, cfg.grid_to, cfg.points)


def _meta(cfg: RunConfig) -> dict:
    return {
        "tool": "ecsmetro",
        "version": __version__,
        "command": cfg.command,
        "config": cfg.echo(),
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }


def _emit(cfg: RunConfig, write) -> None:
    """Run ``write(fh)`` against the output file, or stdout when none is set."""
    if cfg.output_path is None:
        write(sys.stdout)
        return
    with open(cfg.output_path, "w", newline="") as fh:
        write(fh)


def _dump_json(fh: IO[str], obj) -> None:
    json.dump(obj, fh, indent=1, sort_keys=False, allow_nan=False)
    fh.write("\n")


def _rows_csv(fh: IO[str], meta: dict, header, rows) -> None:
    import csv

    for key, val in meta.items():
        fh.write(f"# {key}: {json.dumps(val, sort_keys=True)}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float):
        return eio.fmt(v)
    return str(v)


def _table(cfg: RunConfig, meta: dict, rows: list[dict]) -> None:
    if cfg.output_format == "json":
        body = [{k: (eio.json_value(v) if isinstance(v, float) else v) for k, v in r.items()} for r in rows]
        _emit(cfg, lambda fh: _dump_json(fh, {"meta": meta, "rows": body}))
    else:
        header = list(rows[0]) if rows else []
        _emit(cfg, lambda fh: _rows_csv(fh, meta, header, [[_cell(v) for v in r.values()] for r in rows]))


# --- subcommands -----------------------------------------------------------------


def cmd_qfi(cfg: RunConfig) -> None:
    fam = cfg.family()
    res = qfi(fam, cfg.params(), cfg.deph())
    row = {
        "state": str(fam),
        "n_bar": float(res.n_bar),
        "qfi": float(res.value),
        "delta_phi_min": 1.0 / math.sqrt(cfg.M * res.value) if res.value > 0 else math.inf,
        "M": cfg.M,
    }
    _table(cfg, _meta(cfg), [row])


def cmd_sweep(cfg: RunConfig) -> None:
    fam = cfg.family()
    grid = _grid(cfg)
    fixed = cfg.params()
    reports = []
    for scheme in _schemes(cfg):
        reports.extend(precision_sweep(scheme, fam, cfg.axis, grid, fixed, cfg.M, cfg.deph(), cfg.threads))
    meta = _meta(cfg)
    if cfg.output_format == "json":
        _emit(cfg, lambda fh: _dump_json(fh, eio.reports_to_json(reports, cfg.axis, meta)))
    else:
        _emit(cfg, lambda fh: eio.write_reports_csv(fh, reports, cfg.axis, meta))


def cmd_sample(cfg: RunConfig) -> None:
    rec = sample(Scheme(cfg.scheme), cfg.family(), cfg.params(), cfg.deph(), cfg.seed, cfg.count)
    meta = _meta(cfg)
    if cfg.output_format == "csv":
        _emit(cfg, lambda fh: eio.write_samples_csv(fh, rec, meta))
    else:
        _emit(cfg, lambda fh: eio.write_samples_jsonl(fh, rec, meta))


def cmd_mle(cfg: RunConfig) -> None:
    with open(cfg.samples) as fh:
        rec = eio.read_samples(fh)
    res = mle(
        Scheme(cfg.scheme),
        cfg.family(),
        rec,
        cfg.params(),
        cfg.deph(),
        (cfg.window_lo, cfg.window_hi),
        cfg.coarse_points,
    )
    row = {
        "phi_hat": res.phi_hat,
        "log_likelihood": res.log_likelihood,
        "observed_information": res.observed_information,
        "samples": len(rec),
        "multimodal": bool(res.multimodal),
        "degenerate": bool(res.degenerate),
        "at_boundary": bool(res.at_boundary),
        "misfit": bool(res.misfit),
    }
    _table(cfg, _meta(cfg), [row])


def cmd_mle_campaign(cfg: RunConfig) -> None:
    summary = mle_campaign(
        Scheme(cfg.scheme),
        cfg.family(),
        cfg.params(),
        cfg.deph(),
        M=cfg.M,
        trials=cfg.trials,
        rng_seed=cfg.seed,
        search_window=(cfg.window_lo, cfg.window_hi),
        coarse_points=cfg.coarse_points,
        workers=cfg.threads,
    )
    row = {k: (float(v) if isinstance(v, float) else v) for k, v in summary.as_dict().items()}
    _table(cfg, _meta(cfg), [row])


def cmd_wigner(cfg: RunConfig) -> None:
    params = cfg.params()
    half = cfg.extent if cfg.extent is not None else params.alpha + 4.0
    grid = reduced_wigner_ecs(params, (-half, half), (-half, half), cfg.resolution)
    meta = _meta(cfg)
    meta["total"] = float(grid.total())
    if cfg.output_format == "json":
        _emit(cfg, lambda fh: _dump_json(fh, eio.wigner_to_json(grid, meta)))
    else:
        _emit(cfg, lambda fh: eio.write_wigner_csv(fh, grid, meta))


COMMANDS = {
    "qfi": cmd_qfi,
    "sweep": cmd_sweep,
    "sample": cmd_sample,
    "mle": cmd_mle,
    "mle-campaign": cmd_mle_campaign,
    "wigner": cmd_wigner,
}


# --- argument parsing ----------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--config", default=S, help="flat JSON file of option values; flags override it")
    p.add_argument("--state", default=S, help="ecs, qwp or noon (default ecs)")
    p.add_argument("--N", type=int, default=S, help="photon number of a N00N state")
    p.add_argument("--alpha", type=float, default=S, help="coherent amplitude")
    p.add_argument("--n-bar", dest="n_bar", type=float, default=S, help="mean photon number")
    p.add_argument("--phi1", type=float, default=S)
    p.add_argument("--phi2", type=float, default=S)
    p.add_argument("--phi", type=float, default=S, help="differential phase phi1 - phi2")
    p.add_argument("--phi-bar", dest="phi_bar", type=float, default=S, help="mean phase (phi1 + phi2)/2")
    p.add_argument("--loss", dest="loss_p", type=float, default=S, help="per-photon loss probability")
    p.add_argument("--chi", type=float, default=S, help="QWP dephasing strength")
    p.add_argument("--vartheta", type=float, default=S, help="QWP dephasing phase offset")
    p.add_argument("--M", type=int, default=S, help="number of repetitions")
    p.add_argument("--output", dest="output_path", default=S, help="output file (default stdout)")
    p.add_argument("--format", dest="output_format", default=S, help="csv or json")
    p.add_argument("--threads", type=int, default=S, help="worker cap for sweeps and campaigns")


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = _Parser(prog="ecsmetro", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("qfi", help="quantum Fisher information and quantum Cramer-Rao bound")
    _common(p)

    p = sub.add_parser("sweep", help="precision along phi or n_bar")
    _common(p)
    p.add_argument("--scheme", default=S, help="comma list of homodyne, counting, quantum")
    p.add_argument("--axis", default=S, help="phi or n_bar")
    p.add_argument("--from", dest="grid_from", type=float, default=S)
    p.add_argument("--to", dest="grid_to", type=float, default=S)
    p.add_argument("--points", type=int, default=S)
    p.add_argument("--grid", default=S, help="explicit comma-separated grid, overrides --from/--to")

    p = sub.add_parser("sample", help="draw measurement records")
    _common(p)
    p.add_argument("--scheme", default=S, help="homodyne or counting")
    p.add_argument("--count", type=int, default=S)
    p.add_argument("--seed", type=int, default=S)

    p = sub.add_parser("mle", help="maximum-likelihood phase estimate from a sample file")
    _common(p)
    p.add_argument("--scheme", default=S, help="homodyne or counting")
    p.add_argument("--samples", default=S, help="sample file written by the sample command")
    p.add_argument("--window-lo", dest="window_lo", type=float, default=S)
    p.add_argument("--window-hi", dest="window_hi", type=float, default=S)
    p.add_argument("--coarse-points", dest="coarse_points", type=int, default=S)

    p = sub.add_parser("mle-campaign", help="repeated MLE trials compared with the Cramer-Rao bound")
    _common(p)
    p.add_argument("--scheme", default=S, help="homodyne or counting")
    p.add_argument("--trials", type=int, default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--window-lo", dest="window_lo", type=float, default=S)
    p.add_argument("--window-hi", dest="window_hi", type=float, default=S)
    p.add_argument("--coarse-points", dest="coarse_points", type=int, default=S)

    p = sub.add_parser("wigner", help="reduced Wigner distribution of the ECS output mode")
    _common(p)
    p.add_argument("--resolution", type=int, default=S, help="grid points per axis")
    p.add_argument("--extent", type=float, default=S, help="half-width of the square window")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    ns = vars(parser.parse_args(argv))
    command = ns.pop("command")
    config_path = ns.pop("config", None)
    try:
        file_cfg = load_config_file(config_path) if config_path else {}
        cfg = resolve_config(command, ns, file_cfg)
        COMMANDS[command](cfg)
    except ConfigError as exc:
        print(f"ecsmetro {command}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QuadratureError, DensityUnderflowError, TruncationError, FloatingPointError) as exc:
        print(f"ecsmetro {command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except UnsupportedFamilyError as exc:
        print(f"ecsmetro {command}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"ecsmetro {command}: file error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # remaining domain validation failures from the library layer
        print(f"ecsmetro {command}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
