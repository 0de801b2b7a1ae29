"""Command line interface: ``orthospec <subcommand> --config <path> [--out <path>]``.

Every subcommand reads one JSON config, writes a CSV table (or a JSON
envelope with ``--format json``) and exits with 0 on success, 2 for bad
input, 3 for numerical failures and 4 for internal invariant violations.
Output depends only on the config and the package version; the wall time
goes to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from pathlib import Path
from typing import Any, Callable

import jsonschema
import numpy as np

from . import __version__
from .errors import ConfigError, OrthospecError
from .fuchsian import (
    OrthoSpectrum,
    default_threads,
    geodesic_frame,
    load_group,
    ortho_spectrum,
    pair_cosets,
)
from .rtf import SpectralDatum, geometric_side, spectral_side, twisted_main_term
from .specfun import KernelSpec, classify_regime, k0, k_imag_order_many, k_real_order
from .spectra import (
    KloostermanQuery,
    basmajian_check,
    kloosterman_sum,
    laplace_limit_check,
    nu_counting,
    small_t_asymptotic,
    synthetic_spectrum,
)

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_LADDER = {"type": "array", "items": _POS, "minItems": 1}
_WORD = {
    "type": "object",
    "properties": {"word": {"type": "array", "items": {"type": "integer"}, "minItems": 1}},
    "required": ["word"],
    "additionalProperties": False,
}

SCHEMA: dict[str, Any] = {
    "type": "object",
    "properties": {
        "builtin": {"type": "string"},
        "generators": {"type": "array", "items": {"type": "array", "items": _NUM, "minItems": 4, "maxItems": 4}},
        "label": {"type": "string"},
        "dirichlet": {"type": "boolean"},
        "covolume": _POS,
        "dirichlet_radius": _POS,
        "geodesic": _WORD,
        "geodesic2": _WORD,
        "characters": {
            "type": "object",
            "properties": {"j": {"type": "integer"}, "k": {"type": "integer"}},
            "required": ["j", "k"],
            "additionalProperties": False,
        },
        "params": {
            "type": "object",
            "properties": {
                "t": _POS,
                "t_ladder": _LADDER,
                "cutoff_X": _NUM,
                "cutoff_ladder": _LADDER,
                "tolerance": _POS,
                "budget": {"type": "integer", "minimum": 1},
                "threads": {"type": "integer", "minimum": 1},
                "r": {"type": "number", "minimum": 0},
                "r_ladder": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
                "nu": {"type": "number", "minimum": 0},
                "z": _POS,
                "z_ladder": _LADDER,
                "x_ladder": _LADDER,
                "m": {"type": "integer"},
                "n": {"type": "integer"},
                "volX": _POS,
                "lenC": _POS,
                "lambda_max": _POS,
                "jitter_seed": {"type": "integer"},
                "spectral_csv": {"type": "string"},
                "kernel": {
                    "type": "object",
                    "properties": {
                        "xs": {"type": "array", "items": _NUM, "minItems": 2},
                        "values": {"type": "array", "items": _NUM, "minItems": 2},
                        "decay_rate": _POS,
                    },
                    "required": ["xs", "values", "decay_rate"],
                    "additionalProperties": False,
                },
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}


# --- config -----------------------------------------------------------------


def _line_of(text: str, path) -> int:
    """Best-effort line number for a JSON path: follow the keys in order."""
    pos = 0
    for key in path:
        if isinstance(key, str):
            hit = text.find(json.dumps(key), pos)
            if hit < 0:
                break
            pos = hit
    return text.count("\n", 0, pos) + 1


def load_config(path: str | os.PathLike) -> tuple[dict, Path]:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{p}: cannot read config ({exc.strerror})") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        e = errors[0]
        where = "/".join(map(str, e.absolute_path)) or "<root>"
        raise ConfigError(f"{p}:{_line_of(text, e.absolute_path)}: schema error at {where}: {e.message}")
    return cfg, p.parent


def _threads(cfg: dict) -> int:
    env = os.environ.get("ORTHOSPEC_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            n = 0
        if n < 1:
            raise ConfigError(f"ORTHOSPEC_THREADS={env!r} must be a positive integer")
        return n
    return int(cfg.get("params", {}).get("threads", default_threads()))


def _param(cfg: dict, name: str, default: Any = None, required: bool = False):
    params = cfg.get("params", {})
    if name in params:
        return params[name]
    if required:
        raise ConfigError(f"params.{name} is required for this command")
    return default


def _ladder(cfg: dict, one: str, many: str) -> list[float]:
    params = cfg.get("params", {})
    if many in params:
        return [float(v) for v in params[many]]
    if one in params:
        return [float(params[one])]
    raise ConfigError(f"params.{one} or params.{many} is required for this command")


def _word(cfg: dict, key: str) -> list[int]:
    if key not in cfg:
        raise ConfigError(f"'{key}' is required for this command")
    return list(cfg[key]["word"])


def _spectrum(cfg: dict, threads: int) -> tuple[OrthoSpectrum, Any]:
    G = load_group(cfg)
    frame = geodesic_frame(G, _word(cfg, "geodesic"), threads=threads)
    X = float(_param(cfg, "cutoff_X", required=True))
    budget = int(_param(cfg, "budget", 5_000_000))
    return ortho_spectrum(G, frame, X, budget=budget, threads=threads), G


def _pair_spectrum(cfg: dict, threads: int) -> tuple[OrthoSpectrum, Any, Any]:
    G = load_group(cfg)
    frame1 = geodesic_frame(G, _word(cfg, "geodesic"), threads=threads)
    X = float(_param(cfg, "cutoff_X", required=True))
    budget = int(_param(cfg, "budget", 5_000_000))
    spec = pair_cosets(G, frame1, _word(cfg, "geodesic2"), X, budget=budget, threads=threads)
    return spec, G, frame1


def _kernel(cfg: dict, t: float | None) -> KernelSpec:
    k = _param(cfg, "kernel")
    if k is not None:
        return KernelSpec.tabulated(k["xs"], k["values"], k["decay_rate"])
    if t is None:
        raise ConfigError("params.t is required for this command")
    return KernelSpec.exponential(t)


def _read_spectral_csv(path: Path) -> list[SpectralDatum]:
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read spectral data ({exc.strerror})") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["lambda", "p"]:
            raise ConfigError(f"{path}:1: header must be 'lambda,p'")
        out = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ConfigError(f"{path}:{lineno}: expected 2 columns")
            try:
                lam = float(row[0])
                p = complex(row[1].strip().replace(" ", ""))
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: not a number") from None
            out.append(SpectralDatum(lam, p.real if p.imag == 0.0 else p))
        return out


# --- commands ---------------------------------------------------------------

Table = tuple[list[str], list[list[Any]]]


def cmd_ortho_spectrum(cfg: dict, base: Path, threads: int) -> Table:
    spec, _ = _spectrum(cfg, threads)
    return _spectrum_table(spec)


def cmd_pair_spectrum(cfg: dict, base: Path, threads: int) -> Table:
    spec, _, _ = _pair_spectrum(cfg, threads)
    return _spectrum_table(spec)


def _spectrum_table(spec: OrthoSpectrum) -> Table:
    cols = ["delta", "kind", "ortholength_or_angle", "nu", "lambda_l", "lambda_r", "multiplicity"]
    mult = spec.degeneracy()
    rows = []
    for c, k in zip(spec.classes(), mult):
        geo = c.ortholength if c.ortholength is not None else c.angle
        rows.append([c.delta, c.kind.name.lower(), geo, c.nu, c.lambda_l, c.lambda_r, int(k)])
    return cols, rows


def cmd_geom_side(cfg: dict, base: Path, threads: int) -> Table:
    spec, _ = _spectrum(cfg, threads)
    tol = _param(cfg, "tolerance")
    chars = cfg.get("characters")
    cols = ["t", "main_term", "exceptional_sum", "regular_sum", "total", "truncation_bound", "certified"]
    if chars is not None:
        cols += ["twisted_main_re", "twisted_main_im"]
    rows = []
    if _param(cfg, "kernel") is not None:
        if chars is not None:
            raise ConfigError("characters are supported for the exponential kernel only")
        ts = [None]
    else:
        ts = _ladder(cfg, "t", "t_ladder")
    for t in ts:
        res = geometric_side(spec, kernel=_kernel(cfg, t), rtol=tol, threads=threads)
        row = [t if t is not None else "", res.main_term, res.exceptional_sum, res.regular_sum,
               res.total, res.truncation_bound, int(res.truncation_certified)]
        if chars is not None:
            w = twisted_main_term(chars["j"], chars["k"], spec.lenC, t)
            row += [w.real, w.imag]
        rows.append(row)
    return cols, rows


def cmd_spectral_side(cfg: dict, base: Path, threads: int) -> Table:
    path = base / str(_param(cfg, "spectral_csv", required=True))
    data = _read_spectral_csv(path)
    rows = []
    for t in _ladder(cfg, "t", "t_ladder"):
        v, err = spectral_side(data, t, with_error=True)
        if isinstance(v, complex):
            rows.append([t, v.real, v.imag, err])
        else:
            rows.append([t, v, 0.0, err])
    return ["t", "value_re", "value_im", "error_bound"], rows


def cmd_limit_check(cfg: dict, base: Path, threads: int) -> Table:
    spec, _ = _spectrum(cfg, threads)
    target = 0.5 * spec.lenC
    rows = []
    for t in _ladder(cfg, "t", "t_ladder"):
        res = geometric_side(spec, kernel=KernelSpec.exponential(t), rtol=_param(cfg, "tolerance"))
        v = res.period_normalized()
        bound = res.truncation_bound / (2.0 * math.sqrt(math.pi / t))
        rows.append([t, v, target, (v - target) / target, bound])
    return ["t", "normalized_value", "target", "rel_gap", "truncation_bound"], rows


def cmd_small_t(cfg: dict, base: Path, threads: int) -> Table:
    spec, G = _spectrum(cfg, threads)
    volX = _param(cfg, "volX", G.covolume)
    if volX is None:
        raise ConfigError("params.volX is required when the group has no covolume")
    tol = float(_param(cfg, "tolerance", 1e-6))
    table = small_t_asymptotic(spec, float(volX), _ladder(cfg, "t", "t_ladder"), rtol=tol)
    cols = ["t", "t_total", "truncation_bound", "target_sqrt2", "rel_gap_sqrt2", "target", "rel_gap", "certified"]
    rows = [
        [r["t"], r["t_total"], r["truncation_bound"], r["target_sqrt2"],
         r["t_total"] / r["target_sqrt2"] - 1.0, r["target"], r["t_total"] / r["target"] - 1.0, int(r["certified"])]
        for r in table
    ]
    return cols, rows


def cmd_bessel(cfg: dict, base: Path, threads: int) -> Table:
    zs = _ladder(cfg, "z", "z_ladder")
    params = cfg.get("params", {})
    rows = []
    if "nu" in params:
        nu = float(params["nu"])
        for z in zs:
            s = k_real_order(nu, z, scaled=True)
            rows.append(["real", nu, z, s * math.exp(-z), s, 1e-14 * s, "real_order"])
    else:
        rs = _ladder(cfg, "r", "r_ladder")
        for z in zs:
            vals, rel = k_imag_order_many(np.array(rs), z)
            for r, s, e in zip(rs, vals, rel):
                if r == 0.0:
                    s, e = k0(z, scaled=True), 1e-15
                rows.append(["imag", r, z, float(s) * math.exp(-z), float(s), float(e) * abs(float(s)),
                             classify_regime(r, z).value])
    return ["order_type", "order", "z", "value", "scaled_value", "error_estimate", "regime"], rows


def cmd_kloosterman(cfg: dict, base: Path, threads: int) -> Table:
    if "geodesic2" in cfg:
        spec, _, _ = _pair_spectrum(cfg, threads)
    else:
        spec, _ = _spectrum(cfg, threads)
    q = KloostermanQuery(int(_param(cfg, "m", 0)), int(_param(cfg, "n", 0)))
    rows = []
    for x in _ladder(cfg, "x", "x_ladder"):
        s = kloosterman_sum(spec, q, x)
        rows.append([x, s.real, s.imag, abs(s), nu_counting(spec, x)])
    return ["x", "sum_re", "sum_im", "abs", "count"], rows


def cmd_basmajian(cfg: dict, base: Path, threads: int) -> Table:
    spec, G, frame1 = _pair_spectrum(cfg, threads)
    self_spec = ortho_spectrum(G, frame1, 2.5, threads=threads)
    cutoffs = [float(c) for c in _param(cfg, "cutoff_ladder", [spec.cutoff])]
    rows = []
    for x in sorted(cutoffs):
        r = basmajian_check(spec.restrict(x), self_spec)
        rows.append([x, r.partial_sum, r.bound, r.n_terms, int(r.within_bound)])
    return ["cutoff", "partial_sum", "bound", "n_terms", "within_bound"], rows


def cmd_synthetic(cfg: dict, base: Path, threads: int) -> Table:
    s = synthetic_spectrum(
        float(_param(cfg, "volX", required=True)),
        float(_param(cfg, "lenC", required=True)),
        float(_param(cfg, "lambda_max", required=True)),
        jitter_seed=_param(cfg, "jitter_seed"),
    )
    if "z_ladder" in cfg.get("params", {}) or "z" in cfg.get("params", {}):
        table = laplace_limit_check(s, _ladder(cfg, "z", "z_ladder"))
        return ["z", "value", "target", "rel_gap"], [[r["z"], r["value"], r["target"], r["rel_gap"]] for r in table]
    return ["lambda", "p"], [[float(l), float(p)] for l, p in zip(s.lam, s.p)]


COMMANDS: dict[str, Callable[[dict, Path, int], Table]] = {
    "ortho-spectrum": cmd_ortho_spectrum,
    "geom-side": cmd_geom_side,
    "spectral-side": cmd_spectral_side,
    "limit-check": cmd_limit_check,
    "small-t": cmd_small_t,
    "bessel": cmd_bessel,
    "kloosterman": cmd_kloosterman,
    "basmajian": cmd_basmajian,
    "synthetic": cmd_synthetic,
    "pair-spectrum": cmd_pair_spectrum,
}


# --- output -----------------------------------------------------------------


def _fmt(v: Any) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def render_csv(cols: list[str], rows: list[list[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _jsonable(v: Any) -> Any:
    if isinstance(v, (np.floating, float)):
        f = float(v)
        return f if math.isfinite(f) else str(f)
    if isinstance(v, np.integer):
        return int(v)
    return v


def render_json(command: str, cfg: dict, cols: list[str], rows: list[list[Any]]) -> str:
    env = {
        "command": command,
        "version": __version__,
        "config": cfg,
        "columns": cols,
        "rows": [[_jsonable(v) for v in row] for row in rows],
    }
    return json.dumps(env, indent=2, sort_keys=True) + "\n"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="orthospec", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"orthospec {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="JSON config file")
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    start = time.perf_counter()
    try:
        cfg, base = load_config(args.config)
        threads = _threads(cfg)
        cols, rows = COMMANDS[args.command](cfg, base, threads)
        text = render_csv(cols, rows) if args.format == "csv" else render_json(args.command, cfg, cols, rows)
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    except OrthospecError as exc:
        print(f"orthospec: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    print(f"orthospec: {args.command} wall_time_s={time.perf_counter() - start:.3f}", file=sys.stderr)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
