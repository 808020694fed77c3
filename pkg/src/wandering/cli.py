"""Command-line entry point: ``wandering <command> ...``.

Structured output is JSON on stdout; images go to files.  Exit status is
0 on success, 1 when a verification or check fails and 2 on usage errors.

Words are read left to right as outer to inner, so ``--word fg`` is f∘g
(g is applied first).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from . import approximation as ap
from . import dynamics as dy
from . import geometry as geo
from . import symbolic as sy

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
LETTER_TARGET = {"f": "alpha", "g": "beta", "h": "gamma"}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str = ""
    action: str = ""
    word: str = "f"
    start: str = "Core"
    k_max: int = 100
    horizon: Optional[int] = None
    full: bool = False
    example: int = 3
    N: int = 1
    T: float = 2.0
    target: str = "alpha"
    degree: int = 300
    lam: float = 0.0
    spacing: float = 0.05
    weights: str = "tolerance"
    fresh_spacing: float = 0.025
    oracle: bool = False
    map: str = "f"
    overlay: Optional[str] = None
    seeds: int = 50
    maps: dict = field(default_factory=dict)  # letter -> approximant JSON path
    box: Optional[list] = None
    resolution: float = 20.0
    viewport: list = field(default_factory=lambda: [-12.0, 12.0, -5.0, 5.0])
    size: list = field(default_factory=lambda: [480, 200])
    max_steps: int = 24
    out: Optional[str] = None

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        extra = set(obj) - known
        if extra:
            raise UsageError(f"unknown config keys: {', '.join(sorted(extra))}")
        return cls(**obj)


# ------------------------------------------------------------------ parsing


def _floats(n):
    def parse(text):
        try:
            vals = [float(v) for v in text.split(",")]
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {text!r}")
        if len(vals) != n:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {text!r}")
        return vals
    return parse


def _size(text):
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}")
    return [w, h]


def _maps(text):
    out = {}
    for item in text.split(","):
        letter, _, path = item.partition("=")
        if letter not in LETTER_TARGET or not path:
            raise argparse.ArgumentTypeError(f"expected f=path,g=path,..., got {text!r}")
        out[letter] = path
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS  # unset flags leave the config value alone
    p = _Parser(prog="wandering", description=__doc__.split("\n\n")[0], argument_default=S)
    p.add_argument("--config", help="JSON file holding a full RunConfig; flags override it")
    p.add_argument("--dump-config", action="store_true", help="print the resolved config and exit")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def word(q):
        q.add_argument("--word", help="word over f, g, h; fg means f∘g")

    def setspec(q):
        q.add_argument("--example", type=int, choices=[1, 3])
        q.add_argument("-N", dest="N", type=int)
        q.add_argument("-T", dest="T", type=float)

    def fitspec(q):
        q.add_argument("--degree", type=int)
        q.add_argument("--lambda", dest="lam", type=float)
        q.add_argument("--spacing", type=float)
        q.add_argument("--weights", choices=["tolerance", "uniform"])
        q.add_argument("--maps", type=_maps, help="load fitted maps, e.g. f=f.json,g=g.json")
        q.add_argument("--oracle", action="store_true", help="use exact piecewise maps instead of fits")

    t = sub.add_parser("tables", help="generator, derived and claimed transition tables")
    tsub = t.add_subparsers(dest="action", parser_class=_Parser)
    for name in ("derive", "claimed", "diff"):
        q = tsub.add_parser(name, argument_default=S)
        word(q)
        if name == "diff":
            q.add_argument("--kmax", dest="k_max", type=int)

    q = sub.add_parser("classify", help="classify one symbolic orbit", argument_default=S)
    word(q)
    q.add_argument("--start", help="Core, G:k or B:k")
    q.add_argument("--horizon", type=int)

    q = sub.add_parser("enumerate", help="classify every G(k), B(k) with k <= kmax", argument_default=S)
    word(q)
    q.add_argument("--kmax", dest="k_max", type=int)
    q.add_argument("--horizon", type=int)
    q.add_argument("--full", action="store_true", help="list every classification")

    g = sub.add_parser("geometry", help="truncated Carleman sets")
    gsub = g.add_subparsers(dest="action", parser_class=_Parser)
    setspec(gsub.add_parser("build", argument_default=S))

    q = sub.add_parser("check-complement", help="raster check that the complement is connected", argument_default=S)
    setspec(q)
    q.add_argument("--box", type=_floats(4), help="x0,x1,y0,y1 (default: padded bounding box)")
    q.add_argument("--resolution", type=float, help="pixels per unit")

    q = sub.add_parser("fit", help="fit a polynomial approximant to a target", argument_default=S)
    setspec(q)
    q.add_argument("--target", choices=["alpha", "beta", "gamma"])
    fitspec(q)
    q.add_argument("--out", help="write the approximant JSON here")

    q = sub.add_parser("verify", help="check fitted maps against the derived table", argument_default=S)
    word(q)
    setspec(q)
    fitspec(q)
    q.add_argument("--fresh-spacing", dest="fresh_spacing", type=float)

    q = sub.add_parser("fixedpoint", help="attracting fixed point of a fitted generator", argument_default=S)
    q.add_argument("--map", choices=["f", "g", "h"])
    q.add_argument("--seeds", type=int)
    setspec(q)
    fitspec(q)

    q = sub.add_parser("render", help="PPM image of the set, optionally with an escape overlay", argument_default=S)
    setspec(q)
    q.add_argument("--viewport", type=_floats(4))
    q.add_argument("--res", dest="size", type=_size)
    q.add_argument("--max-steps", dest="max_steps", type=int)
    q.add_argument("--map", dest="overlay", choices=["f", "g", "h"], help="overlay steps to the fixed point of this map")
    fitspec(q)
    q.add_argument("--out")
    return p


def resolve_config(argv) -> tuple[RunConfig, bool]:
    ns = vars(build_parser().parse_args(argv))
    dump = ns.pop("dump_config", False)
    cfg = RunConfig()
    path = ns.pop("config", None)
    if path is not None:
        try:
            cfg = RunConfig.from_json(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError, TypeError) as e:
            raise UsageError(f"cannot read config {path}: {e}")
    for k, v in ns.items():
        if v is not None:
            setattr(cfg, k, v)
    return cfg, dump


# ---------------------------------------------------------------- commands


def _clean(obj):
    """Non-finite floats become null so output stays strict JSON."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def _emit(obj, stream) -> None:
    stream.write(json.dumps(_clean(obj), indent=2) + "\n")


def _cset(cfg: RunConfig) -> geo.TruncatedCarlemanSet:
    return geo.build_set(cfg.example, cfg.N, cfg.T)


def _generator(letter: str, cfg: RunConfig, cset, cache: dict):
    if letter in cache:
        return cache[letter]
    target = LETTER_TARGET[letter]
    if cfg.oracle:
        F = ap.oracle_map(target, cset)
    elif letter in cfg.maps:
        obj = json.loads(Path(cfg.maps[letter]).read_text())
        F = ap.EntireMap(ap.Approximant.from_json(obj), letter)
    else:
        fr = ap.fit_approximant(cset, ap.target_profile(target, cset), cfg.degree, cfg.lam, cfg.spacing, cfg.weights)
        F = ap.EntireMap(fr.approximant, letter)
    cache[letter] = F
    return F


def _composite(cfg: RunConfig, cset):
    cache: dict = {}
    maps = {c: _generator(c, cfg, cset, cache) for c in sorted(set(cfg.word))}
    return maps[cfg.word] if len(cfg.word) == 1 else ap.CompositeMap(maps, cfg.word)


def cmd_tables(cfg, out):
    word = sy.check_word(cfg.word)
    if cfg.action == "derive":
        _emit(sy.table_to_json(sy.derived_table(word)), out)
    elif cfg.action == "claimed":
        _emit(sy.table_to_json(sy.claimed_table(word)), out)
    elif cfg.action == "diff":
        rep = sy.diff_tables(sy.derived_table(word), sy.claimed_table(word), cfg.k_max)
        _emit(rep.to_json(), out)
    else:
        raise UsageError("tables needs one of: derive, claimed, diff")
    return EXIT_OK


def cmd_classify(cfg, out):
    table = sy.derived_table(sy.check_word(cfg.word))
    start = sy.DomainSymbol.parse(cfg.start)
    _emit(sy.classify_orbit(table, start, cfg.horizon or 100).to_json(), out)
    return EXIT_OK


def cmd_enumerate(cfg, out):
    summary = sy.enumerate_wandering(sy.check_word(cfg.word), cfg.k_max, cfg.horizon)
    _emit(summary.to_json(full=cfg.full), out)
    return EXIT_OK


def cmd_geometry(cfg, out):
    if cfg.action != "build":
        raise UsageError("geometry needs: build")
    _emit(_cset(cfg).to_json(), out)
    return EXIT_OK


def cmd_check_complement(cfg, out):
    rep = geo.complement_report(_cset(cfg), cfg.box, cfg.resolution)
    _emit(rep, out)
    return EXIT_OK if rep["connected"] else EXIT_FAIL


def cmd_fit(cfg, out):
    cset = _cset(cfg)
    target = ap.target_profile(cfg.target, cset)
    fr = ap.fit_approximant(cset, target, cfg.degree, cfg.lam, cfg.spacing, cfg.weights)
    if cfg.out:
        Path(cfg.out).write_text(json.dumps(_clean(fr.approximant.to_json())) + "\n")
    _emit({
        "target": target.name, "degree": fr.approximant.degree, "lambda": cfg.lam, "spacing": cfg.spacing,
        "samples": fr.samples, "training_residual": fr.training_residual,
        "relative_residual": fr.relative_residual, "out": cfg.out,
    }, out)
    return EXIT_OK


def cmd_verify(cfg, out):
    word = sy.check_word(cfg.word)
    cset = _cset(cfg)
    F = _composite(cfg, cset)
    only = [c.id for c in cset.components if c.symbol is not None and ap.chain_stays_inside(cset, word, c.symbol)]
    rep = ap.verify_mapping(F, cset, sy.derived_table(word), cfg.fresh_spacing, only=only)
    _emit(rep.to_json(), out)
    return EXIT_OK if rep.passed else EXIT_FAIL


def _fixed_points(F, cset, n):
    seeds = geo.sample_components(cset, 0.05)["G0"]
    seeds = seeds[np.linspace(0, seeds.size - 1, min(n, seeds.size)).astype(int)]
    return [dy.find_fixed_point(F, s) for s in seeds]


def cmd_fixedpoint(cfg, out):
    cset = _cset(cfg)
    F = _generator(cfg.map, cfg, cset, {})
    res = _fixed_points(F, cset, cfg.seeds)
    zs = np.array([r.z0 for r in res])
    conv = sum(r.converged for r in res)
    spread = float(np.max(np.abs(zs - zs[0]))) if conv == len(res) else math.inf
    best = res[0]
    ok = best.attracting and abs(best.z0 - 2) < 0.5 and spread < 1e-6
    _emit({"map": cfg.map, "seeds": len(res), "converged_seeds": conv, "spread": spread, "pass": ok,
           **best.to_json()}, out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_render(cfg, out):
    if not cfg.out:
        raise UsageError("render needs --out")
    cset = _cset(cfg)
    F = _generator(cfg.overlay, cfg, cset, {}) if cfg.overlay else None
    data = dy.render_regions(cset, F, cfg.viewport, cfg.size, cfg.out, cfg.max_steps)
    _emit({"out": cfg.out, "bytes": len(data), "sha256": dy.sha256(data)}, out)
    return EXIT_OK


COMMANDS = {
    "tables": cmd_tables,
    "classify": cmd_classify,
    "enumerate": cmd_enumerate,
    "geometry": cmd_geometry,
    "check-complement": cmd_check_complement,
    "fit": cmd_fit,
    "verify": cmd_verify,
    "fixedpoint": cmd_fixedpoint,
    "render": cmd_render,
}


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        cfg, dump = resolve_config(argv if argv is not None else sys.argv[1:])
        if dump:
            _emit(cfg.to_json(), out)
            return EXIT_OK
        if cfg.command not in COMMANDS:
            raise UsageError(f"expected a command: {', '.join(COMMANDS)}")
        return COMMANDS[cfg.command](cfg, out)
    except UsageError as e:
        err.write(f"wandering: error: {e}\n")
    except (ValueError, KeyError, OSError, sy.TableError, geo.RasterResolutionError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        err.write(f"wandering: error: {msg}\n")
    return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
