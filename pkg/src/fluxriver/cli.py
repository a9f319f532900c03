"""Command-line entry point.

Subcommands: ``validate``, ``river``, ``pixels``, ``decide``, ``synth``.
Settings come from a JSON config (``--config`` or ``$FLUXRIVER_CONFIG``)
whose keys are :class:`RunConfig` field names; flags override it.

Exit codes: 0 success, 1 validation/domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Sequence

from . import __version__
from .aggregate import aggregate_votes, ensemble_decisions, unit_section_length
from .core import WEIGHTING_FLAGS, Bundle, PredictionMatrix, WeightingScheme
from .errors import FluxRiverError
from .figures import SORT_FLAGS, FigureSize, pixel_figure, river_figure
from .ingest import bundle_to_json, load_bundle, serialize_bundle
from .layout import DESIGNS, SMOOTHING
from .synth import PRESETS, SynthSpec, generate

CONFIG_ENV = "FLUXRIVER_CONFIG"


@dataclass
class RunConfig:
    predictions: str | None = None
    meta: str | None = None
    bundle: str | None = None
    moods: str | None = None
    design: str = "dualflux"
    weighting: str | None = None
    basis: str = "precision"
    normalize: bool = False
    smoothing: str = "smooth"
    sort: str = "accuracy"
    weights: list[int] = field(default_factory=list)
    with_river: bool = False
    width: float = 600.0
    height: float = 160.0
    pixel_height: float | None = None
    palette: dict[str, str] = field(default_factory=dict)
    out: str | None = None

    def __post_init__(self) -> None:
        checks = [
            ("design", DESIGNS),
            ("weighting", (None, *WEIGHTING_FLAGS)),
            ("basis", ("precision", "recall")),
            ("smoothing", SMOOTHING),
            ("sort", tuple(SORT_FLAGS)),
        ]
        for name, allowed in checks:
            if getattr(self, name) not in allowed:
                raise FluxRiverError(f"{name} must be one of {list(allowed)}, got {getattr(self, name)!r}")
        if any(p not in (1, 2, 3) for p in self.weights):
            raise FluxRiverError(f"--weights takes 1, 2 or 3, got {self.weights}")
        if self.width <= 0 or self.height <= 0:
            raise FluxRiverError("width and height must be positive")

    @property
    def scheme(self) -> WeightingScheme:
        """The chosen weighting; unweighted when none was given."""
        return WeightingScheme.from_flag(self.weighting or "none", normalized=self.normalize, basis=self.basis)


def _load_config(path: str | None) -> dict:
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise FluxRiverError(f"config {path} must hold a JSON object")
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise FluxRiverError(f"unknown config keys: {unknown}")
    return data


def _run_config(args: argparse.Namespace) -> RunConfig:
    values = _load_config(args.config)
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None and v is not False and v != []:
            values[f.name] = v
    return RunConfig(**values)


def _bundle(cfg: RunConfig):
    b = load_bundle(cfg.predictions, cfg.meta, cfg.bundle, cfg.moods)
    if cfg.palette:
        moods = b.mood_set.with_colors(cfg.palette)
        pm = PredictionMatrix(b.predictions.models, b.predictions.cells, moods)
        b = Bundle(moods, b.meta, pm)
    return b


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_validate(cfg: RunConfig) -> int:
    b = _bundle(cfg)
    pm = b.predictions
    vs = aggregate_votes(pm, b.meta, WeightingScheme())
    print(f"{pm.m} models, {pm.n_steps} steps, {len(b.mood_set)} moods")
    print("moods: " + ", ".join(f"{m.label} ({m.color})" for m in b.mood_set))
    print(f"unit section length: {unit_section_length([mm.interval_length for mm in b.meta])}")
    print("unweighted totals: " + " ".join(str(int(v)) for v in vs.totals))
    return 0


def cmd_river(cfg: RunConfig) -> int:
    b = _bundle(cfg)
    size = FigureSize(width=cfg.width, river_height=cfg.height)
    doc = river_figure(b, cfg.design, cfg.scheme, cfg.smoothing, size)
    _emit(doc.text, cfg.out)
    return 0


def cmd_pixels(cfg: RunConfig) -> int:
    b = _bundle(cfg)
    size = FigureSize(width=cfg.width, river_height=cfg.height, pixel_height=cfg.pixel_height)
    doc = pixel_figure(
        b,
        SORT_FLAGS[cfg.sort],
        powers=cfg.weights,
        with_river=cfg.with_river,
        river_scheme=cfg.scheme if cfg.weighting or cfg.normalize else None,
        basis=cfg.basis,
        smoothing=cfg.smoothing,
        size=size,
    )
    _emit(doc.text, cfg.out)
    return 0


def cmd_decide(cfg: RunConfig) -> int:
    b = _bundle(cfg)
    vs = aggregate_votes(b.predictions, b.meta, cfg.scheme)
    labels = b.mood_set.labels
    lines = ["time_step,mood,votes,total"]
    for t, c in enumerate(ensemble_decisions(vs), start=1):
        lines.append(f"{t},{labels[c]},{float(vs.values[c, t - 1])!r},{float(vs.totals[t - 1])!r}")
    _emit("\n".join(lines) + "\n", cfg.out)
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    spec = PRESETS[args.preset] if args.preset else SynthSpec()
    overrides = {}
    for name in ("seed", "m", "n", "k", "noise"):
        v = getattr(args, name)
        if v is not None:
            overrides[name] = v
    if args.change_points is not None:
        overrides["change_points"] = tuple(int(s) for s in args.change_points.split(",") if s.strip())
        if spec.segment_moods is not None and len(spec.segment_moods) != len(overrides["change_points"]) + 1:
            overrides["segment_moods"] = None
    if args.window_blur:
        overrides["window_blur"] = True
    if "k" in overrides and spec.segment_moods is not None and max(spec.segment_moods) >= overrides["k"]:
        overrides["segment_moods"] = None
    spec = SynthSpec(**{**spec.__dict__, **overrides})
    b = generate(spec)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if args.format in ("csv", "both"):
        serialize_bundle(b).write(out)
    if args.format in ("json", "both"):
        (out / "bundle.json").write_text(bundle_to_json(b), encoding="utf-8", newline="\n")
    (out / "synth_spec.json").write_text(json.dumps(spec.__dict__, indent=1) + "\n", encoding="utf-8", newline="\n")
    print(f"wrote {b.predictions.m} models x {b.predictions.n_steps} steps to {out}")
    return 0


def _add_inputs(p: argparse.ArgumentParser) -> None:
    p.add_argument("--predictions", help="predictions CSV")
    p.add_argument("--meta", help="model metadata CSV")
    p.add_argument("--moods", help="optional moods CSV (label,color)")
    p.add_argument("--bundle", help="bundle JSON (instead of the CSV pair)")
    p.add_argument("--config", help=f"JSON config; defaults to ${CONFIG_ENV}")


def _add_scheme(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--weighting",
        choices=WEIGHTING_FLAGS,
        help="vote weighting (default: none; the river in pixel figures defaults to alpha2)",
    )
    p.add_argument("--basis", choices=("precision", "recall"))
    p.add_argument("--normalize", action="store_true", default=None)


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--width", type=float)
    p.add_argument("--height", type=float, help="river height in pixels")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fluxriver", description="Ensemble prediction rivers and pixel maps.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check inputs and print a summary")
    _add_inputs(p)

    p = sub.add_parser("river", help="render a river SVG")
    _add_inputs(p)
    _add_scheme(p)
    _add_output(p)
    p.add_argument("--design", choices=DESIGNS)
    p.add_argument("--smoothing", choices=SMOOTHING)

    p = sub.add_parser("pixels", help="render per-model pixel maps")
    _add_inputs(p)
    _add_scheme(p)
    _add_output(p)
    p.add_argument("--sort", choices=tuple(SORT_FLAGS))
    p.add_argument("--weights", type=int, action="append", choices=(1, 2, 3), metavar="P")
    p.add_argument("--with-river", action="store_true", default=None)
    p.add_argument("--smoothing", choices=SMOOTHING)
    p.add_argument("--pixel-height", type=float)

    p = sub.add_parser("decide", help="print the per-step ensemble decision as CSV")
    _add_inputs(p)
    _add_scheme(p)
    p.add_argument("--out")

    p = sub.add_parser("synth", help="write a synthetic bundle")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--seed", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--noise", type=float)
    p.add_argument("--change-points", help="comma-separated steps")
    p.add_argument("--window-blur", action="store_true")
    p.add_argument("--format", choices=("csv", "json", "both"), default="both")
    p.add_argument("--out-dir", default=".")
    return parser


COMMANDS = {"validate": cmd_validate, "river": cmd_river, "pixels": cmd_pixels, "decide": cmd_decide}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "synth":
            return cmd_synth(args)
        return COMMANDS[args.command](_run_config(args))
    except (FluxRiverError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
