"""Small helpers shared by the experiment scripts."""

import argparse
import dataclasses
import json
from pathlib import Path


def parse_config(cls, description):
    """Build a dataclass config from CLI flags named after its fields; ``--quick`` picks cls.quick()."""
    parser = argparse.ArgumentParser(description=description)
    parser.add_argument("--quick", action="store_true", help="small sizes for a smoke run")
    parser.add_argument("--out", type=Path, default=None, help="write the JSON report here")
    for f in dataclasses.fields(cls):
        parser.add_argument(f"--{f.name.replace('_', '-')}", dest=f.name, type=_caster(f.default), default=None)
    args = parser.parse_args()
    cfg = cls.quick() if args.quick else cls()
    overrides = {f.name: getattr(args, f.name) for f in dataclasses.fields(cls) if getattr(args, f.name) is not None}
    return dataclasses.replace(cfg, **overrides), args.out


def _caster(default):
    if isinstance(default, tuple):
        return lambda s: tuple(float(v) for v in s.split(","))
    if isinstance(default, bool):
        return lambda s: s.lower() in ("1", "true", "yes")
    return type(default)


def dump(report, cfg, out):
    payload = {"config": dataclasses.asdict(cfg), "report": report}
    text = json.dumps(payload, indent=2, sort_keys=True, default=str)
    if out is not None:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text + "\n")
    return payload
