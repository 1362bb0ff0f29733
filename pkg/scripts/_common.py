"""Shared helpers: override dataclass fields from ``--field value`` pairs on the command line."""

import argparse
import dataclasses
import json
from pathlib import Path


def _coerce(kind, text):
    if kind in (int, "int"):
        return int(text)
    if kind in (float, "float"):
        return float(text)
    if kind in (bool, "bool"):
        return text.lower() in ("1", "true", "yes")
    if kind in (tuple, "tuple"):
        return tuple(float(v) if "." in v else int(v) for v in text.split(",") if v.strip())
    return text


def parse_config(cls, description):
    ap = argparse.ArgumentParser(description=description)
    for f in dataclasses.fields(cls):
        ap.add_argument(f"--{f.name.replace('_', '-')}", dest=f.name, default=None,
                        help=f"default: {f.default!r}")
    ns = vars(ap.parse_args())
    kw = {f.name: _coerce(f.type, ns[f.name]) for f in dataclasses.fields(cls) if ns[f.name] is not None}
    return cls(**kw)


def write_json(obj, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return path
