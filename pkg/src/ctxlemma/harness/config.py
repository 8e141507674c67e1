"""Flat ``key=value`` config files whose keys double as command-line flags.

Blank lines and ``#`` comments are ignored. Every key may be given on the
command line as ``--<key> VALUE``, which overrides the file.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass
from typing import Any, Callable


def parse_bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_list(text: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in str(text).split(",") if p.strip())


@dataclass(frozen=True)
class Key:
    name: str
    type: Callable[[str], Any]
    default: Any
    help: str


TRAIN_KEYS = [
    Key("d", int, 32, "character embedding size"),
    Key("h", int, 64, "hidden size of encoder and decoder"),
    Key("learning_rate", float, 0.005, "Adam step size"),
    Key("beta1", float, 0.9, "Adam first-moment decay"),
    Key("beta2", float, 0.999, "Adam second-moment decay"),
    Key("epsilon", float, 1e-8, "Adam denominator epsilon"),
    Key("batch_size", int, 16, "examples per update"),
    Key("epochs", int, 30, "passes over the training set"),
    Key("gradient_clip_norm", float, 5.0, "global gradient norm cap"),
    Key("max_decode_len_factor", float, 2.0, "decode cap = factor * phrase length + 8"),
    Key("max_span", int, 64, "context words extracted on each side"),
]

SWEEP_KEYS = [
    Key("train", str, None, "training corpus file"),
    Key("dev", str, None, "development corpus file (model selection)"),
    Key("test", str, None, "test corpus file"),
    Key("models", parse_list, ("identity", "lexicon", "edit_tree", "seq2seq"), "comma-separated models"),
    Key("train_policy", str, "variable", "seq2seq training context: none | <k> | variable[:p:kmin:kmax]"),
    Key("eval_contexts", parse_list, ("none", "8", "16", "32", "64", "variable"), "comma-separated eval contexts"),
    Key("output", str, None, "output directory"),
    Key("seed", int, None, "random seed (required)"),
    Key("format", str, "csv", "report table format: csv | tsv | markdown"),
    Key("figures", parse_bool, True, "render score-vs-context PNG figures"),
] + TRAIN_KEYS

TRAIN_CMD_KEYS = [
    Key("train", str, None, "training corpus file"),
    Key("dev", str, None, "development corpus file"),
    Key("train_policy", str, "none", "training context policy"),
    Key("output", str, None, "output directory for checkpoint, vocab and log"),
    Key("seed", int, None, "random seed (required)"),
] + TRAIN_KEYS

TOY_KEYS = [
    Key("output", str, None, "output directory"),
    Key("n_train", int, 1000, "training samples"),
    Key("n_dev", int, 200, "development samples"),
    Key("n_test", int, 200, "test samples"),
    Key("ambiguous_fraction", float, 0.3, "fraction of trigger-dependent samples"),
    Key("n_stems", int, 60, "size of the stem inventory"),
    Key("held_out_stems", parse_bool, False, "use disjoint stems per split"),
    Key("proper_fraction", float, 0.1, "fraction of capitalised stems"),
    Key("seed", int, 7, "generator seed"),
]


def read_config(path) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key = key.strip()
            if key in out:
                raise ValueError(f"{path}:{lineno}: duplicate key {key!r}")
            out[key] = value.strip()
    return out


def add_key_flags(parser: argparse.ArgumentParser, keys: list[Key]) -> None:
    parser.add_argument("--config", help="flat key=value config file")
    for k in keys:
        default = ",".join(k.default) if isinstance(k.default, tuple) else k.default
        parser.add_argument(f"--{k.name}", default=None, metavar=k.name.upper(),
                            help=f"{k.help} (default: {default})")


def resolve(args: argparse.Namespace, keys: list[Key], required: tuple[str, ...] = ()) -> dict[str, Any]:
    """Merge defaults < config file < flags and convert values."""
    known = {k.name: k for k in keys}
    raw: dict[str, Any] = {}
    if getattr(args, "config", None):
        for key, value in read_config(args.config).items():
            if key not in known:
                raise ValueError(f"unknown config key {key!r}")
            raw[key] = value
    for name in known:
        value = getattr(args, name, None)
        if value is not None:
            raw[name] = value
    out = {}
    for name, k in known.items():
        if name in raw:
            try:
                out[name] = k.type(raw[name])
            except ValueError as exc:
                raise ValueError(f"bad value for {name}: {exc}") from None
        else:
            out[name] = k.default
    missing = [n for n in required if out.get(n) is None]
    if missing:
        raise ValueError("missing required setting(s): " + ", ".join("--" + m for m in missing))
    return out
