"""Flat key=value experiment configuration for the bench command.

A config file is plain text: one ``key = value`` pair per line, ``#`` starts
a comment, blank lines are ignored.  Keys mirror the runner options (see each
runner's docstring for its schema).  A config plus a master seed determines
every output byte of a run, up to floating-point reassociation.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

__all__ = ["BenchError", "ExperimentConfig", "parse_config"]

SUBCOMMANDS = ("optimize", "lpreg", "vmv", "scores")

_TRUE = {"true", "1", "yes", "on"}
_FALSE = {"false", "0", "no", "off"}


class BenchError(Exception):
    """Operational failure with a machine-parsable code.

    The CLI renders these as one line: ``ERROR <code>: <message>`` and exits
    nonzero.  Codes: CONFIG_NOT_FOUND, CONFIG_PARSE, CONFIG_INVALID,
    DATASET_NOT_FOUND, DATASET_PARSE, RUN_FAILED.
    """

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


@dataclass
class ExperimentConfig:
    """A subcommand plus its flat string options.

    Typed accessors validate on demand and raise ``BenchError`` with code
    CONFIG_INVALID on malformed values, so every config mistake surfaces as a
    clean CLI error rather than a traceback.
    """

    subcommand: str
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise BenchError(
                "CONFIG_INVALID",
                f"unknown subcommand {self.subcommand!r}; "
                f"expected one of {', '.join(SUBCOMMANDS)}")

    # -- typed accessors ----------------------------------------------------

    def get_str(self, key, default=None, required=False):
        if key in self.options:
            return self.options[key].strip()
        if required:
            raise BenchError("CONFIG_INVALID", f"missing required key {key!r}")
        return default

    def get_int(self, key, default=None, required=False):
        raw = self.get_str(key, None, required)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            raise BenchError("CONFIG_INVALID",
                             f"key {key!r}: expected an integer, got {raw!r}")

    def get_float(self, key, default=None, required=False):
        raw = self.get_str(key, None, required)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            raise BenchError("CONFIG_INVALID",
                             f"key {key!r}: expected a number, got {raw!r}")

    def get_bool(self, key, default=False):
        raw = self.get_str(key)
        if raw is None:
            return default
        low = raw.lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise BenchError("CONFIG_INVALID",
                         f"key {key!r}: expected true/false, got {raw!r}")

    def get_list(self, key, default=None, required=False):
        raw = self.get_str(key, None, required)
        if raw is None:
            return list(default) if default is not None else None
        items = [s.strip() for s in raw.split(",") if s.strip()]
        if not items:
            raise BenchError("CONFIG_INVALID", f"key {key!r}: empty list")
        return items

    def get_int_list(self, key, default=None, required=False):
        items = self.get_list(key, None, required)
        if items is None:
            return list(default) if default is not None else None
        try:
            return [int(s) for s in items]
        except ValueError:
            raise BenchError("CONFIG_INVALID",
                             f"key {key!r}: expected a comma list of integers")

    # -- fields shared across runners ----------------------------------------

    @property
    def out(self) -> str:
        return self.get_str("out", "bench_out")

    @property
    def seed(self) -> int:
        return self.get_int("seed", 0)

    @property
    def seeds(self) -> int:
        n = self.get_int("seeds", 1)
        if n < 1:
            raise BenchError("CONFIG_INVALID", "key 'seeds': must be >= 1")
        return n

    @property
    def svg(self) -> bool:
        return self.get_bool("svg", False)

    @property
    def workers(self) -> int:
        n = self.get_int("workers", 0)
        return n if n and n > 0 else min(4, os.cpu_count() or 1)

    @property
    def dataset(self) -> str:
        return self.get_str("dataset", required=True)

    @property
    def loss(self) -> str:
        return self.get_str("loss", "nlls_classification")

    @property
    def lambda_policy(self) -> str:
        policy = self.get_str("lambda_policy", "manual")
        if policy not in ("manual", "convex_auto"):
            raise BenchError(
                "CONFIG_INVALID",
                f"key 'lambda_policy': expected manual or convex_auto, "
                f"got {policy!r}")
        return policy

    @property
    def schemes(self) -> list:
        return self.get_list("schemes", default=["full"])

    def to_text(self) -> str:
        """Serialize back to the flat key=value format (sorted keys)."""
        lines = [f"subcommand = {self.subcommand}"]
        for key in sorted(self.options):
            lines.append(f"{key} = {self.options[key]}")
        return "\n".join(lines) + "\n"


def parse_config(path, subcommand=None) -> ExperimentConfig:
    """Read a flat key=value config file.

    ``subcommand`` (from the CLI) wins; a ``subcommand`` key inside the file
    is allowed but must agree with it.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except FileNotFoundError:
        raise BenchError("CONFIG_NOT_FOUND", f"config file not found: {path}")
    except OSError as exc:
        raise BenchError("CONFIG_NOT_FOUND", f"cannot read {path}: {exc}")

    options = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise BenchError(
                "CONFIG_PARSE",
                f"{path}: line {lineno}: expected 'key = value', "
                f"got {stripped!r}")
        key, value = stripped.split("=", 1)
        key = key.strip()
        if not key:
            raise BenchError("CONFIG_PARSE",
                             f"{path}: line {lineno}: empty key")
        options[key] = value.strip()

    stated = options.pop("subcommand", None)
    if subcommand is None:
        subcommand = stated
    elif stated is not None and stated != subcommand:
        raise BenchError(
            "CONFIG_INVALID",
            f"config states subcommand {stated!r} but {subcommand!r} was "
            f"requested")
    if subcommand is None:
        raise BenchError("CONFIG_INVALID",
                         "no subcommand given on the command line or in the "
                         "config file")
    return ExperimentConfig(subcommand=subcommand, options=options)
