"""Run configuration: one INI section ``[run]`` of ``key = value`` lines.

Keys and defaults are those of :class:`RunConfig`; unknown keys are
rejected.  Strings are stored verbatim, floats with ``repr`` and tuples as
comma-separated lists, so ``RunConfig.from_text(cfg.to_text()) == cfg``
and the canonical text reproduces byte for byte.
"""
from __future__ import annotations

import configparser
import dataclasses
import io
from dataclasses import dataclass, fields

from .errors import ParamError

SECTION = "run"


@dataclass(frozen=True)
class RunConfig:
    # map: a catalogue family, or "custom" with expression strings
    family: str = "catenoid_exp"
    c: float = 60.0
    t: float = 1.0
    eps: float = 0.05
    p_kind: str = "nehari2"
    h: str = ""
    g: str = ""
    q: str = ""
    q_inv: str = ""
    # Nehari weight: catalogue key, "t*key" or an expression in x
    p: str = "pi2over4"
    # polar grid (radius is a fraction of the unit disk)
    nr: int = 60
    ntheta: int = 60
    rmax: float = 0.95
    tol: float = 1e-9
    # injectivity scan
    scan_n: int = 20000
    scan_rmax: float = 0.999
    sep: float = 0.1
    # extremal profile
    profile_rmax: float = 0.9999
    profile_n: int = 2001
    # convexity audits
    angles: tuple = (0.0, 0.7853981633974483, 1.5707963267948966, 2.356194490192345,
                     3.141592653589793, 3.9269908169872414, 4.71238898038469, 5.497787143782138)
    convexity_n: int = 400
    convexity_rtop: float = 0.95
    # outputs ("" means stdout only / not written)
    json_out: str = ""
    csv_out: str = ""
    mesh_out: str = ""
    seed: int = 0
    threads: int = 1

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def to_text(self) -> str:
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        parser[SECTION] = {f.name: _format(getattr(self, f.name)) for f in fields(self)}
        buf = io.StringIO()
        parser.write(buf)
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ParamError(f"malformed configuration: {exc}") from exc
        if SECTION not in parser:
            raise ParamError(f"configuration needs a [{SECTION}] section")
        known = {f.name: f for f in fields(cls)}
        values = {}
        for key, raw in parser[SECTION].items():
            if key not in known:
                raise ParamError(f"unknown configuration key {key!r}")
            values[key] = _parse(raw, type(known[key].default), key)
        return cls(**values)

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_text())

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())


def _format(value):
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse(raw, kind, key):
    try:
        if kind is tuple:
            return tuple(float(v) for v in raw.split(",") if v.strip())
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
    except ValueError as exc:
        raise ParamError(f"bad value for {key}: {raw!r}") from exc
    return raw
