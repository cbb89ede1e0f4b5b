"""Run configuration: a strict flat key = value text format.

Lines are `key = value`; blank lines and `#` comments are ignored.  Unknown
keys are rejected with their line number.  `echo_config` writes the canonical
form; load(echo(cfg)) reproduces the config field for field (floats are
printed with 17 significant digits).
"""

import os
from dataclasses import dataclass, fields

import numpy as np

from .errors import ConfigError
from .harness import INITIAL_DATA, SweepPlan
from .kinetic import RegimeTag, ScalingRegime, regime_for

_DEFAULT_OUT = os.environ.get("KINHYDRO_OUT_ROOT", "runs")


@dataclass
class RunConfig:
    regime: str = "stokes"
    eps_list: tuple = (0.4, 0.2, 0.1, 0.05)
    ma: float | None = None            # override; None = regime concretization
    n_per_axis: int = 12
    v_max: float = 6.0
    sphere_order: int = 6
    cells: tuple = (64,)
    t_final: float = 1.0
    dt: float = 0.01
    initial_data: str = "shear-mode"
    amplitude: float = 1.0
    out_dir: str = _DEFAULT_OUT
    nonlinear: str = "auto"            # auto | on | off
    n_samples: int = 5
    alpha: float = 0.5
    threads: int = 0
    seed: int = 0

    def validate(self):
        tag = RegimeTag(self.regime)
        if self.initial_data not in INITIAL_DATA:
            raise ConfigError(f"initial_data must be one of {INITIAL_DATA}")
        if self.nonlinear not in ("auto", "on", "off"):
            raise ConfigError("nonlinear must be auto, on, or off")
        # regime rules (Table-style constraints) checked before any compute
        for eps in self.eps_list:
            base = regime_for(tag, eps, self.alpha)
            if self.ma is not None:
                ScalingRegime(base.kn, base.sh, self.ma, tag, alpha=base.alpha)
        return self

    def to_plan(self):
        self.validate()
        nl = None if self.nonlinear == "auto" else (self.nonlinear == "on")
        return SweepPlan(
            regime_tag=RegimeTag(self.regime),
            eps_list=self.eps_list,
            n_per_axis=self.n_per_axis,
            v_max=self.v_max,
            sphere_order=self.sphere_order,
            cells=self.cells,
            t_final=self.t_final,
            dt=self.dt,
            initial_data=self.initial_data,
            amplitude=self.amplitude,
            out_dir=self.out_dir,
            nonlinear=nl,
            n_samples=self.n_samples,
            alpha=self.alpha,
            seed=self.seed,
        )


_PARSERS = {
    "regime": str,
    "eps_list": lambda s: tuple(float(x) for x in s.split(",") if x.strip()),
    "ma": lambda s: None if s == "none" else float(s),
    "n_per_axis": int,
    "v_max": float,
    "sphere_order": int,
    "cells": lambda s: tuple(int(x) for x in s.split("x")),
    "t_final": float,
    "dt": float,
    "initial_data": str,
    "amplitude": float,
    "out_dir": str,
    "nonlinear": str,
    "n_samples": int,
    "alpha": float,
    "threads": int,
    "seed": int,
}


def _format(key, value):
    if key == "eps_list":
        return ",".join(f"{v:.17g}" for v in value)
    if key == "cells":
        return "x".join(str(c) for c in value)
    if key == "ma":
        return "none" if value is None else f"{value:.17g}"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def load_config(path):
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    cfg = RunConfig()
    with open(path) as f:
        for ln, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{ln}: expected 'key = value', got {raw!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in _PARSERS:
                raise ConfigError(f"{path}:{ln}: unknown key '{key}'")
            try:
                setattr(cfg, key, _PARSERS[key](val))
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"{path}:{ln}: bad value for {key}: {exc}") from exc
    cfg.validate()
    return cfg


def echo_config(cfg, path):
    with open(path, "w") as f:
        f.write("# kinhydro run configuration (echo)\n")
        for fld in fields(cfg):
            f.write(f"{fld.name} = {_format(fld.name, getattr(cfg, fld.name))}\n")


def config_equal(a, b):
    for fld in fields(a):
        va, vb = getattr(a, fld.name), getattr(b, fld.name)
        if isinstance(va, tuple):
            if len(va) != len(vb) or any(x != y for x, y in zip(va, vb)):
                return False
        elif va != vb:
            return False
    return True
