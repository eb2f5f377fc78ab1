"""Batch exploration of parameter space: stability-region mapping.

A sweep takes a base scenario config and a list of axes (dotted parameter
path, list of values), runs every grid point, and classifies each by
certificate validity and fitted decay.  Failed runs are data, not errors:
the point of the sweep includes mapping where the scheme or certificate
breaks.
"""

from __future__ import annotations

import copy
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .diagnostics import fit_decay_rate
from .errors import DivergenceError, InsufficientDataError, PiezobeamError, SweepSpecError
from .scenario import Scenario
from .solver import run

SWEEP_DEFAULT_N = 101
SWEEP_DEFAULT_HORIZON = 20.0


@dataclass(frozen=True)
class SweepSpec:
    base: dict  # scenario config dict
    axes: tuple  # ((dotted path, (values...)), ...)
    n: int = SWEEP_DEFAULT_N
    horizon: float = SWEEP_DEFAULT_HORIZON
    workers: int = 1

    def __post_init__(self):
        if not self.axes:
            raise SweepSpecError("sweep needs at least one axis")
        for path, values in self.axes:
            if not len(values):
                raise SweepSpecError(f"axis {path!r} has no values")

    @property
    def size(self):
        return math.prod(len(v) for _, v in self.axes)

    @staticmethod
    def from_dict(cfg):
        try:
            base = cfg["base"]
            axes = tuple((a["path"], tuple(a["values"])) for a in cfg["axes"])
        except (KeyError, TypeError) as exc:
            raise SweepSpecError(f"malformed sweep config: {exc}") from exc
        return SweepSpec(
            base=base, axes=axes,
            n=cfg.get("n", SWEEP_DEFAULT_N),
            horizon=cfg.get("horizon_s", SWEEP_DEFAULT_HORIZON),
            workers=cfg.get("workers", 1),
        )


@dataclass
class SweepRecord:
    values: tuple
    valid: bool
    violated: list = field(default_factory=list)
    h2: float = math.nan
    r_squared: float = math.nan
    energy_ratio: float = math.nan
    status: str = "ok"


def _set_path(cfg, path, value):
    parts = path.split(".")
    node = cfg
    for key in parts[:-1]:
        if not isinstance(node, dict) or key not in node:
            raise SweepSpecError(f"parameter path {path!r} does not resolve "
                                 f"in the base scenario (missing {key!r})")
        node = node[key]
    if not isinstance(node, dict) or parts[-1] not in node:
        raise SweepSpecError(f"parameter path {path!r} does not resolve "
                             f"in the base scenario (missing {parts[-1]!r})")
    node[parts[-1]] = value


def expand(spec):
    """Cartesian product of the axes in deterministic lexicographic order."""
    scenarios = []
    for combo in itertools.product(*(values for _, values in spec.axes)):
        cfg = copy.deepcopy(spec.base)
        for (path, _), value in zip(spec.axes, combo):
            _set_path(cfg, path, value)
        cfg.setdefault("numerics", {})
        cfg["numerics"]["n"] = spec.n
        cfg["numerics"]["horizon_s"] = spec.horizon
        scenarios.append((combo, cfg))
    return scenarios


def _run_one(item):
    combo, cfg = item
    try:
        scenario = Scenario.from_dict(cfg)
        certificate = scenario.build_certificate()
    except PiezobeamError as exc:
        return SweepRecord(combo, False, [str(exc)], status="infeasible")
    if not certificate.valid:
        return SweepRecord(combo, False, list(certificate.diagnostics),
                           status="infeasible")
    try:
        traj = run(scenario, collect_fields=False)
    except DivergenceError:
        return SweepRecord(combo, True, status="diverged")
    rec = SweepRecord(combo, True)
    e0 = traj.records[0].energy.total
    e_end = traj.records[-1].energy.total
    rec.energy_ratio = e_end / e0 if e0 > 0 else math.nan
    try:
        fit = fit_decay_rate(traj)
        rec.h2 = fit.h2
        rec.r_squared = fit.r_squared
    except InsufficientDataError:
        pass
    return rec


def execute(spec):
    """Run every grid point; aggregate order matches expansion order."""
    items = expand(spec)
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            return list(pool.map(_run_one, items))
    return [_run_one(item) for item in items]
