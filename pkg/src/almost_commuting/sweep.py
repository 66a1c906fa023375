"""Epsilon-delta sweep experiments over seeded structured ensembles."""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .ensembles import (
    CONTRACTION_KINDS,
    EnsembleSpec,
    almost_normal,
    commuting_pair,
    derive_seed,
    perturb,
)
from .indices import bott_trace_log, bott_winding
from .solvers import PAIR_KINDS, SolverParams, commuting_approximation, nearest_normal
from .structures import StructureKind, commutator_norm, self_commutator_norm

CSV_HEADER = ["dim", "kind", "target_delta", "measured_delta", "epsilon", "residual",
              "status", "winding", "trace_log", "seed", "wall_time_ms"]


@dataclass(frozen=True)
class SweepSpec:
    dims: list
    kinds: list
    deltas: list
    trials: int = 1
    base_seed: int = 0
    output_path: str = "sweep.csv"

    def __post_init__(self):
        object.__setattr__(self, "dims", [int(d) for d in self.dims])
        object.__setattr__(self, "kinds", [StructureKind.parse(k) for k in self.kinds])
        object.__setattr__(self, "deltas", [float(d) for d in self.deltas])
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if any(d <= 0 for d in self.deltas):
            raise ValueError("deltas must be strictly positive")
        if any(a <= b for a, b in zip(self.deltas, self.deltas[1:])):
            raise ValueError("deltas must be sorted strictly descending")
        for k in self.kinds:
            if k not in PAIR_KINDS and k not in CONTRACTION_KINDS:
                raise ValueError(f"sweeps do not support {k.value}")

    @classmethod
    def from_dict(cls, d: dict) -> "SweepSpec":
        allowed = {"dims", "kinds", "deltas", "trials", "base_seed", "output_path"}
        unknown = set(d) - allowed
        if unknown:
            raise ValueError(f"unknown sweep spec fields: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "SweepSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def tasks(self):
        """Trial coordinates in output order: (dim, kind, delta, trial)."""
        for dim in self.dims:
            for ki, kind in enumerate(self.kinds):
                for di, delta in enumerate(self.deltas):
                    for trial in range(self.trials):
                        seed = derive_seed(self.base_seed, dim, ki, di, trial)
                        yield dim, kind, delta, seed


@dataclass
class SweepRecord:
    dim: int
    kind: StructureKind
    target_delta: float
    measured_delta: float
    epsilon: float | None
    residual: float | None
    status: str
    winding: int | None
    trace_log: float | None
    seed: int
    wall_time_ms: float = 0.0

    def row(self) -> list:
        return [str(self.dim), self.kind.value, _num(self.target_delta),
                _num(self.measured_delta), _num(self.epsilon), _num(self.residual),
                self.status, "" if self.winding is None else str(self.winding),
                _num(self.trace_log), str(self.seed), _num(self.wall_time_ms)]


def _num(x) -> str:
    return "" if x is None else f"{x:.17g}"


def _perturbed_pair(dim, kind, target, seed, max_eta=0.5):
    """Commuting pair perturbed so that its commutator lands near ``target``.

    The perturbation directions are fixed by the seed, and the commutator
    is close to linear in the amplitude, so two secant corrections suffice.
    """
    U0, V0 = commuting_pair(EnsembleSpec(dim, kind, seed=derive_seed(seed, 0)))
    su, sv = derive_seed(seed, 1), derive_seed(seed, 2)
    eta = min(target / 2, max_eta)
    for _ in range(3):
        U, V = perturb(U0, eta, su), perturb(V0, eta, sv)
        measured = commutator_norm(U.entries, V.entries)
        if measured <= 0:
            break
        eta = min(eta * target / measured, max_eta)
    return U, V, measured


def run_trial(dim, kind, target, seed, params=SolverParams(), timing=False) -> SweepRecord:
    start = time.perf_counter()
    winding = trace_log = None
    epsilon = residual = None
    if kind in PAIR_KINDS:
        U, V, measured = _perturbed_pair(dim, kind, target, seed)
        try:
            winding = bott_winding(U.entries, V.entries).winding
            trace_log = bott_trace_log(U.entries, V.entries)
        except ValueError:
            pass
        try:
            res = commuting_approximation(U, V, params)
        except ValueError:
            res = None
    else:
        X = almost_normal(dim, target, kind, seed)
        measured = self_commutator_norm(X.entries)
        try:
            res = nearest_normal(X, params)
        except ValueError:
            res = None
    if res is None:
        status = "Failed"
    else:
        status, epsilon, residual = res.status.value, res.epsilon, res.residual
    wall = (time.perf_counter() - start) * 1e3 if timing else 0.0
    return SweepRecord(dim, kind, target, measured, epsilon, residual, status,
                       winding, trace_log, seed, wall)


def _run_task(args):
    return run_trial(*args)


def run_sweep(spec: SweepSpec, jobs: int = 1, timing: bool = False,
              params: SolverParams = SolverParams()) -> list:
    """Every trial of the grid, returned in (dim, kind, delta, trial) order."""
    tasks = [(dim, kind, delta, seed, params, timing) for dim, kind, delta, seed in spec.tasks()]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_task, tasks))
    return [_run_task(t) for t in tasks]


def records_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow(r.row())
    return buf.getvalue()


def summarize(records) -> dict:
    """Per-cell convergence rate and epsilon statistics plus the epsilon(delta) table."""
    cells = {}
    for r in records:
        cells.setdefault((r.dim, r.kind.value, r.target_delta), []).append(r)
    out_cells = []
    table = {}
    for (dim, kind, target), rows in cells.items():
        eps = [r.epsilon for r in rows if r.status == "Converged" and r.epsilon is not None]
        conv = sum(r.status == "Converged" for r in rows)
        cell = {
            "dim": dim,
            "kind": kind,
            "target_delta": target,
            "trials": len(rows),
            "convergence_rate": conv / len(rows),
            "median_measured_delta": float(np.median([r.measured_delta for r in rows])),
            "median_epsilon": float(np.median(eps)) if eps else None,
            "max_epsilon": float(np.max(eps)) if eps else None,
        }
        out_cells.append(cell)
        table.setdefault(f"{kind}/{dim}", []).append([target, cell["median_epsilon"]])
    return {"cells": out_cells, "epsilon_delta_table": table}


def format_summary(summary: dict) -> str:
    return json.dumps(summary, indent=2, sort_keys=True) + "\n"
