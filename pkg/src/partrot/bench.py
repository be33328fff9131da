"""Benchmark suites.

* ``scaling``: group-size sweep n_max in {1, 2, 3}, first order, 10 steps,
  merging and shuffling off, spin models on 10 qubits.
* ``target``: smallest step count reaching a spectral error target, kernpiler
  against the naive baselines, on Heisenberg 10x1 and Ising 5x2 triangular.
* ``large``: gate counts only for 50 and 100 qubit spin models, 3 steps.
"""
from __future__ import annotations

import csv
import io
import time
from dataclasses import replace
from typing import Optional

from .compiler import CompileOptions, compile_hamiltonian, make_report, minimal_steps, circuit_errors
from .mcts import SynthCache, SynthConfig
from .models import GridSpec, build_model
from .pauli import Hamiltonian

SPIN_MODELS_10 = [
    ("ising", GridSpec(10, 1, "line")),
    ("ising", GridSpec(5, 2, "square")),
    ("ising", GridSpec(5, 2, "triangular")),
    ("heisenberg", GridSpec(10, 1, "line")),
    ("heisenberg", GridSpec(5, 2, "square")),
    ("heisenberg", GridSpec(5, 2, "triangular")),
]
TARGET_MODELS = [("heisenberg", GridSpec(10, 1, "line")), ("ising", GridSpec(5, 2, "triangular"))]
LARGE_MODELS = [
    ("ising", GridSpec(50, 1, "line")),
    ("heisenberg", GridSpec(50, 1, "line")),
    ("ising", GridSpec(10, 10, "square")),
    ("heisenberg", GridSpec(10, 10, "square")),
]


def _label(model: str, g: GridSpec) -> str:
    return f"{model}-{g.rows}x{g.cols}-{g.topology}"


def _row(name: str, h: Hamiltonian, opts: CompileOptions, cache: SynthCache, with_errors: bool = True) -> dict:
    t0 = time.perf_counter()
    res = compile_hamiltonian(h, opts, cache)
    errors = circuit_errors(res.circuit, h, opts.time) if with_errors else (None, None)
    rep = make_report(h, res, (time.perf_counter() - t0) * 1000, errors)
    rep["model"] = name
    return rep


def scaling_rows(
    models=None,
    group_sizes=(1, 2, 3),
    seeds: int = 5,
    seed: int = 0,
    time_: float = 1.0,
    steps: int = 10,
    cache: Optional[SynthCache] = None,
    deterministic: bool = False,
    iterations: int = SynthConfig.iterations,
) -> list[dict]:
    cache = cache if cache is not None else SynthCache()
    rows = []
    for model, g in models or SPIN_MODELS_10:
        h = build_model(model, g)
        for n_max in group_sizes:
            for s in range(seeds):
                opts = CompileOptions(
                    "kernpiler", time_, steps, 1, n_max, seed + s, deterministic, merge=False, shuffle=False,
                    synth=SynthConfig(iterations=iterations),
                )
                rows.append(_row(_label(model, g), h, opts, cache))
    return rows


def target_rows(
    models=None,
    target_error: float = 0.07,
    time_: float = 1.0,
    seed: int = 0,
    cache: Optional[SynthCache] = None,
    deterministic: bool = False,
    iterations: int = SynthConfig.iterations,
    methods=(("kernpiler", 1), ("naive1", 1), ("naive2", 2)),
) -> list[dict]:
    cache = cache if cache is not None else SynthCache()
    rows = []
    for model, g in models or TARGET_MODELS:
        h = build_model(model, g)
        for method, order in methods:
            opts = CompileOptions(method, time_, 1, order, 3, seed, deterministic, synth=SynthConfig(iterations=iterations))
            opts = replace(opts, steps=minimal_steps(h, opts, target_error))
            while True:
                rep = _row(_label(model, g), h, opts, cache)
                if rep["spectral_error"] <= target_error:
                    break
                opts = replace(opts, steps=opts.steps + 1)
            rep["target_error"] = target_error
            rows.append(rep)
    return rows


def large_rows(
    models=None,
    steps: int = 3,
    time_: float = 1.0,
    seed: int = 0,
    cache: Optional[SynthCache] = None,
    deterministic: bool = False,
    iterations: int = SynthConfig.iterations,
) -> list[dict]:
    cache = cache if cache is not None else SynthCache()
    rows = []
    for model, g in models or LARGE_MODELS:
        h = build_model(model, g)
        for method, order in (("kernpiler", 1), ("naive1", 1)):
            opts = CompileOptions(method, time_, steps, order, 3, seed, deterministic, synth=SynthConfig(iterations=iterations))
            rows.append(_row(_label(model, g), h, opts, cache, with_errors=False))
    return rows


def run_suite(suite: str, seeds: int = 5, seed: int = 0, target_error: float = 0.07, cache=None, deterministic=False, iterations=SynthConfig.iterations) -> list[dict]:
    kw = dict(seed=seed, cache=cache, deterministic=deterministic, iterations=iterations)
    rows: list[dict] = []
    if suite in ("scaling", "all"):
        rows += scaling_rows(seeds=seeds, **kw)
    if suite in ("target", "all"):
        rows += target_rows(target_error=target_error, **kw)
    if suite in ("large", "all"):
        rows += large_rows(**kw)
    return rows


CSV_FIELDS = [
    "model", "method", "num_qubits", "n_max", "order", "steps", "t", "seed",
    "cnot_count", "u3_count", "depth", "spectral_error", "frobenius_error", "wall_time_ms",
]


def to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()
