"""Grid runs over instances x functions x dimensions, with resumable output."""

from __future__ import annotations

import csv
import json
import os
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from ._validation import check_positive_int
from .bench import FUNCTION_IDS, RunRecord, get_function, hitting_times, targets
from .core import InvalidConfig, derive_seed
from .engine import DE, HYBRID, PSO, enumerate_instances, parse_name, run
from .results import COLUMNS, format_records, read_records, results_filename, row_to_record

MANIFEST = "manifest.json"
KIND_NAMES = {"pso": PSO, "de": DE, "hybrid": HYBRID}
# settings that must match before results in an existing directory are reused
_RESULT_KEYS = ("master_seed", "budget_multiplier", "pop_multiplier")


@dataclass
class SweepConfig:
    instances: list | str = "all"
    functions: list | str = "all"
    dims: list = field(default_factory=lambda: [5, 20])
    runs: int = 30
    master_seed: int = 0
    budget_multiplier: int = 10_000
    pop_multiplier: int = 5
    out_dir: str = "results"
    kinds: list = field(default_factory=lambda: ["pso", "de", "hybrid"])

    def __post_init__(self):
        check_positive_int(self.runs, "runs")
        check_positive_int(self.budget_multiplier, "budget_multiplier")
        check_positive_int(self.pop_multiplier, "pop_multiplier")
        check_positive_int(self.master_seed, "master_seed", 0)
        for d in self.dims:
            check_positive_int(d, "dim", 2)
        unknown = set(self.kinds) - set(KIND_NAMES)
        if unknown:
            raise InvalidConfig(f"unknown instance kinds {sorted(unknown)}")
        self.instance_names()  # every name must parse
        self.function_ids()

    @classmethod
    def load(cls, path, **overrides) -> "SweepConfig":
        data = yaml.safe_load(Path(path).read_text()) or {}
        if not isinstance(data, dict):
            raise InvalidConfig(f"{path}: config must be a mapping")
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidConfig(f"{path}: unknown config keys {sorted(unknown)}")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)

    def instance_names(self) -> list[str]:
        if self.instances == "all" or self.instances == ["all"]:
            kinds = tuple(KIND_NAMES[k] for k in self.kinds)
            return [s.name for s in enumerate_instances(kinds)]
        return [parse_name(name, extended=True).name for name in self.instances]

    def function_ids(self) -> list[int]:
        if self.functions == "all" or self.functions == ["all"]:
            return list(FUNCTION_IDS)
        ids = [int(f) for f in self.functions]
        bad = [f for f in ids if f not in FUNCTION_IDS]
        if bad:
            raise InvalidConfig(f"unknown function ids {bad}")
        return ids


def execute_task(task) -> RunRecord:
    """Run one (instance, function, dim, run) tuple and summarise its hits."""
    instance, fid, dim, run_index, seed, budget_mult, pop_mult = task
    fn = get_function(fid, dim)
    tv = targets(fn.f_opt)
    result = run(instance, fn.problem(), M=max(5, pop_mult * dim),
                 max_evals=budget_mult * dim, seed=seed, stop_fitness=tv[-1])
    return RunRecord(instance, fid, dim, run_index, seed,
                     hits=hitting_times(result.history, tv),
                     total_evals=result.n_evals, final_best=result.best_f)


def _manifest(config: SweepConfig, files: dict) -> dict:
    return {
        "config": asdict(config),
        "versions": {"psode": __version__, "numpy": np.__version__,
                     "python": platform.python_version()},
        "files": files,
    }


def _read_partial(path: Path) -> list[RunRecord]:
    """Records from an interrupted journal; an unterminated last line is dropped."""
    lines = path.read_text().split("\n")[:-1]
    return [row_to_record(dict(zip(COLUMNS, values)))
            for values in csv.reader(lines) if len(values) == len(COLUMNS)]


def run_sweep(config: SweepConfig, workers: int = 1, log=None) -> Path:
    """Execute every missing run of ``config``; returns the output directory.

    Each (function, dim) pair gets its own CSV. Finished runs are appended to
    a ``.part`` journal first, so an interrupted sweep resumes where it
    stopped; the final file is sorted by (instance, run) and therefore
    identical for any number of workers.
    """
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest_path = out / MANIFEST
    files = {}
    if manifest_path.exists():
        old = json.loads(manifest_path.read_text())
        for key in _RESULT_KEYS:
            if old["config"].get(key) != getattr(config, key):
                raise InvalidConfig(f"{out} holds results for a different {key}")
        files = old.get("files", {})

    names = config.instance_names()
    for fid in config.function_ids():
        for dim in config.dims:
            fname = results_filename(fid, dim)
            final, part = out / fname, out / (fname + ".part")
            done = {}
            for source in (final, part):
                if source.exists():
                    loader = read_records if source is final else _read_partial
                    done.update({r.key(): r for r in loader(source)})
            tasks = [(name, fid, dim, r, derive_seed(config.master_seed, name, fid, dim, r),
                      config.budget_multiplier, config.pop_multiplier)
                     for name in names for r in range(config.runs)
                     if (name, fid, dim, r) not in done]
            if log and tasks:
                log(f"{fname}: {len(tasks)} runs to do")
            files[fname] = "partial"
            manifest_path.write_text(json.dumps(_manifest(config, files), indent=2))
            with open(part, "a") as journal:
                for rec in _map(execute_task, tasks, workers):
                    journal.write(format_records([rec], header=False))
                    journal.flush()
                    done[rec.key()] = rec
            records = sorted(done.values(), key=lambda r: (r.instance, r.run_index))
            final.write_text(format_records(records))
            part.unlink()
            files[fname] = "complete"
    manifest_path.write_text(json.dumps(_manifest(config, files), indent=2))
    return out


def _map(fn, tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        yield from map(fn, tasks)
        return
    chunk = max(1, len(tasks) // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(fn, tasks, chunksize=chunk)


def default_workers() -> int:
    return os.cpu_count() or 1
