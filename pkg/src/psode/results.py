"""CSV persistence of run records.

One record per line; target hitting times go in ``hit_1e<k>`` columns and an
empty field means the target was never reached.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

from .bench import TARGET_EXPONENTS, RunRecord

HIT_COLUMNS = [f"hit_1e{k}" for k in TARGET_EXPONENTS]
COLUMNS = ["instance", "function_id", "dim", "run_index", "seed",
           "total_evals", "final_best"] + HIT_COLUMNS


def results_filename(function_id: int, dim: int) -> str:
    return f"f{function_id:02d}_d{dim}.csv"


def record_to_row(rec: RunRecord) -> list[str]:
    row = [rec.instance, str(rec.function_id), str(rec.dim), str(rec.run_index),
           str(rec.seed), str(rec.total_evals), repr(float(rec.final_best))]
    return row + ["" if h is None else str(h) for h in rec.hits]


def row_to_record(row: dict) -> RunRecord:
    return RunRecord(
        instance=row["instance"],
        function_id=int(row["function_id"]),
        dim=int(row["dim"]),
        run_index=int(row["run_index"]),
        seed=int(row["seed"]),
        hits=[int(row[c]) if row[c] else None for c in HIT_COLUMNS],
        total_evals=int(row["total_evals"]),
        final_best=float(row["final_best"]),
    )


def format_records(records, header: bool = True) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if header:
        writer.writerow(COLUMNS)
    writer.writerows(record_to_row(r) for r in records)
    return buf.getvalue()


def write_records(path, records) -> None:
    Path(path).write_text(format_records(records))


def read_records(path) -> list[RunRecord]:
    with open(path, newline="") as fh:
        return [row_to_record(row) for row in csv.DictReader(fh)]


def read_results_dir(path) -> list[RunRecord]:
    records = []
    for file in sorted(Path(path).glob("f*_d*.csv")):
        records.extend(read_records(file))
    return records
