import csv
import io
from collections.abc import Iterable, Sequence
from pathlib import Path

TRACE_FIELDS = ["t", "l2", "V", "mode"]
SWEEP_FIELDS = ["period", "rate", "intercept", "residual"]


def fmt(value: object) -> str:
    """Format numbers with 17 significant digits; pass other values through."""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.17g}"
    return "" if value is None else str(value)


def rows_to_csv_bytes(fields: Sequence[str], rows: Iterable[dict]) -> bytes:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(fields), extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: fmt(v) for k, v in row.items()})
    return buf.getvalue().encode("utf-8")


def write_csv(path: Path, fields: Sequence[str], rows: Iterable[dict]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(rows_to_csv_bytes(fields, rows))
    return path
