"""CSV ingestion."""
import csv
import math

import numpy as np

from .errors import IngestionError
from .models import DataMatrix


def load_csv(path, has_header=False, group_label=1) -> DataMatrix:
    """Read observations (rows) by variables (columns) from a CSV file.

    Error locations are 1-based file line and column numbers.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [(num, row) for num, row in enumerate(csv.reader(fh), start=1)
                    if any(cell.strip() for cell in row)]
    except OSError as exc:
        raise IngestionError(f"cannot read {path}: {exc.strerror}") from None

    names = None
    if has_header:
        if not rows:
            raise IngestionError(f"{path} is empty")
        names = tuple(cell.strip() for cell in rows[0][1])
        rows = rows[1:]
    if not rows:
        raise IngestionError(f"{path} has no data rows")

    width = len(rows[0][1]) if names is None else len(names)
    values = np.empty((len(rows), width))
    for r, (num, row) in enumerate(rows):
        if len(row) != width:
            raise IngestionError(f"expected {width} fields, found {len(row)}", row=num)
        for c, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                raise IngestionError(f"non-numeric cell {cell.strip()!r}", row=num, col=c + 1) from None
            if not math.isfinite(v):
                raise IngestionError("non-finite cell", row=num, col=c + 1)
            values[r, c] = v
    if values.shape[0] < 2 or values.shape[1] < 2:
        raise IngestionError(f"need at least 2 rows and 2 columns, got {values.shape[0]}x{values.shape[1]}")
    return DataMatrix(values, group_label=group_label, names=names)
