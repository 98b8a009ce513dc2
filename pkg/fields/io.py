"""
Description: Field export and import. A field is written as ``<stem>.csv``
(one row per node: index per axis, re, im) next to ``<stem>.json`` holding
the grid metadata and support radius.
"""

import csv
import json
import logging
from pathlib import Path

import numpy as np

from orliczlab.exceptions import InputError

from .grid import Grid, GridField

logger = logging.getLogger(__name__)

AXIS_COLUMNS = ("i", "j")


def export_field(u, stem):
    """
    Writes the field to ``stem.csv`` and ``stem.json``.

    Returns:
        list: the two paths written.
    """
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    grid = u.grid
    csv_path = stem.with_suffix(".csv")
    json_path = stem.with_suffix(".json")

    with open(csv_path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow([*AXIS_COLUMNS[: grid.n], "re", "im"])
        for index in np.ndindex(grid.shape):
            value = u.values[index]
            writer.writerow([*index, repr(float(value.real)), repr(float(value.imag))])

    meta = {
        "grid": grid.as_dict(),
        "support_radius": u.support_radius,
        "label": u.label,
    }
    json_path.write_text(json.dumps(meta, indent=2) + "\n")
    logger.debug(f"Exported {u.label} to {csv_path}")
    return [csv_path, json_path]


def import_field(stem):
    """
    Reads a field written by ``export_field``.

    Raises:
        InputError: missing files, malformed rows or indices off the grid.
    """
    stem = Path(stem)
    try:
        meta = json.loads(stem.with_suffix(".json").read_text())
        grid = Grid(**meta["grid"])
    except (OSError, KeyError, TypeError, ValueError) as e:
        raise InputError(f"Cannot read field manifest for {stem}: {e}")

    values = np.zeros(grid.shape, dtype=complex)
    try:
        with open(stem.with_suffix(".csv"), newline="") as handle:
            reader = csv.DictReader(handle)
            for row in reader:
                index = tuple(int(row[c]) for c in AXIS_COLUMNS[: grid.n])
                values[index] = complex(float(row["re"]), float(row["im"]))
    except (OSError, KeyError, ValueError, IndexError) as e:
        raise InputError(f"Cannot read field values for {stem}: {e}")

    return GridField(grid, values, float(meta["support_radius"]), meta.get("label", stem.name))
