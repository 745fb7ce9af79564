"""Deterministic CSV/JSON writers: rerunning a study from the same config
and master seed must reproduce every output byte for byte."""

import csv
import json
import os

import numpy as np


def fmt(x):
    """Shortest round-trip decimal form of a float (repr-stable)."""
    return format(float(x), ".17g")


def write_csv(path, header, rows):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [fmt(v) if isinstance(v, (float, np.floating)) else v for v in row]
            )
    return path


def write_json(path, obj):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return path
