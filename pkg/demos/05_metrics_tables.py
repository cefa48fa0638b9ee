"""Macro metrics over confusion matrices, in both orientations.

Loads the two bundled 3-class evaluation matrices and prints full metric
tables. The matrices are stored rows=predicted / columns=actual (the
"paper" orientation, the transpose of the usual sklearn layout), and the
report shows how precision and recall swap between the two readings.

Run:  python3 demos/05_metrics_tables.py
"""

import json

import numpy as np

from flamewatch import data_path
from flamewatch.metrics import ConfusionMatrix, format_table, macro_metrics

with open(data_path("published_eval_matrices.json")) as fh:
    tables = json.load(fh)

for key in ("lexicon", "baseline"):
    entry = tables[key]
    matrix = ConfusionMatrix(np.array(entry["counts"]), entry["class_names"])
    print(f"=== {key} (rows=predicted, columns=actual) ===")
    mm = macro_metrics(matrix, orientation="paper")
    print(format_table(matrix, mm))
    print(f"macro precision {mm.macro_precision:.2%}  "
          f"recall {mm.macro_recall:.2%}  F1 {mm.macro_f1:.2%}")

    # reading the same numbers in the standard orientation swaps the roles
    std = macro_metrics(matrix, orientation="standard")
    print(f"standard-orientation precision {std.macro_precision:.2%} "
          f"(equals paper-orientation recall {mm.macro_recall:.2%})\n")
