#!/usr/bin/env python3
"""Cutoff-estimate sweep for the near-extremal tangential field."""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from hologlab.harness import SweepConfig, run_experiment

cfg = SweepConfig.from_ini(os.path.join(os.path.dirname(__file__), "..",
                                        "configs", "lemma_near_extremal.ini"))
rows, summary = run_experiment(cfg)
print(f"{len(rows)} rows, violations: {summary['violations']}")
for key in ("fit_sup", "fit_integral"):
    if key in summary:
        print(f"  {key}: p = {summary[key]['p']:.4f}, q = {summary[key]['q']:.4f}")
