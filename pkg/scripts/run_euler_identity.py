#!/usr/bin/env python3
"""Solver conservation and the smoothed-energy identity at dt and dt/2."""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from hologlab.harness import SweepConfig, run_experiment

cfg = SweepConfig.from_ini(os.path.join(os.path.dirname(__file__), "..",
                                        "configs", "euler_identity.ini"))
rows, summary = run_experiment(cfg)
print(f"{len(rows)} rows, violations: {summary['violations']}")
print(f"residual shrink when dt halves: {summary['residual_shrink']:.2f}x")
