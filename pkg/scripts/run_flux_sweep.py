#!/usr/bin/env python3
"""Run both flux-scaling sweeps (above-critical and critical pair)."""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from hologlab.harness import SweepConfig, run_experiment

HERE = os.path.join(os.path.dirname(__file__), "..", "configs")

for name in ("flux_alpha04.ini", "flux_critical.ini"):
    cfg = SweepConfig.from_ini(os.path.join(HERE, name))
    rows, summary = run_experiment(cfg)
    print(f"{name}: {len(rows)} rows, violations: {summary['violations']}")
    if "fit" in summary:
        print(f"  fitted p = {summary['fit']['p']:.4f}, q = {summary['fit']['q']:.4f}")
