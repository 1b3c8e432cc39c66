#!/usr/bin/env python3
"""Boundary-term sweep under the coupling eps = h^(2/(1+alpha)).

The smallest width (h = 0.0125) builds a ~1.3e8-cell window; expect several
minutes and a few GB of memory.
"""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from hologlab.harness import SweepConfig, run_experiment

cfg = SweepConfig.from_ini(os.path.join(os.path.dirname(__file__), "..",
                                        "configs", "j_sweep.ini"))
rows, summary = run_experiment(cfg)
print(f"{len(rows)} rows, violations: {summary['violations']}")
for row in rows:
    print(f"  h={row['h']}: total measured {row['total_measured']:.4g} "
          f"vs envelope {row['total_envelope']:.4g}")
