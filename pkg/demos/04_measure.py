"""
The measure and its moments
===========================

Assemble mu from the r = 0 values level by level, check that it is bounded,
and integrate chi x^r against it.
"""

import numpy as np

from padic_rankin.measures import check_bounded, mellin_eval
from padic_rankin.pipeline import Run, RunConfig, assemble_measure, psi_value

cfg = RunConfig.load("builtin")
run = Run(cfg, jobs=4)
M = 11 ** 5
mu = assemble_measure(run, M, 4)

v = check_bounded(mu)
print("bounded:", v.bounded, " min valuation per level:", list(v.per_level))

# level-1 masses, in units of 11^shift
print("level 1 masses:", np.asarray(mu.tables[1][1:]) % 11 ** 3)

# int chi x^r d mu = (-1)^r Psi_(2+r)(chi)
for chi in run.characters[:3]:
    for r in (0, 1, 2):
        lhs = mellin_eval(mu, chi, r, run.ctx.primitive_root)
        rhs = psi_value(r, chi, M, run).value * (-1) ** r
        print(chi.literal(), r, "agree" if (lhs - rhs).is_zero() else "DIFFER", lhs)
