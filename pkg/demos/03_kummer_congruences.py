"""
Kummer congruences for Delta x 14a at p = 11
============================================

Load the shipped configuration, tabulate a few Omega-free Psi values and run
the congruence checks.  Dropping the sign (-1)^r breaks them.
"""

from padic_rankin.exactnum import DirichletCharacter
from padic_rankin.pipeline import Run, RunConfig, kummer_checks, psi_value

cfg = RunConfig.load("builtin")
run = Run(cfg, jobs=4)
print("alpha =", run.ctx.alpha)

# Psi values for the quadratic character mod 11
quad = DirichletCharacter.from_generator_images(11, [(2, 5)])
for r in range(4):
    print(f"Psi_(2+{r})(chi_quad) =", psi_value(r, quad, 11 ** 4, run))

signed = kummer_checks(run)
unsigned = kummer_checks(run, sign=False)
for res in signed + unsigned[1:]:
    d = res.detail
    print(res.name, "signed" if d.get("signed", True) else "unsigned", res.verdict,
          f"relations={d['relations']} strata={d['strata']} depth={d.get('depth')}")

# the first relation that fails without the sign, and where
w = unsigned[1].detail["witness"]
print("mod 11^%d, stratum %d, nonzero relation entries:" % (w["m"], w["stratum"]),
      {i: c for i, c in enumerate(w["relation"]) if c})
