"""
Eisenstein series and holomorphic projection
============================================

The Fourier expansion of G*_w(z, s) at s = 0, -1 is a polynomial in
Y = 1/(4 pi y) with exact coefficients.  We compare it against a truncated
lattice sum, watch the Maass-Shimura operator shift s, and project a
nearly holomorphic form back to a holomorphic one.
"""

from padic_rankin.eisenstein import (
    evaluate_expansion,
    gstar_expansion,
    gstar_to_eisenstein_factor,
    lattice_sum_oracle,
)
from padic_rankin.exactnum import DirichletCharacter
from padic_rankin.nearlyhol import NearlyHolExpansion, delta_power, hol_project
from padic_rankin.qexp import eta_delta

theta = DirichletCharacter.from_generator_images(3, [(2, 1)])  # odd, so w must be odd
trivial = DirichletCharacter(1)

G = gstar_expansion(11, 0, theta, 12)
print("G*_11(z, 0), first coefficients:", [G.layers[0][n] for n in range(1, 8)])

# the series against the lattice sum it came from
z = 0.1 + 1.0j
series = evaluate_expansion(gstar_expansion(11, 0, theta, 60), z) * gstar_to_eisenstein_factor(11, 0)
lattice = lattice_sum_oracle(11, 0, theta, trivial, z, 200)
print(f"series {series:.10f}\nlattice {lattice:.10f}")

# delta^r moves (w, s) to (w + 2r, s - r)
for r in (1, 2):
    same = delta_power(gstar_expansion(11, 0, theta, 40), r).equals(gstar_expansion(11 + 2 * r, -r, theta, 40))
    print(f"delta^{r} G*_11(0) == G*_{11 + 2 * r}({-r}):", same)

# holomorphic projection fixes cusp forms and kills anything in the image of delta
D = NearlyHolExpansion.from_qexp(eta_delta(30).expansion)
print("hol(Delta) == Delta:", hol_project(D).coefficients_equal(eta_delta(30).expansion))
print("hol(delta Delta) == 0:", hol_project(delta_power(D, 1)).is_zero())
