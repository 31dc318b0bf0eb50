"""
p-adic arithmetic for Delta at p = 11
=====================================

Teichmuller lifts, the unit root of the Hecke polynomial, and Gauss sums.
"""

from padic_rankin.exactnum import characters_mod, char_eval, gauss_sum, normalize
from padic_rankin.padic import PadicElement, hensel_unit_root, teichmuller
from padic_rankin.qexp import eta_delta

p, N = 11, 20

# Teichmuller lifts are (p-1)-th roots of unity congruent to u mod p
for u in (2, 3, 10):
    w = teichmuller(u, p, N)
    print(f"omega({u}) = {w}   omega^10 - 1 = {w ** 10 - 1}")

# tau(11) is a unit, so x^2 - tau(11) x + 11^11 has exactly one unit root
delta = eta_delta(20)
tau11 = delta[11]
print("tau(11) =", tau11, " mod 11:", tau11 % 11)
ap = PadicElement.from_rational(tau11, p, N)
alpha, alpha_prime = hensel_unit_root(ap, PadicElement.from_rational(p ** 11, p, N), 12, N)
print("alpha  =", alpha, " valuation", alpha.valuation)
print("alpha' =", alpha_prime, " valuation", alpha_prime.valuation)

# G(chi) G(conj chi) = chi(-1) C_chi, exactly in Q(zeta)
for chi in characters_mod(13)[1:4]:
    g = normalize(gauss_sum(chi) * gauss_sum(chi.conjugate()))
    print(chi.literal(), " G G-bar =", g, " chi(-1) C =", normalize(char_eval(chi, -1) * 13))
