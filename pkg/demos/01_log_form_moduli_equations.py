"""Build a logarithmic 2-form from random parameters and check the moduli equations.

Run with ``python3 demos/01_log_form_moduli_equations.py``.
"""

from __future__ import annotations

from folia.logfol import (
    balanced_check,
    construct_log_form,
    descent_check,
    genericity_check,
    integrability_check,
    logdiff_identity_check,
    pluecker_check,
    random_params,
)

# Five generic hyperplanes in P^4 and a plane lambda orthogonal to d = (1, ..., 1).
p = random_params(seed=1, n=4, q=2, degrees=(1, 1, 1, 1, 1))
print("degrees:", p.degrees, "field:", p.field)
print("lambda^1:", p.lambdas[0])
print("lambda^2:", p.lambdas[1])
print("generic lambda:", genericity_check(p.lam(), p.degrees))

omega = construct_log_form(p)
print(f"omega: grade {omega.grade}, total degree {omega.total_degree}, {sum(1 for _ in omega.terms())} terms")

# The four identities every constructed form satisfies exactly.
print("descends (i_R omega = 0):        ", descent_check(omega))
print("Pluecker (omega ^ omega = 0):    ", pluecker_check(omega))
print("integrable (i_v omega ^ d omega):", integrability_check(omega))
print("F d omega = dF ^ omega:          ", logdiff_identity_check(p, omega))
print("2-balanced degree vector:        ", balanced_check(p.degrees, 2))
