"""Differentiate the log-form construction with dual numbers.

Running the construction over K[eps]/(eps^2) at (lambda + eps lambda',
F + eps F') gives the derivative as the eps-part; it must agree with the
matrix image of the same direction.  Run with
``python3 demos/03_dual_number_derivative.py``.
"""

from __future__ import annotations

import numpy as np

from folia.logfol import random_params
from folia.tangent import (
    direction_coordinates,
    drho_matrix,
    dual_image,
    dual_number_consistency,
    random_direction,
    twisted_form_basis,
)

p = random_params(seed=2, n=4, q=2, degrees=(1, 1, 1, 1, 1))
basis = twisted_form_basis(4, 2, p.total_degree, p.field)
D = drho_matrix(p, basis)
print(f"derivative matrix: {D.nrows} x {D.ncols}")

rng = np.random.default_rng(0)
lam1, lam2, polys = random_direction(p, rng)
eps = dual_image(p, lam1, lam2, polys)
x = direction_coordinates(p, lam1, lam2, polys)
print("eps-part coordinates (first 8):", basis.encode(eps)[:8])
print("matrix image        (first 8):", D.matvec(x)[:8])
print("agree on 10 random directions:",
      all(dual_number_consistency(p, random_direction(p, rng), basis, D) for _ in range(10)))
