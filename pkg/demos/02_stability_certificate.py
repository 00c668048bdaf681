"""Run the stability certificate on the quintic-linear instance and read the report.

The certificate compares the rank of the derivative of the natural
parametrization with the dimension of the tangent space cut out by the
two perturbation equations; equality means the instance is infinitesimally
stable.  Run with ``python3 demos/02_stability_certificate.py``.
"""

from __future__ import annotations

import json
import time

from folia.exactla import GF
from folia.logfol import random_params
from folia.tangent import certify_stability

for prime in (32003, 65537):
    p = random_params(seed=1, n=4, q=2, degrees=(1, 1, 1, 1, 1), field=GF(prime))
    t0 = time.perf_counter()
    r = certify_stability(p)
    print(f"p = {prime}: {time.perf_counter() - t0:.1f}s")
    print(f"  descended 2-forms of degree 5 on P^4: {r.dim_ambient}")
    print(f"  perturbation rows: {r.perturbation_rows} (of {r.perturbation_rows_before_pruning})")
    print(f"  ker_dim = {r.ker_dim}, drho_rank = {r.drho_rank} -> {r.verdict}")
    print("  sanity:", json.dumps(r.sanity, sort_keys=True))
