#!/usr/bin/env python3
"""Entanglement-swapping structure of the post-beamsplitter state.

Restricted to one photon per arm, the four-photon state is a product of
two phi+ pairs, (A1,A2) x (B1,B2).  The same state re-expands over the
crossed pairings (A2,B2) x (A1,B1) as an equally weighted sum of
matching Bell products, which is why detecting a Bell state on the
inner arms collapses the outer arms onto the same Bell state.
"""

from eventready import run_preset

result = run_preset("bell-decomposition")
report = result.report

print("projected norm^2 (one photon per arm):", report["projected_norm_sq"])
print("Bell products in the re-expansion:   ", ", ".join(report["bell_terms"]))
print("residual | psi_projected - psi_bell |:", report["residual_norm"])
print("overlap <projected|recomposed>:       ", report["overlap"][0])
print("\nThe residual sits at machine precision: the two expansions are the")
print("same state, term for term.")
