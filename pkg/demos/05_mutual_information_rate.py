"""Mutual-information rate cap and its ancilla independence.

The cap 4 (2||H|| + 129 sum ||L||^2)(ln d_A + ln d_B) depends only on the
coupled factors A and B: local ancillas a and b can be arbitrarily large
without buying a faster rate.  The sweep below reuses one generator across
ancilla sizes 1...3 on each side and watches the bound stay fixed while the
measured derivative moves around under it.
"""

import numpy as np

from entrate import (
    DimensionSignature,
    LindbladGenerator,
    PureState,
    mi_rate_bound,
    mutual_info_rate_analytic,
    random_ginibre_lindblad,
    random_gue_hamiltonian,
    random_pure,
)

h = random_gue_hamiltonian(4, 21)        # acts on A x B (two qubits)
ls = (random_ginibre_lindblad(4, 22),)
print(f"{'(d_a, d_b)':>10} {'MI derivative':>14} {'cap':>10}")
for da, db in ((1, 1), (2, 2), (3, 3), (1, 3)):
    dims = DimensionSignature(da, 2, 2, db)
    psi = random_pure(dims, seed=da * 10 + db)
    gen = LindbladGenerator(dims, h, ls)
    rate = mutual_info_rate_analytic(psi, gen, eta=1e-8)
    print(f"{str((da, db)):>10} {rate:14.6f} {mi_rate_bound(gen):10.4f}")

print()
print("same cap in every row: the formula contains no ancilla dimensions.")

# a purely one-sided Hamiltonian cannot move mutual information at all
dims = DimensionSignature(2, 2, 2, 2)
rng = np.random.default_rng(0)
va = rng.normal(size=4) + 1j * rng.normal(size=4)
vb = rng.normal(size=4) + 1j * rng.normal(size=4)
psi = PureState(dims, np.kron(va / np.linalg.norm(va), vb / np.linalg.norm(vb)))
h_local = np.kron(random_gue_hamiltonian(2, 23), np.eye(2))
gen_local = LindbladGenerator(dims, h_local, ())
print()
print("product state, H = H_A x I:", mutual_info_rate_analytic(psi, gen_local, eta=1e-8))
