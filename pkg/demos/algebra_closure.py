"""Commutator closures of ladder-operator algebras, with structure constants.

Three worked algebras:

* the linear-drive algebra {a'a, a, a'} closes with the identity (dim 4);
* {K+, K0, K-} is already closed (su(1,1), dim 3);
* the radiation-pressure coupling {b'b, a'a (b' + b)} closes with
  a'a (b' - b) and the self-Kerr element (a'a)^2, which commutes with
  everything: a non-trivial Casimir element that cannot be dropped from
  non-trivial dynamics.

Run:  python demos/algebra_closure.py
"""

import numpy as np

from wnd import ladder
from wnd.cli import closure_report


def show(title, generator_texts):
    print(f"== {title}")
    print(closure_report(generator_texts))


show("linear drive algebra", ["ad*a", "a", "ad"])
show("su(1,1) squeezing algebra", ["0.5*ad^2", "0.25*(2*ad*a+I)", "0.5*a^2"])
show("radiation-pressure coupling", ["bd*b", "ad*a*(bd+b)"])

# --- the same closure, programmatically --------------------------------------

nb = ladder.number(1, 2)
coupling = ladder.number(0, 2) * (ladder.creation(1, 2) + ladder.annihilation(1, 2))
basis = ladder.close_algebra([nb, coupling])
constants = ladder.structure_constants(basis)
print("programmatic access to the radiation-pressure closure:")
print("  dimension:", len(basis))
print("  central flags:", basis.central)
print("  Jacobi residual:", ladder.jacobi_residual(constants))
print("  adjoint matrix of the coupling term:")
print(np.array_str(ladder.adjoint_matrices(constants)[1].real, precision=3))
