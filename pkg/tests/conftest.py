import numpy as np
import pytest

from wnd import fock, ladder


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)


def random_polynomial(rng, n_modes=1, max_degree=3, max_terms=3):
    """Random normal-ordered polynomial with small integer-ish coefficients."""
    terms = {}
    for _ in range(rng.integers(1, max_terms + 1)):
        sig = []
        budget = max_degree
        for _ in range(n_modes):
            p = int(rng.integers(0, budget + 1))
            q = int(rng.integers(0, budget - p + 1))
            budget -= p + q
            sig.append((p, q))
        coeff = complex(rng.integers(-3, 4), rng.integers(-3, 4))
        if coeff == 0:
            coeff = 1.0
        terms[tuple(sig)] = terms.get(tuple(sig), 0j) + coeff
    poly = ladder.LadderPolynomial(n_modes, terms)
    if poly.is_zero:
        poly = ladder.identity(n_modes)
    return poly


def operator_norm_difference(p, q, cutoff):
    """Max-abs difference of the matrix images on the truncation-safe block.

    Commutators of degree-d polynomials corrupt the top ~d levels of a
    truncated image, so the comparison drops the top 2*d rows/columns in
    every mode.
    """
    d = max(p.degree, q.degree, 1)
    mp = fock.to_matrix(p, cutoff)
    mq = fock.to_matrix(q, cutoff)
    if p.n_modes == 1:
        keep = cutoff + 1 - 2 * d
        return float(np.max(np.abs((mp - mq)[:keep, :keep])))
    keep = cutoff + 1 - 2 * d
    dim = cutoff + 1
    idx = [na * dim + nb for na in range(keep) for nb in range(keep)]
    sub = np.ix_(idx, idx)
    return float(np.max(np.abs((mp - mq)[sub])))
