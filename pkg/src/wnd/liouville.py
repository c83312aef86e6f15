"""Vectorised density-matrix dynamics in a truncated Fock space.

Convention: **column stacking**.  vec(M) stacks the columns of M (Fortran
order), so products vectorise as

    vec(A B C) = (C^T kron A) vec(B),

and the Markovian generator with Hamiltonian H, jump operators L_n and a
Hermitian positive semidefinite rate matrix h_nm reads

    L = -i [(1 kron H) - (H^T kron 1)]
        + sum_nm h_nm [ (conj(L_m) kron L_n)
                        - (1 kron L_m' L_n) / 2
                        - ((L_m' L_n)^T kron 1) / 2 ].

Every kron/transpose placement above is pinned by the vectorisation identity
(see ``kron_identity_residual``), not taken on faith; the builder also
verifies trace preservation of the assembled generator.

Propagation is by time-ordered short-step exponentials with Hermiticity
restoration each step.  The dissipative algebra itself can be examined with
``superalgebra_closure``, which doubles operators into two-mode ladder
polynomials (mode a carries left multiplication, mode b the transposed right
multiplication) and closes them under commutation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import ladder
from .errors import NonConvergent, TraceDrift


def vectorize(mat):
    """Column-stacked vector of a square matrix."""
    mat = np.asarray(mat)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("vectorize expects a square matrix")
    return mat.flatten(order="F")


def devectorize(vec):
    """Inverse of :func:`vectorize`; exact round trip."""
    vec = np.asarray(vec)
    dim = int(round(np.sqrt(vec.size)))
    if dim * dim != vec.size:
        raise ValueError("vector length is not a perfect square")
    return vec.reshape((dim, dim), order="F")


def left_right_superop(left, right):
    """Matrix of rho -> left @ rho @ right under column stacking."""
    return np.kron(np.asarray(right).T, np.asarray(left))


def kron_identity_residual(a, b, c):
    """Max-norm residual of vec(A B C) = (C^T kron A) vec(B).

    This single identity pins the stacking convention for the whole module.
    """
    a, b, c = (np.asarray(m, dtype=complex) for m in (a, b, c))
    lhs = vectorize(a @ b @ c)
    rhs = left_right_superop(a, c) @ vectorize(b)
    return float(np.max(np.abs(lhs - rhs)))


def trace_functional(dim):
    """Row vector w with w @ vec(M) = tr M."""
    return vectorize(np.eye(dim)).astype(complex)


def build_lindbladian(hamiltonian, jump_ops, rates=None):
    """Dense generator matrix for the Markovian master equation.

    ``rates`` is the Hermitian PSD matrix h_nm (defaults to the identity,
    i.e. one unit-rate channel per jump operator; a single operator with
    rate kappa corresponds to rates=[[kappa]]).  A non-PSD rate matrix is
    flagged with a warning, not an error.  The assembled generator is
    checked for trace preservation (trace functional annihilates it to
    1e-10).
    """
    h = np.asarray(hamiltonian, dtype=complex)
    dim = h.shape[0]
    eye = np.eye(dim, dtype=complex)
    jump_ops = [np.asarray(op, dtype=complex) for op in jump_ops]
    if rates is None:
        rates = np.eye(len(jump_ops))
    rates = np.atleast_2d(np.asarray(rates, dtype=complex))
    if rates.shape != (len(jump_ops), len(jump_ops)):
        raise ValueError("rate matrix shape must match the jump-operator count")
    if np.max(np.abs(rates - rates.conj().T), initial=0.0) > 1e-12:
        warnings.warn("rate matrix is not Hermitian", stacklevel=2)
    elif len(jump_ops) and np.min(np.linalg.eigvalsh(rates)) < -1e-12:
        warnings.warn("rate matrix is not positive semidefinite", stacklevel=2)

    gen = -1j * (left_right_superop(h, eye) - left_right_superop(eye, h))
    for n, l_n in enumerate(jump_ops):
        for m, l_m in enumerate(jump_ops):
            w = rates[n, m]
            if w == 0:
                continue
            sandwich = left_right_superop(l_n, l_m.conj().T)
            anti = l_m.conj().T @ l_n
            gen += w * (
                sandwich
                - 0.5 * left_right_superop(anti, eye)
                - 0.5 * left_right_superop(eye, anti)
            )

    residual = np.max(np.abs(trace_functional(dim) @ gen))
    if residual > 1e-10:
        raise ValueError(
            f"assembled generator is not trace preserving (residual {residual:.2e})"
        )
    return gen


@dataclass
class DensityTrajectory:
    """Propagated density matrices on a grid; shape (len, dim, dim)."""

    times: np.ndarray
    matrices: np.ndarray
    trace_drift: float
    hermiticity_drift: float

    @property
    def final(self):
        return self.matrices[-1]

    def expectation(self, op):
        return np.array([np.trace(op @ rho) for rho in self.matrices])


def _check_density(rho):
    scale = max(np.max(np.abs(rho)), 1e-300)
    if np.max(np.abs(rho - rho.conj().T)) > 1e-10 * scale:
        raise ValueError("initial state is not Hermitian")
    if abs(np.trace(rho) - 1.0) > 1e-9:
        raise ValueError("initial state is not unit trace")
    if np.min(np.linalg.eigvalsh(rho)) < -1e-9:
        raise ValueError("initial state is not positive semidefinite")


def propagate_density(generator, rho0, t_final, dt=None, times=None,
                      trace_tol=1e-9, max_refinements=8, refine=True):
    """Time-ordered short-step exponential propagation of a density matrix.

    ``generator`` is a dense Lindbladian matrix (one exp(L dt) per step
    size) or a callable t -> matrix (one exponential per step; slow for
    large cutoffs).  Each step restores Hermiticity by symmetrisation (the
    drift is logged on the trajectory); with ``refine`` the step is halved
    until the endpoint moves by less than ``trace_tol``.  Raises TraceDrift
    when the trace wanders beyond tolerance, NonConvergent at the refinement
    floor.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    _check_density(rho0)
    T = float(t_final)
    if times is None:
        times = np.linspace(0.0, T, 101)
    times = np.asarray(times, dtype=float)
    if times[0] != 0.0 or np.any(np.diff(times) <= 0):
        raise ValueError("output grid must start at 0 and increase strictly")
    if dt is None:
        dt = T / 2000.0
    if dt > T / 100.0:
        raise ValueError("dt must be at most span/100")
    n_steps = int(np.ceil(T / dt))

    traj = _run_density(generator, rho0, times, T, n_steps, trace_tol)
    if not refine:
        return traj
    for _ in range(max_refinements):
        n_steps *= 2
        finer = _run_density(generator, rho0, times, T, n_steps, trace_tol)
        drift = float(np.max(np.abs(finer.matrices[-1] - traj.matrices[-1])))
        if drift <= trace_tol:
            return finer
        traj = finer
    raise NonConvergent(
        f"density propagation did not settle within {max_refinements} step halvings"
    )


def _run_density(generator, rho0, times, T, n_steps, trace_tol):
    dt_target = T / n_steps
    static = None if callable(generator) else np.asarray(generator, dtype=complex)
    gen_eval = generator if callable(generator) else None
    step_cache = []

    def step_matrix(t_mid, dt):
        if static is None:
            return scipy.linalg.expm(np.asarray(gen_eval(t_mid), dtype=complex) * dt)
        # Output intervals of a uniform grid differ by float dust; matching
        # dt to relative 1e-12 keeps one exponential per genuine step size.
        for dt0, mat in step_cache:
            if abs(dt - dt0) <= 1e-12 * dt0:
                return mat
        mat = scipy.linalg.expm(static * dt)
        step_cache.append((dt, mat))
        return mat

    vec = vectorize(rho0)
    dim = rho0.shape[0]
    out = np.empty((len(times), dim, dim), dtype=complex)
    out[0] = rho0

    herm_drift = 0.0
    trace_drift = 0.0
    rho = rho0
    for i in range(1, len(times)):
        lo, hi = times[i - 1], times[i]
        n_sub = max(1, int(np.ceil((hi - lo) / dt_target - 1e-12)))
        dt = (hi - lo) / n_sub
        for j in range(n_sub):
            t_mid = lo + (j + 0.5) * dt
            vec = step_matrix(t_mid, dt) @ vec
            rho = devectorize(vec)
            sym = 0.5 * (rho + rho.conj().T)
            herm_drift = max(herm_drift, float(np.max(np.abs(rho - sym))))
            rho = sym
            tr = np.trace(rho)
            trace_drift = max(trace_drift, abs(tr - 1.0))
            if abs(tr - 1.0) > 100 * max(trace_tol, 1e-12):
                raise TraceDrift(f"trace drifted to {tr:.12g} at t={t_mid:.6g}")
            vec = vectorize(rho)
        out[i] = rho
    return DensityTrajectory(
        times=times,
        matrices=out,
        trace_drift=trace_drift,
        hermiticity_drift=herm_drift,
    )


# -- dissipative algebra closure ----------------------------------------------


def superop_polynomial(left, right):
    """Two-mode ladder image of the superoperator rho -> left rho right.

    Matches the column-stacked matrix representation exactly: mode a carries
    the transposed right factor (the outer kron index), mode b the left
    factor, so ``to_matrix`` of the result equals
    ``left_right_superop(to_matrix(left), to_matrix(right))`` and commutators
    of superoperators map to two-mode polynomial commutators.
    """
    if left.n_modes != 1 or right.n_modes != 1:
        raise ValueError("superoperator doubling expects single-mode operators")
    outer = right.transpose().promote(2)
    inner = _shift_to_second_mode(left)
    return outer * inner


def _shift_to_second_mode(poly):
    return ladder.LadderPolynomial(
        2, {((0, 0),) + sig: c for sig, c in poly.terms.items()}
    )


def superalgebra_closure(hamiltonian, jump_ops, max_dim=24):
    """Close the generator set of the vectorised master equation.

    ``hamiltonian`` and each jump operator are single-mode polynomials.  The
    doubled generators are H x 1, 1 x H^T, L_n x (L_m')^T and the
    anticommutator pieces L_m' L_n x 1, 1 x (L_m' L_n)^T for every channel
    pair.  Returns the closed basis with central elements flagged; raises
    ClosureOverflow past ``max_dim``.
    """
    one = ladder.identity()
    gens = [
        superop_polynomial(hamiltonian, one),
        superop_polynomial(one, hamiltonian),
    ]
    for l_n in jump_ops:
        for l_m in jump_ops:
            anti = l_m.dagger() * l_n
            gens.append(superop_polynomial(l_n, l_m.dagger()))
            gens.append(superop_polynomial(anti, one))
            gens.append(superop_polynomial(one, anti))
    return ladder.close_algebra(gens, max_dim=max_dim)
