"""Brute-force propagation in a truncated Fock basis.

This is the package's ground truth: dense matrix images of ladder
polynomials, coherent states, a time-ordered midpoint propagator with
step-halving refinement, and the ordered-exponential image of a decoupling
trajectory.  Every decoupled solution elsewhere in the package is tested
against this module.

Truncation policy: a degree-d polynomial corrupts the top ~d levels of its
matrix image, and products of exponential factors push the corruption lower,
so operator-level comparisons should exclude the top rows/columns while
state-level comparisons should keep the population near the cutoff (the
"leakage") negligible.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg
from scipy.special import gammaln

from .errors import LeakageTooLarge, ModeMismatch, NonConvergent


def destroy(cutoff):
    """Lowering operator on span{|0>, ..., |cutoff>}: a|n> = sqrt(n)|n-1>."""
    if cutoff < 1:
        raise ValueError("cutoff must be at least 1")
    return np.diag(np.sqrt(np.arange(1.0, cutoff + 1)), 1).astype(complex)


def create(cutoff):
    return destroy(cutoff).conj().T


def number_op(cutoff):
    return np.diag(np.arange(cutoff + 1.0)).astype(complex)


def x_op(cutoff):
    a = destroy(cutoff)
    return (a.conj().T + a) / np.sqrt(2.0)


def p_op(cutoff):
    a = destroy(cutoff)
    return 1j * (a.conj().T - a) / np.sqrt(2.0)


def ladder_matrix(cutoff):
    """Alias for :func:`destroy`."""
    return destroy(cutoff)


def to_matrix(poly, cutoff):
    """Dense matrix image of a normal-ordered polynomial.

    ``cutoff`` is an int (shared by all modes) or a per-mode tuple.  Two-mode
    images use the row-major tensor basis |n_a, n_b> -> n_a*(cutoff_b+1)+n_b.
    Raises when the polynomial degree exceeds the cutoff.
    """
    if poly.n_modes > 2:
        raise ValueError("matrix images implemented for one or two modes")
    cutoffs = (cutoff,) * poly.n_modes if np.ndim(cutoff) == 0 else tuple(cutoff)
    if len(cutoffs) != poly.n_modes:
        raise ValueError("one cutoff per mode required")
    for mode, deg in enumerate(poly.mode_degrees()):
        if deg > cutoffs[mode]:
            raise ValueError(
                f"cutoff {cutoffs[mode]} too small for mode-{mode} degree {deg}"
            )

    # Lazily built per-mode power tables ad^p a^q.
    lowering = [destroy(c) for c in cutoffs]
    raising = [m.conj().T for m in lowering]
    pow_cache = [{} for _ in cutoffs]

    def mode_image(mode, p, q):
        key = (p, q)
        cache = pow_cache[mode]
        if key not in cache:
            mat = np.eye(cutoffs[mode] + 1, dtype=complex)
            for _ in range(p):
                mat = raising[mode] @ mat
            for _ in range(q):
                mat = mat @ lowering[mode]
            cache[key] = mat
        return cache[key]

    dim = int(np.prod([c + 1 for c in cutoffs]))
    out = np.zeros((dim, dim), dtype=complex)
    for sig, coeff in poly.terms.items():
        mats = [mode_image(m, p, q) for m, (p, q) in enumerate(sig)]
        term = mats[0]
        for m in mats[1:]:
            term = np.kron(term, m)
        out += coeff * term
    return out


def is_hermitian(mat, tol=1e-12):
    scale = max(np.max(np.abs(mat)), 1.0)
    return np.max(np.abs(mat - mat.conj().T)) <= tol * scale


def coherent_state(alpha, cutoff, leakage_tol=1e-10):
    """Normalised truncation of exp(-|alpha|^2/2) alpha^n / sqrt(n!).

    Raises LeakageTooLarge when the top two levels hold more than
    ``leakage_tol`` population, i.e. when the cutoff is too small for alpha.
    """
    alpha = complex(alpha)
    n = np.arange(cutoff + 1)
    if alpha == 0:
        vec = np.zeros(cutoff + 1, dtype=complex)
        vec[0] = 1.0
        return vec
    log_mag = -abs(alpha) ** 2 / 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    vec = np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))
    top = float(np.sum(np.abs(vec[-2:]) ** 2))
    if top > leakage_tol:
        raise LeakageTooLarge(
            f"coherent state alpha={alpha} keeps {top:.2e} population in the "
            f"top two levels at cutoff {cutoff}"
        )
    return vec / np.linalg.norm(vec)


def leakage(state, levels=2):
    """Population in the top ``levels`` components."""
    return float(np.sum(np.abs(state[-levels:]) ** 2))


def fidelity(psi, phi):
    """|<psi|phi>|^2 for equal-cutoff state vectors."""
    if psi.shape != phi.shape:
        raise ModeMismatch("state cutoffs differ")
    return float(abs(np.vdot(psi, phi)) ** 2)


def expectation(op, psi):
    """<psi|A|psi>."""
    if op.shape[0] != psi.shape[0]:
        raise ModeMismatch("operator and state cutoffs differ")
    return complex(np.vdot(psi, op @ psi))


def variance(op, psi):
    """<A^2> - <A>^2 (real part; use Hermitian observables)."""
    mean = expectation(op, psi)
    return float((expectation(op @ op, psi) - mean ** 2).real)


class _MidpointStepper:
    """Short-step unitary factors exp(-i H dt) with an eigen-basis cache.

    Consecutive identical Hamiltonian evaluations (constant H) reuse both the
    eigendecomposition and the assembled step matrix.
    """

    def __init__(self):
        self._h = None
        self._eig = None
        self._dt = None
        self._step = None

    def step_matrix(self, h, dt):
        if self._h is None or h.shape != self._h.shape or not np.array_equal(h, self._h):
            if not is_hermitian(h):
                raise ValueError("midpoint propagator requires a Hermitian H(t)")
            self._h = h.copy()
            self._eig = np.linalg.eigh(h)
            self._dt = None
        if self._dt != dt:
            w, v = self._eig
            self._step = (v * np.exp(-1j * w * dt)) @ v.conj().T
            self._dt = dt
        return self._step


def _time_ordered(h_eval, t0, t1, n_steps):
    stepper = _MidpointStepper()
    dt = (t1 - t0) / n_steps
    dim = h_eval(t0).shape[0]
    u = np.eye(dim, dtype=complex)
    for i in range(n_steps):
        mid = t0 + (i + 0.5) * dt
        u = stepper.step_matrix(h_eval(mid), dt) @ u
    return u


def propagate(hamiltonian, span, dt=None, drift_tol=1e-9, max_refinements=12):
    """Time-ordered propagator over ``span`` by midpoint-rule exponentials.

    ``hamiltonian`` is a Hermitian matrix or a callable t -> matrix.  The
    step U <- exp(-i H(t + dt/2) dt) U is second-order accurate; the step is
    halved until the endpoint moves by at most ``drift_tol`` (max-abs over
    entries), and the finer result is returned.  Raises NonConvergent at the
    halving floor.
    """
    t0, t1 = (0.0, float(span)) if np.ndim(span) == 0 else map(float, span)
    if t1 <= t0:
        raise ValueError("empty propagation span")
    h_eval = hamiltonian if callable(hamiltonian) else (lambda _t: hamiltonian)
    width = t1 - t0
    if dt is None:
        dt = width / 2000.0
    if dt > width / 100.0:
        raise ValueError("dt must be at most span/100")
    n = max(100, int(np.ceil(width / dt)))

    u_prev = _time_ordered(h_eval, t0, t1, n)
    for _ in range(max_refinements):
        n *= 2
        u_next = _time_ordered(h_eval, t0, t1, n)
        drift = float(np.max(np.abs(u_next - u_prev)))
        if drift <= drift_tol:
            return u_next
        u_prev = u_next
    raise NonConvergent(
        f"midpoint refinement hit {max_refinements} halvings with drift > {drift_tol}"
    )


def _state_run(h_eval, psi0, times, dt_target):
    stepper = _MidpointStepper()
    out = np.empty((len(times), psi0.shape[0]), dtype=complex)
    out[0] = psi0
    psi = psi0.astype(complex)
    for i in range(1, len(times)):
        lo, hi = times[i - 1], times[i]
        n_sub = max(1, int(np.ceil((hi - lo) / dt_target - 1e-12)))
        dt = (hi - lo) / n_sub
        for j in range(n_sub):
            mid = lo + (j + 0.5) * dt
            psi = stepper.step_matrix(h_eval(mid), dt) @ psi
        out[i] = psi
    return out


def propagate_state(hamiltonian, psi0, times, dt=None, drift_tol=1e-9,
                    max_refinements=10):
    """State trajectory under the midpoint-exponential propagator.

    Same stepping and refinement policy as :func:`propagate`, but applied to
    a state vector with exact landings on the output grid.  Returns an array
    of shape (len(times), dim).
    """
    times = np.asarray(times, dtype=float)
    if times[0] != 0.0 or np.any(np.diff(times) <= 0):
        raise ValueError("output grid must start at 0 and increase strictly")
    psi0 = np.asarray(psi0, dtype=complex)
    h_eval = hamiltonian if callable(hamiltonian) else (lambda _t: hamiltonian)
    width = float(times[-1])
    if dt is None:
        dt = width / 2000.0
    if dt > width / 100.0:
        raise ValueError("dt must be at most span/100")

    prev = _state_run(h_eval, psi0, times, dt)
    for _ in range(max_refinements):
        dt /= 2.0
        nxt = _state_run(h_eval, psi0, times, dt)
        if float(np.max(np.abs(nxt[-1] - prev[-1]))) <= drift_tol:
            return nxt
        prev = nxt
    raise NonConvergent(
        f"state propagation did not settle within {max_refinements} halvings"
    )


def _is_diagonal(mat):
    return np.count_nonzero(mat - np.diag(np.diagonal(mat))) == 0


def factor_exponential(coefficient, mat):
    """exp(-i * coefficient * mat), exploiting diagonal generators."""
    if _is_diagonal(mat):
        return np.diag(np.exp(-1j * coefficient * np.diagonal(mat)))
    return scipy.linalg.expm(-1j * coefficient * mat)


def ansatz_matrices(basis, cutoff):
    """Matrix images of the basis elements, in basis (ansatz) order."""
    return [to_matrix(e, cutoff) for e in basis]


def apply_ansatz(f_values, matrices):
    """Ordered product prod_j exp(-i F_j M_j) for endpoint coefficients.

    ``f_values`` may come straight from ``CoefficientTrajectory.final``.
    Rejects non-finite coefficients.
    """
    f_values = np.asarray(f_values, dtype=complex)
    if not np.all(np.isfinite(f_values)):
        raise ValueError("non-finite ansatz coefficients")
    if len(f_values) != len(matrices):
        raise ValueError("coefficient/matrix count mismatch")
    dim = matrices[0].shape[0]
    u = np.eye(dim, dtype=complex)
    for f, m in zip(f_values, matrices):
        u = u @ factor_exponential(f, m)
    return u


def ansatz_state(trajectory, cutoff, initial):
    """Apply the endpoint ansatz of a trajectory to an initial state."""
    mats = ansatz_matrices(trajectory.basis, cutoff)
    return apply_ansatz(trajectory.final, mats) @ initial


def choose_cutoff(alpha=0.0, displacement=0.0, squeezing=0.0, minimum=24, ceiling=512):
    """Cutoff heuristic from expected occupation.

    ``displacement`` bounds the extra coherent amplitude accumulated by the
    drive, ``squeezing`` the squeezing parameter r.  The returned cutoff
    keeps the estimated occupation below cutoff/2 with a spread margin.
    """
    amp = abs(alpha) + abs(displacement)
    n_est = (amp ** 2 + np.sinh(abs(squeezing)) ** 2) * np.exp(2 * abs(squeezing))
    cut = int(np.ceil(2 * n_est + 12 * np.sqrt(n_est + 1) + 8))
    cut = max(minimum, cut)
    if cut > ceiling:
        raise ValueError(f"required cutoff {cut} exceeds supported ceiling {ceiling}")
    return cut
