"""Generic Lie-algebra decoupling engine.

Given a commutator-closed operator basis H_1..H_n with structure constants
c[j][k][l] and a Hamiltonian written as H(t) = sum_j G_j(t) H_j, the ordered
exponential ansatz

    U(t) = exp(-i F_1 H_1) exp(-i F_2 H_2) ... exp(-i F_n H_n),  F(0) = 0,

holds in a neighbourhood of t = 0 with scalar coefficient functions obtained
from the linear systems G(t) = Xi(F) dF/dt.  Column j of the transfer matrix
Xi collects the basis coordinates of H_j conjugated by the factors that stand
to its left in the ansatz, computed here through exponentials of the
adjoint-representation matrices.

The coefficient ODEs are integrated with an embedded Dormand-Prince 5(4)
pair.  |det Xi| is monitored relative to its Hadamard bound; the solver fails
loudly when the parameterisation leaves its validity neighbourhood.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import ladder
from .errors import StepUnderflow, XiSingular
from .signals import ZERO, as_signal

MAX_DIM = 64
DET_RATIO_FLOOR = 1e-12


def matrix_exp(a):
    """Dense matrix exponential via scaling-and-squaring on a series core.

    Exact for nilpotent input (the series terminates), relative accuracy
    around 1e-15 otherwise.  Intended for the engine's small adjoint matrices
    (n <= 64); rejects non-finite entries.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix_exp needs a square matrix")
    if a.shape[0] > MAX_DIM:
        raise ValueError(f"matrix_exp limited to n <= {MAX_DIM}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix_exp: non-finite entries")
    n = a.shape[0]
    eye = np.eye(n, dtype=complex)
    norm = np.linalg.norm(a, np.inf)
    if norm == 0.0:
        return eye.copy()
    s = int(np.ceil(np.log2(norm))) + 1 if norm > 0.5 else 0
    b = a / (2.0 ** s)
    out = eye.copy()
    term = eye
    for k in range(1, 41):
        term = term @ b / k
        out += term
        if np.max(np.abs(term)) <= 1e-17 * max(1.0, np.max(np.abs(out))):
            break
    for _ in range(s):
        out = out @ out
    return out


class _FactorExp:
    """Evaluator for exp(-i f M) with M fixed and f varying.

    Uses a cached eigendecomposition when M is safely diagonalisable, the
    series exponential otherwise (nilpotent adjoints terminate exactly).
    """

    def __init__(self, m):
        self.m = np.asarray(m, dtype=complex)
        self._eig = None
        if np.linalg.norm(self.m, np.inf) > 0:
            try:
                w, v = np.linalg.eig(self.m)
                vinv = np.linalg.inv(v)
                recon = (v * w) @ vinv
                ok = (
                    np.max(np.abs(recon - self.m))
                    <= 1e-13 * max(1.0, np.max(np.abs(self.m)))
                    and np.linalg.cond(v) < 1e8
                )
                if ok:
                    self._eig = (w, v, vinv)
            except np.linalg.LinAlgError:
                pass

    def __call__(self, f):
        if self._eig is None:
            return matrix_exp(-1j * f * self.m)
        w, v, vinv = self._eig
        return (v * np.exp(-1j * f * w)) @ vinv


def xi_matrix(structure, f, ordering=None):
    """Coefficient-transfer matrix Xi(F) for the given structure constants.

    Column j holds the coordinates of prod_{k<j} exp(-i F_k ad H_k) applied
    to the j-th unit vector.  ``ordering`` optionally permutes the basis into
    the ansatz order before building the matrix.  Xi(0) is the identity.
    """
    c = np.asarray(structure, dtype=complex)
    if ordering is not None:
        perm = list(ordering)
        c = c[np.ix_(perm, perm, perm)]
        f = np.asarray(f, dtype=complex)[perm]
    adjoints = ladder.adjoint_matrices(c)
    return _xi_from_adjoints([_FactorExp(m) for m in adjoints], np.asarray(f, complex))


def _xi_from_adjoints(factor_exps, f):
    n = len(f)
    xi = np.empty((n, n), dtype=complex)
    left = np.eye(n, dtype=complex)
    xi[:, 0] = left[:, 0]
    for j in range(1, n):
        left = left @ factor_exps[j - 1](f[j - 1])
        xi[:, j] = left[:, j]
    return xi


def _det_ratio(xi):
    """|det Xi| relative to its Hadamard bound (product of row norms)."""
    scale = float(np.prod(np.linalg.norm(xi, axis=1)))
    if scale == 0.0 or not np.isfinite(scale):
        return 0.0
    return float(abs(np.linalg.det(xi)) / scale)


class DecouplingProblem:
    """A Hamiltonian in basis coordinates plus the span to integrate over.

    ``signals`` holds one driving coefficient per basis element, in basis
    order; missing trailing entries are padded with zero.  ``ordering``
    permutes the basis into the desired ansatz order at construction time,
    so the integrator and Xi always work in ansatz order.  The initial
    condition F(0) = 0 is fixed by the decoupling theorem.
    """

    def __init__(self, basis, signals, t_final, ordering=None):
        if ordering is not None:
            basis = basis.reordered(ordering)
            signals = list(signals)
            if len(signals) == len(basis):
                signals = [signals[i] for i in ordering]
            elif len(signals) < len(basis):
                padded = list(signals) + [ZERO] * (len(basis) - len(signals))
                signals = [padded[i] for i in ordering]
            else:
                raise ValueError("more signals than basis elements")
        self.basis = basis
        n = len(basis)
        signals = [as_signal(s) for s in signals]
        if len(signals) > n:
            raise ValueError("more signals than basis elements")
        self.signals = signals + [ZERO] * (n - len(signals))
        if not t_final > 0:
            raise ValueError("span must be positive")
        self.t_final = float(t_final)
        self.structure = ladder.structure_constants(basis)
        self.adjoints = ladder.adjoint_matrices(self.structure)
        self._factor_exps = [_FactorExp(m) for m in self.adjoints]

    @property
    def dim(self):
        return len(self.basis)

    def g_vector(self, t):
        return np.array([s(t) for s in self.signals], dtype=complex)

    def xi(self, f):
        return _xi_from_adjoints(self._factor_exps, np.asarray(f, dtype=complex))

    def rhs(self, t, f):
        """dF/dt solving Xi(F) dF = G(t) by pivoted linear solve."""
        xi = self.xi(f)
        ratio = _det_ratio(xi)
        if ratio < DET_RATIO_FLOOR:
            raise XiSingular(t, ratio)
        return np.linalg.solve(xi, self.g_vector(t))


def decoupling_rhs(problem, t, f):
    """Module-level alias for :meth:`DecouplingProblem.rhs`."""
    return problem.rhs(t, f)


@dataclass
class CoefficientTrajectory:
    """Decoupling coefficients on an output grid, plus solver diagnostics.

    ``values[j, i]`` is F_j at ``times[i]`` (basis in ansatz order);
    ``det_ratio`` holds |det Xi| relative to its Hadamard bound at each
    output point.  F(:, 0) is exactly zero.
    """

    times: np.ndarray
    values: np.ndarray
    det_ratio: np.ndarray
    accepted: int
    rejected: int
    basis: object = field(default=None, repr=False)

    @property
    def final(self):
        return self.values[:, -1]

    def at(self, t, tol=1e-12):
        """Coefficient vector at an exact grid time."""
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > tol * max(1.0, abs(t)):
            raise KeyError(f"t={t} is not on the output grid")
        return self.values[:, i]


# Dormand-Prince 5(4) tableau.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_ERR = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


def rk45_on_grid(rhs, times, y0, rtol, atol, span, retry_singular=False):
    """Adaptive 5(4) stepping that lands exactly on every grid time.

    Initial step span/1000, safety factor 0.9, maximum step span/10, step
    floor 1e-12 span (StepUnderflow below it).  With ``retry_singular``,
    XiSingular raised by the right-hand side is treated as a rejected step
    and the step is halved, so the failure time is resolved sharply before
    the error propagates.  Returns (values[len(times), n], accepted,
    rejected).
    """
    times = np.asarray(times, dtype=float)
    if times[0] != 0.0 or np.any(np.diff(times) <= 0):
        raise ValueError("output grid must start at 0 and increase strictly")
    if times[-1] > span * (1 + 1e-12):
        raise ValueError("output grid exceeds the span")

    y = np.asarray(y0, dtype=complex)
    values = np.empty((len(times), len(y)), dtype=complex)
    values[0] = y
    t = 0.0
    h = span / 1000.0
    max_step = span / 10.0
    floor = 1e-12 * span
    accepted = rejected = 0
    k = np.empty((7, len(y)), dtype=complex)
    k1 = np.asarray(rhs(t, y), dtype=complex)
    out_i = 1

    while out_i < len(times):
        target = times[out_i]
        h_try = min(h, max_step, target - t)
        clipped = h_try < min(h, max_step)
        if h_try < floor:
            raise StepUnderflow(t, h_try)

        try:
            k[0] = k1
            for s in range(1, 7):
                k[s] = rhs(t + _C[s] * h_try, y + h_try * (k[:s].T @ _A[s]))
            y_new = y + h_try * (k.T @ _B5)
            err = h_try * (k.T @ _ERR)
        except XiSingular:
            if not retry_singular:
                raise
            rejected += 1
            if h_try <= floor * 2:
                raise
            h = h_try / 2
            continue

        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = float(np.sqrt(np.mean(np.abs(err / scale) ** 2)))

        if err_norm <= 1.0:
            t = t + h_try
            y = y_new
            k1 = k[6]  # first-same-as-last
            accepted += 1
            if err_norm == 0.0:
                factor = _MAX_FACTOR
            else:
                factor = min(_MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * err_norm ** -0.2))
            # A clipped step says nothing about the natural step size.
            h = max(h, h_try * factor) if clipped else h_try * factor
            if t >= target - 1e-14 * max(1.0, abs(target)):
                t = target
                values[out_i] = y
                out_i += 1
        else:
            rejected += 1
            h = h_try * min(1.0, max(_MIN_FACTOR, _SAFETY * err_norm ** -0.2))
            if h < floor:
                raise StepUnderflow(t, h)

    return values, accepted, rejected


def integrate(problem, rtol=1e-10, atol=1e-12, times=None, n_out=129):
    """Integrate the decoupling ODEs from F(0) = 0 over the problem span.

    Steps are clipped to land exactly on every requested output time, and
    |det Xi| (relative to its Hadamard bound) is recorded there.  Raises
    XiSingular with the failure time when the transfer matrix degenerates,
    StepUnderflow when the step size collapses.
    """
    T = problem.t_final
    if times is None:
        times = np.linspace(0.0, T, n_out)
    times = np.asarray(times, dtype=float)

    y0 = np.zeros(problem.dim, dtype=complex)
    values, accepted, rejected = rk45_on_grid(
        problem.rhs, times, y0, rtol, atol, T, retry_singular=True
    )
    values = values.T.copy()
    det_ratio = np.array([_det_ratio(problem.xi(values[:, i]))
                          for i in range(len(times))])
    return CoefficientTrajectory(
        times=times,
        values=values,
        det_ratio=det_ratio,
        accepted=accepted,
        rejected=rejected,
        basis=problem.basis,
    )
