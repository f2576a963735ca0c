"""Complex Gaussian integrals and composition of quadratic model phases.

For a complex symmetric ``M`` with positive definite real part,

    int_{R^d} exp(-y^T M y) dy = det(M / pi)^{-1/2},

with the square root fixed by summing principal logarithms of the
eigenvalues; they all lie in the right half plane because
``Re(v* M v) = v* Re(M) v > 0`` for an eigenvector ``v``.

Composing two Gaussian kernels integrates out the shared variables; on the
quadratic level that is a Schur complement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class NotPositive(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    pass


MAX_DIM = 4
MAX_NODES = 10**7


@dataclass(frozen=True, eq=False)
class ComplexQuadraticForm:
    """Q(y) = y^T M y with M complex symmetric."""

    matrix: np.ndarray

    def __post_init__(self):
        M = np.atleast_2d(np.asarray(self.matrix, dtype=complex))
        if M.shape[0] != M.shape[1]:
            raise ValueError(f"matrix must be square, got {M.shape}")
        if not np.allclose(M, M.T, rtol=0, atol=1e-12 * max(1.0, np.abs(M).max(initial=0))):
            raise ValueError("matrix must be symmetric")
        object.__setattr__(self, "matrix", (M + M.T) / 2)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def min_real_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix.real).min())

    def require_positive(self):
        lo = self.min_real_eigenvalue
        if lo <= 0:
            raise NotPositive(f"Re(M) is not positive definite (min eigenvalue {lo:.3g})")

    def scaled(self, xi: float) -> "ComplexQuadraticForm":
        return ComplexQuadraticForm(xi * self.matrix)


def _as_form(Q) -> ComplexQuadraticForm:
    return Q if isinstance(Q, ComplexQuadraticForm) else ComplexQuadraticForm(Q)


def gaussian_integral_closed(Q) -> complex:
    Q = _as_form(Q)
    Q.require_positive()
    lam = np.linalg.eigvals(Q.matrix / np.pi)
    return complex(np.exp(-0.5 * np.sum(np.log(lam))))


def _trapezoid_1d(beta: float, c: complex, n: int, half_width: float) -> complex:
    """h * sum exp(-(1 + i beta) w^2 - 2 c w) on n+1 nodes around the peak."""
    center = -c.real
    w = center + np.linspace(-half_width, half_width, n + 1)
    h = 2 * half_width / n
    return complex(h * np.sum(np.exp(-(1 + 1j * beta) * w * w - 2 * c * w)))


def gaussian_integral_numeric(Q, tol: float = 1e-10, linear=None) -> complex:
    """Tensor-product trapezoid quadrature of int exp(-y^T M y - 2 b^T y) dy.

    Substitutes ``y = Re(M)^{-1/2} O w`` with ``O`` orthogonal so the
    imaginary part becomes diagonal; the tensor grid sum then factorizes
    into 1-D sums.  Each direction doubles its node count until stable;
    the total is accepted once halving every order moves it by < tol/2.
    """
    Q = _as_form(Q)
    Q.require_positive()
    d = Q.dim
    if d > MAX_DIM:
        raise BudgetExceeded(f"dimension {d} exceeds {MAX_DIM}")
    A, B = Q.matrix.real, Q.matrix.imag
    a, V = np.linalg.eigh(A)
    A_inv_half = V @ np.diag(a ** -0.5) @ V.T
    beta, O = np.linalg.eigh(A_inv_half @ B @ A_inv_half)
    T = A_inv_half @ O
    jac = float(np.prod(a) ** -0.5)
    b = np.zeros(d, dtype=complex) if linear is None else np.asarray(linear, dtype=complex)
    c = T.T @ b
    # Gaussian envelope exp(-(w - w0)^2) times the peak value exp(Re(c)^2)
    peak = float(np.exp(np.sum(c.real ** 2)))
    half_width = math.sqrt(math.log(max(1.0, peak * jac) * 1e3 / tol) + 1.0)

    orders = [16] * d
    values = [_trapezoid_1d(beta[i], c[i], orders[i], half_width) for i in range(d)]
    while True:
        for i in range(d):
            while True:
                finer = _trapezoid_1d(beta[i], c[i], 2 * orders[i], half_width)
                scale = abs(jac * np.prod([values[k] for k in range(d) if k != i]))
                done = abs(finer - values[i]) * scale < tol / (4 * d)
                orders[i] *= 2
                values[i] = finer
                if math.prod(n + 1 for n in orders) > MAX_NODES:
                    raise BudgetExceeded(f"more than {MAX_NODES} nodes needed")
                if done:
                    break
        total = jac * np.prod(values)
        coarse = jac * np.prod([_trapezoid_1d(beta[i], c[i], orders[i] // 2, half_width) for i in range(d)])
        if abs(total - coarse) < tol / 2:
            return complex(total)
        # a direction that looked settled was not; refine everything once more
        orders = [2 * n for n in orders]
        if math.prod(n + 1 for n in orders) > MAX_NODES:
            raise BudgetExceeded(f"more than {MAX_NODES} nodes needed")
        values = [_trapezoid_1d(beta[i], c[i], orders[i], half_width) for i in range(d)]


# ------------------------------------------------------------- composition

@dataclass(frozen=True, eq=False)
class QuadraticPhase:
    """Kernel exp(-v^T M v) with v = (outputs, inputs)."""

    matrix: np.ndarray
    n_out: int
    n_in: int

    def __post_init__(self):
        M = np.atleast_2d(np.asarray(self.matrix, dtype=complex))
        if M.shape != (self.n_out + self.n_in,) * 2:
            raise ValueError(f"matrix shape {M.shape} does not match {self.n_out}+{self.n_in} variables")
        object.__setattr__(self, "matrix", (M + M.T) / 2)

    def kernel(self, x, y) -> complex:
        v = np.concatenate([np.atleast_1d(x), np.atleast_1d(y)])
        return complex(np.exp(-v @ self.matrix @ v))


@dataclass(frozen=True, eq=False)
class CompositionResult:
    phase: QuadraticPhase
    prefactor: complex
    min_real_eigenvalue: float
    kernel_dim: int
    inner: np.ndarray
    cross: np.ndarray
    outer: np.ndarray

    @property
    def positive(self) -> bool:
        return self.min_real_eigenvalue >= -1e-12

    def kernel(self, x, z) -> complex:
        return self.prefactor * self.phase.kernel(x, z)


def compose_phases(left: QuadraticPhase, right: QuadraticPhase) -> CompositionResult:
    """Integrate out the variables shared by ``left`` (inputs) and ``right`` (outputs)."""
    if left.n_in != right.n_out:
        raise ValueError(f"cannot compose: {left.n_in} inputs vs {right.n_out} outputs")
    p, r, q = left.n_out, left.n_in, right.n_in
    size = p + r + q
    J = np.zeros((size, size), dtype=complex)
    J[: p + r, : p + r] += left.matrix
    J[p:, p:] += right.matrix
    inner_idx = np.arange(p, p + r)
    outer_idx = np.concatenate([np.arange(p), np.arange(p + r, size)])
    inner = J[np.ix_(inner_idx, inner_idx)]
    cross = J[np.ix_(outer_idx, inner_idx)]
    outer = J[np.ix_(outer_idx, outer_idx)]
    inner_form = ComplexQuadraticForm(inner)
    inner_form.require_positive()
    composed = outer - cross @ np.linalg.solve(inner, cross.T)
    re_eigs = np.linalg.eigvalsh(((composed + composed.T) / 2).real) if composed.size else np.zeros(0)
    scale = max(1.0, float(np.abs(re_eigs).max(initial=0)))
    kdim = int(np.sum(np.abs(re_eigs) <= 1e-9 * scale))
    return CompositionResult(
        phase=QuadraticPhase(composed, p, q),
        prefactor=gaussian_integral_closed(inner_form),
        min_real_eigenvalue=float(re_eigs.min(initial=np.inf)) if re_eigs.size else 0.0,
        kernel_dim=kdim,
        inner=inner,
        cross=cross,
        outer=outer,
    )


def composed_kernel_numeric(result: CompositionResult, x, z, tol: float = 1e-10) -> complex:
    """The composed kernel at (x, z) by quadrature over the shared variables."""
    v = np.concatenate([np.atleast_1d(x), np.atleast_1d(z)]).astype(complex)
    b = result.cross.T @ v
    return np.exp(-v @ result.outer @ v) * gaussian_integral_numeric(result.inner, tol, linear=b)


def random_form(rng: np.random.Generator, d: int, re_range=(0.2, 5.0), im_range=(-1.0, 1.0)) -> ComplexQuadraticForm:
    """Re(M) with eigenvalues drawn from ``re_range``, Im(M) entries from ``im_range``."""
    Qm, _ = np.linalg.qr(rng.normal(size=(d, d)))
    A = Qm @ np.diag(rng.uniform(*re_range, size=d)) @ Qm.T
    B = rng.uniform(*im_range, size=(d, d))
    B = np.triu(B) + np.triu(B, 1).T
    return ComplexQuadraticForm(A + 1j * B)


def random_phase(rng: np.random.Generator, n_out: int, n_in: int, floor: float = 0.2) -> QuadraticPhase:
    """Re part positive semidefinite (rank-deficient allowed) plus ``floor`` on the inputs."""
    size = n_out + n_in
    G = rng.normal(size=(size, max(1, size - 1)))
    A = G @ G.T / size
    A[n_out:, n_out:] += floor * np.eye(n_in)
    B = rng.uniform(-1, 1, size=(size, size))
    B = np.triu(B) + np.triu(B, 1).T
    return QuadraticPhase(A + 1j * B, n_out, n_in)
