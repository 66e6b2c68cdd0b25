"""Shared builders and independent oracles for the test suite.

Oracles here deliberately avoid the code paths they check: brute-force
double loops for the operator, dense full-spectrum eigendecomposition for
the power iteration, fine midpoint sums for closed-form kernel masses.
"""

import numpy as np

from seasonal_dispersal import BoundaryCondition, Grid, SeasonParams, assemble

P1 = dict(delta=0.2, d=0.6, a=1.2, b=0.6, rho=0.6, omega=1.0)
P2 = dict(delta=0.2, d=1.0, a=1.2, b=0.6, rho=0.6, omega=1.0)
P3 = dict(delta=0.8, d=0.6, a=1.2, b=0.6, rho=0.6, omega=1.0)


def params(preset=None, **kw) -> SeasonParams:
    base = dict(preset) if preset else dict(P1)
    base.update(kw)
    return SeasonParams(**base)


def dirichlet_op(kernel, length, n, d):
    return assemble(kernel, Grid.centered(length, n), BoundaryCondition.DIRICHLET, d)


def dense_sigma1(op, a: float) -> float:
    """Full-spectrum oracle: sigma1 from the largest eigenvalue of d K."""
    lam = float(np.linalg.eigvalsh(op.d * op.K)[-1])
    return op.d - a - lam


def brute_apply(op, u: np.ndarray) -> np.ndarray:
    """O(n^2) double-loop evaluation of the discrete dispersal operator."""
    n = op.n
    out = np.zeros(n)
    for i in range(n):
        acc = 0.0
        for j in range(n):
            acc += op.K[i, j] * u[j]
        if op.bc is BoundaryCondition.DIRICHLET:
            out[i] = op.d * (acc - u[i])
        else:
            out[i] = op.d * (acc - op.rowmass[i] * u[i])
    return out


def laplace_mass_quadrature(D: float, W: float, n: int = 200_000) -> float:
    """Fine midpoint quadrature of the Laplace kernel over [-W, W]."""
    dx = 2.0 * W / n
    x = -W + (np.arange(n) + 0.5) * dx
    return float(np.sum(np.exp(-np.abs(x) / D)) / (2.0 * D) * dx)


def tent_kernel_table(half_width: float, m: int = 201):
    """Samples of the unit-mass triangular kernel (1 - |x|/w)/w on [-w, w].

    Built by mirroring one half so the table is symmetric bit for bit.
    """
    if m % 2 == 0:
        raise ValueError("tent table needs an odd sample count")
    half = (1.0 - np.linspace(0.0, half_width, (m + 1) // 2) / half_width) / half_width
    return np.concatenate([half[:0:-1], half])


def random_nonneg_state(rng, n: int, with_zeros: bool = True) -> np.ndarray:
    u = rng.uniform(0.0, 1.0, n)
    if with_zeros:
        u *= rng.uniform(0.0, 1.0, n) > 0.3
        if not np.any(u > 0):
            u[int(rng.integers(n))] = 0.5
    return u
