"""System definitions: generic linearized triples and the built-in
autocatalytic (Gray-Scott type) reaction model with advection.

The linearized system is the triple (A, D, V): reaction Jacobian at the
homogeneous equilibrium, diagonal diffusion coefficients and diagonal
advection velocities.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SystemSpec",
    "GrayScottParams",
    "NoRealEquilibriumError",
    "NonFiniteEvaluationError",
    "gray_scott_equilibrium",
    "gray_scott_reaction",
    "gray_scott_jacobian",
    "numeric_jacobian",
]


class NoRealEquilibriumError(ValueError):
    """The nontrivial homogeneous equilibrium does not exist (w < 0)."""


class NonFiniteEvaluationError(ValueError):
    """A user-supplied reaction callback returned non-finite values."""


@dataclass(frozen=True)
class GrayScottParams:
    """Parameters of the normalized autocatalytic model.

    a : substrate supply rate, b : product drain rate, d : diffusion ratio
    of the substrate vs the autocatalyst, v1/v2 : advection velocities.
    """

    a: float
    b: float
    d: float = 6.0
    v1: float = 0.0
    v2: float = 0.0

    def __post_init__(self):
        if not (self.a > 0):
            raise ValueError("a must be positive")
        if self.b < 0:
            raise ValueError("b must be nonnegative")
        if not (self.d > 0):
            raise ValueError("d must be positive")
        if self.v1 < 0 or self.v2 < 0:
            raise ValueError("advection velocities must be nonnegative")

    @property
    def w(self):
        """Discriminant of the equilibrium: >= 0 iff a real one exists."""
        return 1.0 - 4.0 * (self.a + self.b) ** 2 / self.a


@dataclass(frozen=True)
class SystemSpec:
    """Linearized reaction-diffusion-advection system (A, D, V).

    A is the n x n reaction Jacobian, D and V hold the diagonal diffusion
    and advection coefficients.  Requires d_i > 0 and v_i >= 0.
    """

    A: np.ndarray
    D: np.ndarray
    V: np.ndarray
    origin: object = field(default="generic", compare=False)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, float))
        D = np.atleast_1d(np.asarray(self.D, float))
        V = np.atleast_1d(np.asarray(self.V, float))
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError("A must be square")
        if D.shape != (n,) or V.shape != (n,):
            raise ValueError("D and V must have one entry per species")
        if not np.all(np.isfinite(A)):
            raise ValueError("A must be finite")
        if np.any(D <= 0):
            raise ValueError("diffusion coefficients must be positive")
        if np.any(V < 0) or not np.all(np.isfinite(V)) or not np.all(np.isfinite(D)):
            raise ValueError("advection velocities must be finite and nonnegative")
        for name, arr in (("A", A), ("D", D), ("V", V)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self):
        return self.A.shape[0]

    def mode_matrix(self, zeta):
        """A - zeta^2 D + j zeta V, the generator of the Fourier mode."""
        return self.A - zeta**2 * np.diag(self.D) + 1j * zeta * np.diag(self.V)


def gray_scott_equilibrium(p: GrayScottParams):
    """Nontrivial homogeneous equilibrium (C1*, C2*).

    Only the branch with C1* = (1 - sqrt(w))/2 is exposed; raises
    NoRealEquilibriumError when w < 0.
    """
    w = p.w
    if w < 0:
        raise NoRealEquilibriumError(
            "no real nontrivial equilibrium: 4(a+b)^2 > a (w=%.4g)" % w
        )
    sw = np.sqrt(w)
    c1 = 0.5 * (1.0 - sw)
    c2 = p.a / (2.0 * (p.a + p.b)) * (1.0 + sw)
    return c1, c2


def gray_scott_reaction(c1, c2, p: GrayScottParams):
    """Pointwise reaction rates (dc1/dt, dc2/dt) without transport."""
    auto = c1 * c2**2
    return -auto + p.a * (1.0 - c1), auto - (p.a + p.b) * c2


def gray_scott_jacobian(p: GrayScottParams) -> SystemSpec:
    """Linearized system at the nontrivial equilibrium."""
    c1, c2 = gray_scott_equilibrium(p)
    A = np.array(
        [
            [-p.a - c2**2, -2.0 * c1 * c2],
            [c2**2, -(p.a + p.b) + 2.0 * c1 * c2],
        ]
    )
    return SystemSpec(A=A, D=np.array([p.d, 1.0]), V=np.array([p.v1, p.v2]), origin=p)


def numeric_jacobian(f, cbar, h=None):
    """Central-difference Jacobian of a reaction-rate callback at cbar."""
    cbar = np.asarray(cbar, float)
    if h is None:
        h = 1e-6 * (1.0 + np.max(np.abs(cbar)))
    n = len(cbar)
    f0 = np.asarray(f(cbar), float)
    if not np.all(np.isfinite(f0)):
        raise NonFiniteEvaluationError("reaction callback returned non-finite values")
    J = np.empty((len(f0), n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        fp = np.asarray(f(cbar + e), float)
        fm = np.asarray(f(cbar - e), float)
        if not (np.all(np.isfinite(fp)) and np.all(np.isfinite(fm))):
            raise NonFiniteEvaluationError(
                "reaction callback returned non-finite values"
            )
        J[:, j] = (fp - fm) / (2.0 * h)
    return J
