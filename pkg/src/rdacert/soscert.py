"""Sum-of-squares nonnegativity certificates via semidefinite feasibility.

Nonnegativity of a univariate polynomial on the whole line is decided by
searching for a positive semidefinite Gram matrix G whose antidiagonal
sums reproduce the coefficients (delta(z) = m(z)^T G m(z) with the
monomial vector m = [1, z, ..., z^l]).  Interval variants use the
classical weighted decompositions delta = m1^T K m1 + (1 - z^2) m2^T L m2
on [-1, 1] (after an affine change of variable) and
delta = m1^T K m1 + z m2^T L m2 on [0, inf) (after a shift).

Instead of a bare feasibility call, each problem maximizes the common
smallest eigenvalue t of the Gram blocks subject to the coefficient
equalities.  The equalities are always satisfiable (the canonical Gram
matrix is one solution), so the maximization is always solvable and its
sign decides the verdict: t* > 0 feasible, t* < 0 infeasible, |t*| tiny
numerically marginal.  Every returned certificate is re-verified
independently of the solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .polycore import RealPoly
from .sturm import sturm_nonneg_oracle  # noqa: F401  (re-exported oracle)

__all__ = [
    "SosCertificate",
    "FeasibilityVerdict",
    "SolverFailure",
    "ShapeMismatchError",
    "BadIntervalError",
    "canonical_gram",
    "prop1_feasibility",
    "prop2_finite",
    "prop2_semi_infinite",
    "verify_certificate",
    "sturm_nonneg_oracle",
]

EPS_PSD = 1e-8
EPS_RES_REL = 1e-7
MARGINAL_THRESHOLD = 1e-6


class SolverFailure(RuntimeError):
    """The SDP backend failed to converge (distinct from infeasibility)."""


class ShapeMismatchError(ValueError):
    """Certificate matrices do not match the target's Gram basis."""


class BadIntervalError(ValueError):
    """Interval bounds are not ordered lo < hi."""


def basis_len(deg):
    """l + 1 with l = ceil(deg/2)."""
    return -(-max(deg, 0) // 2) + 1


@dataclass(frozen=True)
class SosCertificate:
    """Machine-checkable nonnegativity certificate.

    kind is 'global', 'finite_interval' or 'semi_infinite'; G holds the
    single Gram matrix for the global kind, K/L the pair for interval
    kinds.  Interval bounds are recorded so the implied polynomial can be
    recomputed from scratch by verify_certificate.
    """

    kind: str
    G: np.ndarray | None = None
    K: np.ndarray | None = None
    L: np.ndarray | None = None
    lo: float | None = None
    hi: float | None = None
    min_eig: float = 0.0
    coeff_residual: float = 0.0
    eps_psd: float = EPS_PSD
    eps_res: float = 0.0

    def matrices(self):
        if self.kind == "global":
            return {"G": self.G}
        return {"K": self.K, "L": self.L}

    def to_dict(self):
        out = {
            "kind": self.kind,
            "min_eig": self.min_eig,
            "coeff_residual": self.coeff_residual,
            "tolerances": {"eps_psd": self.eps_psd, "eps_res": self.eps_res},
        }
        if self.lo is not None:
            out["lo"] = self.lo
        if self.hi is not None:
            out["hi"] = self.hi
        for name, m in self.matrices().items():
            if m is not None:
                out[name] = {"shape": list(m.shape), "data": m.ravel().tolist()}
        return out

    @classmethod
    def from_dict(cls, d):
        kw = {
            "kind": d["kind"],
            "min_eig": d.get("min_eig", 0.0),
            "coeff_residual": d.get("coeff_residual", 0.0),
            "lo": d.get("lo"),
            "hi": d.get("hi"),
        }
        tol = d.get("tolerances", {})
        kw["eps_psd"] = tol.get("eps_psd", EPS_PSD)
        kw["eps_res"] = tol.get("eps_res", 0.0)
        for name in ("G", "K", "L"):
            if name in d:
                m = d[name]
                kw[name] = np.asarray(m["data"], float).reshape(m["shape"])
        return cls(**kw)


@dataclass(frozen=True)
class FeasibilityVerdict:
    """Outcome of one semidefinite nonnegativity test."""

    status: str  # 'feasible' | 'infeasible' | 'numerically_marginal'
    certificate: SosCertificate | None = None
    margin: float = field(default=0.0)

    @property
    def feasible(self):
        return self.status == "feasible"

    def to_dict(self):
        out = {"status": self.status, "margin": self.margin}
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_dict()
        return out


def canonical_gram(target: RealPoly) -> np.ndarray:
    """Canonical Gram matrix M with m(z)^T M m(z) == target.

    Even coefficients sit on the diagonal, odd ones are split equally
    over the adjacent symmetric pair.
    """
    deg = max(target.degree, 0)
    n = basis_len(deg)
    M = np.zeros((n, n))
    for m in range(deg + 1):
        c = float(target.coeff(m))
        if c == 0:
            continue
        if m % 2 == 0:
            M[m // 2, m // 2] = c
        else:
            j = m // 2
            M[j, j + 1] += c / 2.0
            M[j + 1, j] += c / 2.0
    return M


def _antidiag_sums(G, length):
    """Coefficient vector implied by a Gram matrix (full antidiagonals)."""
    n = G.shape[0]
    out = np.zeros(length)
    for m in range(min(length, 2 * n - 1)):
        j0, j1 = max(0, m - n + 1), min(n, m + 1)
        out[m] = sum(G[j, m - j] for j in range(j0, j1))
    return out


# ---------------------------------------------------------------------------
# SDP backend


class CvxpyBackend:
    """Margin-maximization solves through cvxpy.

    Interface: a list of symmetric block sizes plus linear equality
    constraints tying antidiagonal structure to coefficients; returns the
    optimal margin t* and the blocks at the optimum.  Verdicts never
    trust this output alone; verify_certificate recomputes everything.
    """

    def __init__(self, solvers=("CLARABEL", "SCS")):
        self.solvers = solvers

    def solve_margin(self, block_sizes, equalities):
        """equalities: list of (terms, rhs); terms: (block, j, k, coeff)."""
        import cvxpy as cp

        blocks = [
            cp.Variable((s, s), symmetric=True) if s > 0 else None
            for s in block_sizes
        ]
        t = cp.Variable()
        cons = [B >> t * np.eye(B.shape[0]) for B in blocks if B is not None]
        for terms, rhs in equalities:
            expr = 0
            for b, j, k, coeff in terms:
                if blocks[b] is not None:
                    expr = expr + coeff * blocks[b][j, k]
            cons.append(expr == rhs)
        prob = cp.Problem(cp.Maximize(t), cons)
        last = None
        for name in self.solvers:
            try:
                prob.solve(solver=name)
            except Exception as exc:
                last = exc
                continue
            if prob.status in ("optimal", "optimal_inaccurate"):
                mats = [
                    None if B is None else np.asarray(B.value)
                    for B in blocks
                ]
                return float(t.value), mats, prob.status
        raise SolverFailure("all SDP backends failed (%s, last error: %s)"
                            % (", ".join(self.solvers), last))


_BACKEND = CvxpyBackend()


def set_backend(backend):
    """Swap the SDP backend (must expose solve_margin)."""
    global _BACKEND
    _BACKEND = backend


def _scaled(delta):
    sigma = float(np.max(np.abs(delta.coeffs)))
    if sigma == 0:
        sigma = 1.0
    return delta * (1.0 / sigma), sigma


def _classify(t_scaled, sigma, marginal):
    margin = t_scaled * sigma
    if abs(margin) < marginal:
        return "numerically_marginal", margin
    return ("feasible" if margin > 0 else "infeasible"), margin


def prop1_feasibility(delta: RealPoly, marginal_threshold=MARGINAL_THRESHOLD,
                      backend=None) -> FeasibilityVerdict:
    """Global nonnegativity test: exists G >= 0 with antidiagonal sums
    matching the coefficients of delta.

    Feasible certifies delta >= 0 on the whole real line; infeasible
    certifies delta < 0 somewhere (for univariate polynomials SOS and
    nonnegativity coincide).
    """
    delta = delta.chop()
    if delta.is_zero():
        cert = SosCertificate(kind="global", G=np.zeros((1, 1)))
        return FeasibilityVerdict("feasible", cert, margin=0.0)
    backend = backend or _BACKEND
    scaled, sigma = _scaled(delta)
    deg = scaled.degree
    nb = basis_len(deg)
    eqs = []
    for m in range(2 * nb - 1):
        terms = [(0, j, m - j, 1.0) for j in range(max(0, m - nb + 1), min(nb, m + 1))]
        eqs.append((terms, float(scaled.coeff(m))))
    try:
        t, (G,), status = backend.solve_margin([nb], eqs)
    except SolverFailure:
        return FeasibilityVerdict("numerically_marginal", None, margin=float("nan"))
    verdict, margin = _classify(t, sigma, marginal_threshold)
    if verdict == "infeasible":
        return FeasibilityVerdict(verdict, None, margin=margin)
    # feasible, or marginal where a valid non-strict certificate may still
    # exist (polynomials touching zero have optimal margin exactly 0)
    cert = _finish_global(G * sigma, delta)
    if not verify_certificate(cert, delta):
        return FeasibilityVerdict("numerically_marginal", cert, margin=margin)
    return FeasibilityVerdict("feasible", cert, margin=margin)


def _psd_repair(M):
    """Round tiny negative eigenvalues (solver noise on singular optima)
    up to zero; the coefficient-residual check catches any unsound
    rounding, so this cannot turn an invalid certificate valid."""
    if M.size == 0:
        return M
    lam, Q = np.linalg.eigh(M)
    if lam[0] >= 0 or lam[0] < -1e-6 * (1.0 + abs(lam).max()):
        return M
    return (Q * np.maximum(lam, 0.0)) @ Q.T


def _finish_global(G, delta):
    G = _psd_repair(0.5 * (G + G.T))
    implied = _antidiag_sums(G, delta.degree + 1)
    resid = _coeff_residual(implied, delta)
    return SosCertificate(
        kind="global",
        G=G,
        min_eig=float(np.linalg.eigvalsh(G).min()),
        coeff_residual=resid,
        eps_res=_eps_res(delta),
    )


def _eps_res(delta):
    return EPS_RES_REL * (1.0 + float(np.max(np.abs(delta.coeffs))) if not delta.is_zero() else 1.0)


def _coeff_residual(implied, delta):
    n = max(len(implied), delta.degree + 1)
    a = np.zeros(n)
    a[: len(implied)] = implied
    b = np.zeros(n)
    b[: delta.degree + 1] = delta.coeffs
    return float(np.max(np.abs(a - b))) if n else 0.0


def prop2_finite(delta: RealPoly, lo, hi, marginal_threshold=MARGINAL_THRESHOLD,
                 backend=None) -> FeasibilityVerdict:
    """Nonnegativity on the finite interval [lo, hi].

    Works on the affine pullback to [-1, 1] and searches for K, L >= 0
    with delta = m1^T K m1 + (1 - z^2) m2^T L m2.
    """
    if not lo < hi:
        raise BadIntervalError("need lo < hi, got [%g, %g]" % (lo, hi))
    delta = delta.chop()
    if delta.is_zero():
        cert = SosCertificate(kind="finite_interval", K=np.zeros((1, 1)),
                              L=np.zeros((1, 1)), lo=float(lo), hi=float(hi))
        return FeasibilityVerdict("feasible", cert, margin=0.0)
    backend = backend or _BACKEND
    # pull back to [-1, 1] first, then rescale: the affine map can shrink
    # coefficients by many orders of magnitude
    pulled, sigma = _scaled(delta.compose_affine(0.5 * (hi - lo), 0.5 * (hi + lo)))
    deg = delta.degree
    nb = basis_len(deg)
    nl = nb - 1
    eqs = []
    for m in range(2 * nb - 1):
        terms = [(0, j, m - j, 1.0) for j in range(max(0, m - nb + 1), min(nb, m + 1))]
        terms += [(1, j, m - j, 1.0) for j in range(max(0, m - nl + 1), min(nl, m + 1))]
        mm = m - 2
        terms += [(1, j, mm - j, -1.0) for j in range(max(0, mm - nl + 1), min(nl, mm + 1))]
        eqs.append((terms, float(pulled.coeff(m))))
    try:
        t, (K, L), status = backend.solve_margin([nb, nl], eqs)
    except SolverFailure:
        return FeasibilityVerdict("numerically_marginal", None, margin=float("nan"))
    verdict, margin = _classify(t, sigma, marginal_threshold)
    if verdict == "infeasible":
        return FeasibilityVerdict(verdict, None, margin=margin)
    K = 0.5 * (K + K.T) * sigma
    L = (0.5 * (L + L.T) * sigma) if L is not None else np.zeros((0, 0))
    cert = _finish_interval("finite_interval", K, L, delta, lo, hi)
    if not verify_certificate(cert, delta):
        return FeasibilityVerdict("numerically_marginal", cert, margin=margin)
    return FeasibilityVerdict("feasible", cert, margin=margin)


def prop2_semi_infinite(delta: RealPoly, lo, marginal_threshold=MARGINAL_THRESHOLD,
                        backend=None) -> FeasibilityVerdict:
    """Nonnegativity on [lo, inf).

    Shifts to [0, inf) and searches for K, L >= 0 with
    delta = m1^T K m1 + z m2^T L m2; L has l+1 rows for odd degree and l
    rows for even degree.
    """
    delta = delta.chop()
    if delta.is_zero():
        cert = SosCertificate(kind="semi_infinite", K=np.zeros((1, 1)),
                              L=np.zeros((1, 1)), lo=float(lo))
        return FeasibilityVerdict("feasible", cert, margin=0.0)
    backend = backend or _BACKEND
    shifted, sigma = _scaled(delta.compose_affine(1.0, float(lo)))
    deg = delta.degree
    nb = basis_len(deg)
    nl = nb if deg % 2 else nb - 1
    ncoef = max(2 * nb - 1, 2 * nl)
    eqs = []
    for m in range(ncoef):
        terms = [(0, j, m - j, 1.0) for j in range(max(0, m - nb + 1), min(nb, m + 1))]
        mm = m - 1
        terms += [(1, j, mm - j, 1.0) for j in range(max(0, mm - nl + 1), min(nl, mm + 1))]
        eqs.append((terms, float(shifted.coeff(m))))
    try:
        t, (K, L), status = backend.solve_margin([nb, nl], eqs)
    except SolverFailure:
        return FeasibilityVerdict("numerically_marginal", None, margin=float("nan"))
    verdict, margin = _classify(t, sigma, marginal_threshold)
    if verdict == "infeasible":
        return FeasibilityVerdict(verdict, None, margin=margin)
    K = 0.5 * (K + K.T) * sigma
    L = (0.5 * (L + L.T) * sigma) if L is not None else np.zeros((0, 0))
    cert = _finish_interval("semi_infinite", K, L, delta, lo, None)
    if not verify_certificate(cert, delta):
        return FeasibilityVerdict("numerically_marginal", cert, margin=margin)
    return FeasibilityVerdict("feasible", cert, margin=margin)


def _finish_interval(kind, K, L, delta, lo, hi):
    K = _psd_repair(K)
    L = _psd_repair(L)
    implied = _implied_coeffs(kind, K, L)
    target = _transformed_target(kind, delta, lo, hi)
    resid = _coeff_residual(implied, target)
    eigs = [np.linalg.eigvalsh(M).min() for M in (K, L) if M.size]
    return SosCertificate(
        kind=kind,
        K=K,
        L=L,
        lo=float(lo),
        hi=None if hi is None else float(hi),
        min_eig=float(min(eigs)) if eigs else 0.0,
        coeff_residual=resid,
        eps_res=_eps_res(target),
    )


def _implied_coeffs(kind, K, L):
    nb = K.shape[0]
    nl = L.shape[0]
    length = max(2 * nb - 1, 2 * nl + 1)
    out = _antidiag_sums(K, length)
    if nl:
        ql = _antidiag_sums(L, length)
        if kind == "finite_interval":
            out = out + ql - np.concatenate([[0.0, 0.0], ql[:-2]])
        else:
            out = out + np.concatenate([[0.0], ql[:-1]])
    return out


def _transformed_target(kind, delta, lo, hi):
    if kind == "global":
        return delta
    if kind == "finite_interval":
        return delta.compose_affine(0.5 * (hi - lo), 0.5 * (hi + lo))
    return delta.compose_affine(1.0, float(lo))


def verify_certificate(cert: SosCertificate, target: RealPoly,
                       eps_psd=EPS_PSD, eps_res=None) -> bool:
    """Solver-independent certificate check.

    Recomputes the polynomial implied by the Gram blocks, compares it
    coefficient-wise against the (transformed) target and checks every
    block for positive semidefiniteness within eps_psd.
    """
    if cert.kind == "global":
        if cert.G is None:
            raise ShapeMismatchError("global certificate needs G")
        mats = [cert.G]
        need = basis_len(max(target.degree, 0))
        if cert.G.shape[0] != need:
            raise ShapeMismatchError(
                "Gram basis %d does not match target (%d)" % (cert.G.shape[0], need)
            )
        implied = _antidiag_sums(cert.G, max(target.degree + 1, 2 * need - 1))
        tpoly = target
    elif cert.kind in ("finite_interval", "semi_infinite"):
        if cert.K is None or cert.L is None:
            raise ShapeMismatchError("interval certificate needs K and L")
        if cert.kind == "finite_interval" and cert.hi is None:
            raise ShapeMismatchError("finite interval certificate needs hi")
        mats = [M for M in (cert.K, cert.L) if M.size]
        implied = _implied_coeffs(cert.kind, cert.K, cert.L)
        tpoly = _transformed_target(cert.kind, target, cert.lo, cert.hi)
    else:
        raise ShapeMismatchError("unknown certificate kind %r" % cert.kind)
    if eps_res is None:
        eps_res = _eps_res(tpoly)
    if _coeff_residual(implied, tpoly) > eps_res:
        return False
    for M in mats:
        if M.shape[0] != M.shape[1] or not np.allclose(M, M.T, atol=1e-9 * (1 + np.abs(M).max())):
            return False
        if np.linalg.eigvalsh(M).min() < -eps_psd:
            return False
    return True
