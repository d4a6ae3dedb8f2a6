"""Sturm-sequence nonnegativity oracle.

Classical real-root counting: the number of sign variations of the Sturm
chain at the interval endpoints gives the count of distinct real roots.
Nonnegativity on an interval then reduces to isolating the roots and
probing the sign of the polynomial on each root-free subinterval, which
also produces an explicit witness point whenever the polynomial dips
negative.  This is fully independent of the semidefinite route and is
used to cross-validate every feasibility verdict.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .polycore import RealPoly

__all__ = [
    "NonnegResult",
    "DegenerateSequenceWarning",
    "sturm_chain",
    "sign_variations",
    "count_real_roots",
    "isolate_roots",
    "sturm_nonneg_oracle",
]


class DegenerateSequenceWarning(UserWarning):
    """Sturm chain degenerated numerically; fell back to grid sampling."""


@dataclass(frozen=True)
class NonnegResult:
    nonnegative: bool
    witness: float | None = None  # point with p(witness) < 0, when negative
    method: str = "sturm"

    def __bool__(self):
        return self.nonnegative


def sturm_chain(p: RealPoly):
    """Sturm sequence p, p', -rem(...), each rescaled to unit max
    coefficient (positive rescaling preserves all sign information)."""
    chain = [_normalize(p)]
    d = _normalize(p.deriv())
    if not d.is_zero():
        chain.append(d)
        while True:
            _, r = divmod(chain[-2], chain[-1])
            # chain entries are unit-scaled, so an absolute threshold works
            if r.is_zero() or float(np.max(np.abs(r.coeffs))) < 1e-10:
                break
            nxt = _normalize(-r)
            if not np.all(np.isfinite(nxt.coeffs)):
                raise ArithmeticError("degenerate Sturm sequence")
            chain.append(nxt)
            if len(chain) > p.degree + 2:
                raise ArithmeticError("Sturm sequence failed to terminate")
    return chain


def _normalize(p):
    if p.is_zero():
        return p
    return p * (1.0 / float(np.max(np.abs(p.coeffs))))


def sign_variations(chain, x, zero_tol=0.0):
    vals = [float(f(x)) for f in chain]
    signs = [v for v in vals if abs(v) > zero_tol]
    return sum(1 for a, b in zip(signs, signs[1:]) if a * b < 0)


def count_real_roots(chain, a, b):
    """Distinct real roots in the half-open interval (a, b]."""
    return sign_variations(chain, a) - sign_variations(chain, b)


def isolate_roots(p, a, b, chain=None, tol=1e-12, max_depth=200):
    """Disjoint intervals each containing exactly one distinct root in (a, b]."""
    chain = sturm_chain(p) if chain is None else chain
    out = []
    width_tol = tol * max(1.0, abs(a), abs(b))

    def recurse(lo, hi, count, depth):
        if count == 0:
            return
        if count == 1 or hi - lo < width_tol or depth > max_depth:
            out.append((lo, hi))
            return
        mid = 0.5 * (lo + hi)
        left = count_real_roots(chain, lo, mid)
        recurse(lo, mid, left, depth + 1)
        recurse(mid, hi, count - left, depth + 1)

    recurse(a, b, count_real_roots(chain, a, b), 0)
    return out


def refine_root(p, lo, hi, iters=100):
    """Bisection refinement inside an isolating interval."""
    flo = float(p(lo))
    if flo == 0:
        return lo
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = float(p(mid))
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def sturm_nonneg_oracle(delta: RealPoly, lo=None, hi=None) -> NonnegResult:
    """Decide delta >= 0 on the requested domain with a witness on failure.

    Domain is the whole real line when lo and hi are both None, [lo, inf)
    when only hi is None, and [lo, hi] otherwise.
    """
    delta = delta.chop(1e-14)
    if delta.is_zero():
        return NonnegResult(True)
    if delta.degree == 0:
        c = float(delta.coeffs[0])
        w = lo if lo is not None else 0.0
        return NonnegResult(c >= 0, None if c >= 0 else float(w))
    try:
        return _sturm_decide(delta, lo, hi)
    except ArithmeticError:
        warnings.warn(
            "Sturm sequence degenerated; falling back to dense sampling",
            DegenerateSequenceWarning,
        )
        return _grid_decide(delta, lo, hi)


def _domain_bounds(delta, lo, hi):
    bound = delta.cauchy_root_bound()
    a = -bound if lo is None else float(lo)
    b = bound if hi is None else float(hi)
    # widen so no root sits exactly on a synthetic endpoint
    if lo is None:
        a = min(a, -bound) * (1 + 1e-9) - 1e-9
    if hi is None:
        b = max(b, bound) * (1 + 1e-9) + 1e-9
    return a, b


def _sturm_decide(delta, lo, hi):
    lead = float(delta.coeffs[-1])
    unbounded_above = hi is None
    unbounded_below = lo is None and hi is None
    # behavior at infinity is set by the leading coefficient
    if unbounded_above and lead < 0:
        z = delta.cauchy_root_bound() * 2
        return NonnegResult(False, z, "sturm")
    if unbounded_below and delta.degree % 2 == 1:
        z = -delta.cauchy_root_bound() * 2
        return NonnegResult(False, z, "sturm")

    a, b = _domain_bounds(delta, lo, hi)
    if b <= a:
        raise ValueError("empty interval")
    chain = sturm_chain(delta)
    brackets = isolate_roots(delta, a, b, chain=chain)
    roots = sorted(refine_root(delta, l, h) for l, h in brackets)
    samples = [a, b]
    pts = [a] + roots + [b]
    samples += [0.5 * (u + v) for u, v in zip(pts, pts[1:]) if v > u]
    worst = min(samples, key=lambda z: float(delta(z)))
    if float(delta(worst)) < 0:
        return NonnegResult(False, float(worst), "sturm")
    return NonnegResult(True, None, "sturm")


def _grid_decide(delta, lo, hi, points=20001):
    a, b = _domain_bounds(delta, lo, hi)
    grid = np.linspace(a, b, points)
    vals = delta(grid)
    i = int(np.argmin(vals))
    if vals[i] < 0:
        return NonnegResult(False, float(grid[i]), "grid")
    return NonnegResult(True, None, "grid")
