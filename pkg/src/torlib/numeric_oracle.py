"""Independent cross-checks for the exact machinery.

Two flavors live here.

* Rational brute force.  For an affine action with all-rational
  translations, `finite_orbit_search` exhaustively scans a finite
  invariant grid for exact fixed points of phi(ell).  The grid
  (1/D) Z^q / Z^q uses

      D = (common denominator d of gamma(ell)) * E(ell),

  where E(ell) is the lcm of the nonzero invariant factors of
  A(ell) - I.  The refinement by E is what makes the search sound: if
  (A(ell) - I) x = N - gamma(ell) has any real solution, the Smith form
  of A(ell) - I produces one whose denominator divides d * E, so a
  fixed point exists on the torus iff one exists on the grid.  (With
  D = d alone the search can miss fixed points, e.g. the shear
  [[1,2],[0,1]] with translation (1/2, 0) is fixed exactly on the line
  y = 1/4.)  The grid is phi(ell)-invariant since A(ell) is integral
  and gamma(ell) lives in (1/d) Z^q.

* Float simulation.  `orbit_min_return` iterates the map in double
  precision and reports the closest return to the starting point.  The
  float path is advisory only; no decision procedure consumes it.

Torus distance is the max over coordinates of the distance to the
nearest integer.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import numpy as np

from .action_model import AffineZpAction
from .exact_linalg import IntVec, Mat, invariant_factors


class StateSpaceCapError(RuntimeError):
    """The sound search grid exceeds the configured cap."""


@dataclass(frozen=True)
class NumericAffineAction:
    """An affine action with its symbols substituted by numbers."""

    affine: AffineZpAction
    assignment: dict
    exact: bool  # True when every assigned value is rational

    @property
    def p(self) -> int:
        return self.affine.p

    @property
    def q(self) -> int:
        return self.affine.q

    def translation_of(self, ell: IntVec):
        gamma = self.affine.translation_of(ell)
        return tuple(x.substitute(self.assignment) for x in gamma)


def instantiate(affine: AffineZpAction, assignment: dict) -> NumericAffineAction:
    """Substitute pool symbols.  Rational values keep the action exact;
    any float value switches the whole instance to float mode.

    The symbols are declared Q-linearly independent, so a faithful
    numeric instantiation should use values independent over Q to good
    precision (e.g. square roots of distinct primes); this is the
    caller's responsibility.
    """
    used = {n for t in affine.trans for x in t for n, _ in x.coeffs}
    missing = used - set(assignment)
    if missing:
        raise KeyError(f"no value assigned to symbols {sorted(missing)}")
    cleaned: dict = {}
    exact = True
    for name, val in assignment.items():
        if isinstance(val, float):
            exact = False
            cleaned[name] = val
        else:
            cleaned[name] = Fraction(val)
    if not exact:
        cleaned = {n: float(v) for n, v in cleaned.items()}
    return NumericAffineAction(affine, cleaned, exact)


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b) if a and b else max(a, b, 1)


def sound_grid_denominator(action: NumericAffineAction, ell: IntVec) -> int:
    """The denominator D = d * E(ell) of the sound search grid."""
    gamma = action.translation_of(ell)
    d = 1
    for x in gamma:
        d = _lcm(d, Fraction(x).denominator)
    a = action.affine.linear.evaluate(ell)
    e = 1
    for f in invariant_factors(a - Mat.identity(action.q)):
        e = _lcm(e, f)
    return d * e


def finite_orbit_search(action: NumericAffineAction, ell: IntVec,
                        cap: int = 2_000_000) -> tuple[Fraction, ...] | None:
    """Exact fixed point of phi(ell) on the torus, or None.

    Exhaustive over the invariant grid (1/D) Z^q / Z^q with the sound
    denominator described in the module docstring; raises
    StateSpaceCapError when D^q exceeds `cap`.
    """
    if not action.exact:
        raise ValueError("finite_orbit_search requires rational mode")
    q = action.q
    dd = sound_grid_denominator(action, ell)
    if dd ** q > cap:
        raise StateSpaceCapError(f"grid size {dd}^{q} exceeds cap {cap}")
    a = action.affine.linear.evaluate(ell)
    gamma = action.translation_of(ell)
    # fixed iff (A - I) z + D*gamma == 0 (mod D) over residues z
    m = np.array([[int(a[i][j]) - int(i == j) for j in range(q)]
                  for i in range(q)], dtype=np.int64)
    g = np.array([int(Fraction(x) * dd) for x in gamma], dtype=np.int64)
    grids = np.meshgrid(*[np.arange(dd, dtype=np.int64) for _ in range(q)],
                        indexing="ij")
    z = np.stack([gr.ravel() for gr in grids], axis=1)  # (D^q, q)
    resid = (z @ m.T + g) % dd
    hits = np.nonzero(~resid.any(axis=1))[0]
    if hits.size == 0:
        return None
    best = z[hits[0]]
    return tuple(Fraction(int(x), dd) for x in best)


def torus_distance(x: np.ndarray, y: np.ndarray) -> float:
    d = np.abs(x - y) % 1.0
    return float(np.max(np.minimum(d, 1.0 - d))) if d.size else 0.0


def orbit_min_return(action: NumericAffineAction, ell: IntVec,
                     x0, n: int) -> tuple[float, int]:
    """min over j in 1..n of the torus distance phi(ell)^j x0 to x0.

    Returns (min_distance, argmin_j).  Deterministic given the
    assignment and x0; monotone non-increasing in n.  Advisory only.
    """
    a = action.affine.linear.evaluate(ell)
    gamma = action.translation_of(ell)
    am = np.array([[float(x) for x in row] for row in a.data], dtype=float)
    gv = np.array([float(x) for x in gamma], dtype=float)
    x_start = np.array([float(x) for x in x0], dtype=float) % 1.0
    x = x_start.copy()
    best = float("inf")
    best_j = 0
    for j in range(1, n + 1):
        x = (am @ x + gv) % 1.0
        d = torus_distance(x, x_start)
        if d < best:
            best = d
            best_j = j
            if best == 0.0:
                break
    return best, best_j


def orbit_points(action: NumericAffineAction, ell: IntVec, x0,
                 n: int) -> np.ndarray:
    """The orbit x0, phi(ell) x0, ..., phi(ell)^n x0 as an (n+1, q) array."""
    a = action.affine.linear.evaluate(ell)
    gamma = action.translation_of(ell)
    am = np.array([[float(x) for x in row] for row in a.data], dtype=float)
    gv = np.array([float(x) for x in gamma], dtype=float)
    out = np.empty((n + 1, action.q), dtype=float)
    x = np.array([float(v) for v in x0], dtype=float) % 1.0
    out[0] = x
    for j in range(1, n + 1):
        x = (am @ x + gv) % 1.0
        out[j] = x
    return out
