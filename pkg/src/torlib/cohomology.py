"""Coboundary solvers for the coupling cocycle and for affine lifts.

Three solvers live here.

* ``solve_coboundary_rational``: given a decomposition with blocks
  (A1, A2, V), find a rational matrix W0 with

      V(e_i) = W0 A1(e_i) - A2(e_i) W0     for every generator.

  Solvability is guaranteed for valid decompositions (A1 unipotent and
  A2 without rational fixed vectors make the relevant bimodule
  cohomology vanish), so failure signals corrupted input.

* ``solve_coboundary_integral``: the same identity over Z, which may
  legitimately have no solution.  When it does, conjugating by
  H(x, y) = (x, -W0 x + y) block-diagonalizes the action exactly.

* ``lift_beta``: the second-block translation of a lifted affine
  action.  The closed form beta = W0 o alpha satisfies the lift
  equation on generators whenever alpha is a generator cocycle over A1;
  the identity is checked, never assumed.  (This replaces materializing
  the 2-cocycle (l, l') -> -V(l) alpha(l') whose triviality powers the
  existence argument: substituting the coboundary identity for V turns
  that argument into this finite formula.)

* ``principalize``: repair a raw affine lift whose generator data has
  integer compatibility defects, producing a genuine cocycle lift that
  defines the same torus action.  The correction solves

      (A(e_i) - I) d_j - (A(e_j) - I) d_i = k_ij

  for rational d and subtracts it.  Torsion of the defect class in the
  integral 2-cohomology guarantees solvability for genuine torus
  actions; if the linear system is still inconsistent we report that
  rather than asserting impossibility.

Sylvester-type systems are vectorized column-major (unknown matrix
columns concatenated top to bottom), which fixes pivot order and makes
serialized solutions reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .action_model import AffineZpAction, ZpAction
from .decomposition import Decomposition
from .exact_linalg import (
    IntVec,
    Mat,
    mat_to_json,
    solve_diophantine,
    solve_rational,
)
from .symbolic_reals import (
    SymVec,
    SymbolPool,
    mat_apply_sym,
    sym_vec_add,
    sym_vec_is_integral,
    sym_vec_sub,
)


class InconsistentSystemError(ValueError):
    pass


class NonIntegerDefectError(ValueError):
    pass


@dataclass(frozen=True)
class CoboundarySolution:
    W0: Mat                     # rational q2 x q1, always present
    integral: Mat | None        # integer solution when one exists

    def conjugator(self) -> Mat | None:
        """H with H B H^{-1} block-diagonal, when the integral solution
        exists: H(x, y) = (x, -W0 x + y)."""
        if self.integral is None:
            return None
        q1, q2 = self.W0.cols, self.W0.rows
        rows = []
        for r in range(q1):
            rows.append([int(r == c) for c in range(q1)] + [0] * q2)
        for r in range(q2):
            rows.append([-x for x in self.integral[r]] +
                        [int(r == c) for c in range(q2)])
        return Mat(rows)

    def to_json(self) -> dict:
        return {
            "W0": mat_to_json(self.W0),
            "integral": mat_to_json(self.integral) if self.integral else None,
        }


def _sylvester_system(dec: Decomposition) -> tuple[Mat, tuple[int, ...]]:
    """Stacked  (A1(e_i)^T (x) I  -  I (x) A2(e_i))  blocks and rhs.

    Column-major vectorization: unknown w = vec(W0) lists the columns of
    W0 top to bottom, so W0 A1 contributes A1^T (x) I and A2 W0
    contributes I (x) A2.
    """
    q1, q2 = dec.q1, dec.q2
    nunk = q1 * q2
    rows: list[list[int]] = []
    rhs: list[int] = []
    for g in range(dec.action.p):
        a1 = dec.A1.gens[g]
        a2 = dec.A2.gens[g]
        v = dec.Vgens[g]
        for col in range(q1):        # block of equations for column `col` of V
            for r in range(q2):
                row = [0] * nunk
                # (W0 A1)[r][col] = sum_k W0[r][k] A1[k][col]
                for k in range(q1):
                    row[k * q2 + r] += a1[k][col]
                # (A2 W0)[r][col] = sum_k A2[r][k] W0[k][col]
                for k in range(q2):
                    row[col * q2 + k] -= a2[r][k]
                rows.append(row)
                rhs.append(v[r][col])
    return Mat(rows, rows=len(rows), cols=nunk), tuple(rhs)


def _unvec(w, q2: int, q1: int) -> Mat:
    return Mat([[w[c * q2 + r] for c in range(q1)] for r in range(q2)],
               rows=q2, cols=q1)


def solve_coboundary_rational(dec: Decomposition) -> CoboundarySolution:
    """Rational W0 with V(e_i) = W0 A1(e_i) - A2(e_i) W0, plus the
    integral solution when one exists.  The residual is rechecked to be
    exactly zero."""
    if dec.q1 == 0 or dec.q2 == 0:
        w0 = Mat.zeros(dec.q2, dec.q1)
        return CoboundarySolution(w0, w0)
    system, rhs = _sylvester_system(dec)
    sol = solve_rational(system, rhs)
    if sol is None:
        raise InconsistentSystemError(
            "coboundary system inconsistent: the decomposition violates "
            "its invariants")
    w0 = _unvec(sol[0], dec.q2, dec.q1)
    for i in range(dec.action.p):
        residual = dec.Vgens[i] - (w0 @ dec.A1.gens[i] - dec.A2.gens[i] @ w0)
        if not residual.is_zero():
            raise InconsistentSystemError("nonzero residual after solve")
    integral = solve_diophantine(system, rhs)
    w0z = _unvec(integral, dec.q2, dec.q1) if integral is not None else None
    return CoboundarySolution(w0, w0z)


def solve_coboundary_integral(dec: Decomposition) -> Mat | None:
    """Integer W0 for the same identity, or None (a legitimate outcome)."""
    return solve_coboundary_rational(dec).integral


def block_diagonalized(dec: Decomposition) -> tuple[ZpAction, Mat] | None:
    """When the integral solution exists, the conjugated block-diagonal
    action diag(A1, A2) together with the conjugating matrix H."""
    sol = solve_coboundary_rational(dec)
    h = sol.conjugator()
    if h is None:
        return None
    hinv = h.inverse()
    gens = []
    for i in range(dec.action.p):
        b = dec.block_matrix(i)
        gens.append(h @ b @ hinv)
    return ZpAction(gens, q=dec.action.q), h


def lift_beta(dec: Decomposition, alpha_gens: list[SymVec] | tuple[SymVec, ...],
              solution: CoboundarySolution | None = None) -> list[SymVec]:
    """Second-block translations beta(e_i) = W0 alpha(e_i).

    `alpha_gens` must be a generator cocycle over A1, i.e. satisfy
    alpha(e_i) + A1(e_i) alpha(e_j) symmetric in (i, j).  The lift
    identity for beta on generator pairs,

        beta(e_i) + A2(e_i) beta(e_j) + V(e_i) alpha(e_j)  symmetric,

    is an algebraic consequence of the coboundary identity; it is
    verified here and a failure raises.
    """
    if len(alpha_gens) != dec.action.p:
        raise ValueError("one alpha per generator required")
    for i in range(dec.action.p):
        for j in range(i + 1, dec.action.p):
            lhs = sym_vec_add(alpha_gens[i],
                              mat_apply_sym(dec.A1.gens[i], alpha_gens[j]))
            rhs = sym_vec_add(alpha_gens[j],
                              mat_apply_sym(dec.A1.gens[j], alpha_gens[i]))
            if lhs != rhs:
                raise InconsistentSystemError(
                    f"alpha is not a generator cocycle over A1 (pair {i},{j})")
    sol = solution if solution is not None else solve_coboundary_rational(dec)
    betas = [mat_apply_sym(sol.W0, a) for a in alpha_gens]
    for i in range(dec.action.p):
        for j in range(i + 1, dec.action.p):
            lhs = sym_vec_add(sym_vec_add(
                betas[i], mat_apply_sym(dec.A2.gens[i], betas[j])),
                mat_apply_sym(dec.Vgens[i], alpha_gens[j]))
            rhs = sym_vec_add(sym_vec_add(
                betas[j], mat_apply_sym(dec.A2.gens[j], betas[i])),
                mat_apply_sym(dec.Vgens[j], alpha_gens[i]))
            if lhs != rhs:
                raise InconsistentSystemError(
                    f"beta lift identity failed on pair ({i},{j})")
    return betas


def compatibility_defects(linear: ZpAction,
                          rawtrans: list[SymVec] | tuple[SymVec, ...]) -> dict:
    """Defects k_ij = (A(e_i)-I) gamma_j - (A(e_j)-I) gamma_i per pair."""
    eye = Mat.identity(linear.q)
    out = {}
    for i in range(linear.p):
        for j in range(i + 1, linear.p):
            d = sym_vec_sub(mat_apply_sym(linear.gens[i] - eye, rawtrans[j]),
                            mat_apply_sym(linear.gens[j] - eye, rawtrans[i]))
            out[(i, j)] = d
    return out


def principalize(linear: ZpAction, rawtrans: list[SymVec] | tuple[SymVec, ...],
                 defects: dict[tuple[int, int], IntVec] | None = None,
                 pool: SymbolPool | None = None) -> AffineZpAction:
    """Correct a raw affine lift with integer compatibility defects.

    The raw generator data must define a genuine affine torus action:
    each pairwise defect must be an integer vector (symbol parts cancel
    exactly).  A rational correction d_i per generator is solved for and
    subtracted, giving translations gamma_i - d_i that satisfy the exact
    cocycle compatibility.  Inconsistency of the linear system is
    reported with the unsolved pair structure rather than asserted
    impossible.
    """
    linear.require_valid()
    p, q = linear.p, linear.q
    if pool is None:
        pool = rawtrans[0][0].pool if (rawtrans and rawtrans[0]) else SymbolPool()
    actual = compatibility_defects(linear, rawtrans)
    int_defects: dict[tuple[int, int], IntVec] = {}
    for key, dvec in actual.items():
        if not sym_vec_is_integral(dvec):
            raise NonIntegerDefectError(
                f"defect for pair {key} is not an integer vector: {dvec}")
        int_defects[key] = tuple(int(x.const) for x in dvec)
    if defects is not None:
        for key, expect in defects.items():
            if tuple(expect) != int_defects.get(key, tuple([0] * q)):
                raise NonIntegerDefectError(
                    f"declared defect for pair {key} does not match the data")
    pairs = sorted(int_defects)
    if not pairs or all(all(x == 0 for x in int_defects[k]) for k in pairs):
        return AffineZpAction(linear, pool, list(rawtrans)).require_valid()
    # unknowns: delta_0 .. delta_{p-1} stacked (p*q rationals)
    eye = Mat.identity(q)
    rows: list[list[int]] = []
    rhs: list[int] = []
    for (i, j) in pairs:
        ai = linear.gens[i] - eye
        aj = linear.gens[j] - eye
        for r in range(q):
            row = [0] * (p * q)
            for cidx in range(q):
                row[j * q + cidx] += ai[r][cidx]
                row[i * q + cidx] -= aj[r][cidx]
            rows.append(row)
            rhs.append(int_defects[(i, j)][r])
    sol = solve_rational(Mat(rows, rows=len(rows), cols=p * q), tuple(rhs))
    if sol is None:
        raise InconsistentSystemError(
            f"defect correction system is inconsistent for pairs {pairs}")
    deltas = [sol[0][i * q:(i + 1) * q] for i in range(p)]
    corrected = []
    for i in range(p):
        corrected.append(tuple(x - Fraction(d) for x, d in
                               zip(rawtrans[i], deltas[i])))
    return AffineZpAction(linear, pool, corrected).require_valid()
