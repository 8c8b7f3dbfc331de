"""Linear Z^p-actions on Z^q and affine Z^p-actions on the torus T^q.

A linear action is a tuple of p commuting unimodular q x q integer
matrices, the images of the standard generators.  An affine action adds
one translation vector per generator, with entries in the Q-span of a
symbol pool; the per-generator data must satisfy the pairwise
compatibility identity

    (A(e_i) - I) gamma(e_j) == (A(e_j) - I) gamma(e_i)

which is exactly the condition for the generator translations to extend
to a translation cocycle gamma over the whole group.  Only genuine
cocycle lifts are represented here; raw lifts with integer 2-cocycle
defects are repaired by `cohomology.principalize`.

Everything is immutable and pure.  Box scans enumerate one vector per
{ell, -ell} pair (phi(-ell) is the inverse map, so it has the same fixed
points); the canonical representative has positive first nonzero
coordinate and "first violation" means first in ascending lexicographic
order over those representatives.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .exact_linalg import (
    IntVec,
    Lattice,
    Mat,
    kernel_saturated,
    mat_from_json,
    mat_to_json,
    stack_all,
)
from .symbolic_reals import (
    SymReal,
    SymVec,
    SymbolPool,
    dot,
    mat_apply_sym,
    sym_vec_add,
    sym_vec_from_json,
    sym_vec_to_json,
    sym_zero_vec,
)


class ValidationError(ValueError):
    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("; ".join(violations))


class ZpAction:
    """Action of Z^p on Z^q by commuting unimodular integer matrices."""

    def __init__(self, gens: list[Mat] | tuple[Mat, ...], q: int | None = None):
        self.gens = tuple(gens)
        self.p = len(self.gens)
        if self.gens:
            self.q = self.gens[0].rows
        elif q is not None:
            self.q = q
        else:
            raise ValueError("empty generator list needs explicit q")
        self._power_cache: list[dict[int, Mat]] = [
            {0: Mat.identity(self.q), 1: g} for g in self.gens]

    def validate(self) -> list[str]:
        """Return the list of violations (empty means valid)."""
        out = []
        for i, g in enumerate(self.gens):
            if g.rows != self.q or g.cols != self.q:
                out.append(f"generator {i}: wrong shape")
                continue
            if not g.is_integral():
                out.append(f"generator {i}: non-integer entries")
                continue
            if abs(g.det()) != 1:
                out.append(f"generator {i}: determinant {g.det()} (not unimodular)")
        for i in range(self.p):
            for j in range(i + 1, self.p):
                if self.gens[i] @ self.gens[j] != self.gens[j] @ self.gens[i]:
                    out.append(f"non-commuting pair ({i},{j})")
        return out

    def require_valid(self) -> "ZpAction":
        violations = self.validate()
        if violations:
            raise ValidationError(violations)
        return self

    def gen_power(self, i: int, n: int) -> Mat:
        cache = self._power_cache[i]
        if n not in cache:
            if n > 0:
                cache[n] = self.gen_power(i, n - 1) @ self.gens[i]
            else:
                if -1 not in cache:
                    cache[-1] = self.gens[i].inverse()
                cache[n] = self.gen_power(i, n + 1) @ cache[-1]
        return cache[n]

    def evaluate(self, ell: IntVec) -> Mat:
        """The matrix A(ell) = prod gens[i]^ell_i."""
        if len(ell) != self.p:
            raise ValueError(f"ell has length {len(ell)}, expected {self.p}")
        m = Mat.identity(self.q)
        for i, n in enumerate(ell):
            if n:
                m = m @ self.gen_power(i, n)
        return m

    def fix_set(self) -> Lattice:
        """Saturated lattice of vectors fixed by every generator."""
        if self.p == 0:
            return kernel_saturated(Mat.zeros(0, self.q))
        eye = Mat.identity(self.q)
        return kernel_saturated(stack_all([g - eye for g in self.gens]))

    def dual_fix_set(self) -> Lattice:
        """Saturated common kernel of the transposed generators minus I.

        This is the fixed lattice of the induced action on the first
        cohomology of the torus.  (It lives in Z^q: the action on
        H^1(T^q, Z) = Z^q is by transposes.)
        """
        if self.p == 0:
            return kernel_saturated(Mat.zeros(0, self.q))
        eye = Mat.identity(self.q)
        return kernel_saturated(stack_all([g.transpose() - eye for g in self.gens]))

    def is_unipotent(self) -> bool:
        eye = Mat.identity(self.q)
        return all(((g - eye) ** self.q).is_zero() for g in self.gens)

    def is_identity(self) -> bool:
        return all(g.is_identity() for g in self.gens)

    def conjugate(self, pmat: Mat) -> "ZpAction":
        """The action P A P^{-1} (pmat unimodular)."""
        pinv = pmat.inverse()
        return ZpAction([pmat @ g @ pinv for g in self.gens], q=self.q)

    def __eq__(self, other) -> bool:
        return isinstance(other, ZpAction) and self.q == other.q \
            and self.gens == other.gens

    def __repr__(self) -> str:
        return f"ZpAction(p={self.p}, q={self.q})"

    def to_json(self) -> dict:
        return {"p": self.p, "q": self.q,
                "generators": [mat_to_json(g) for g in self.gens]}

    @staticmethod
    def from_json(data: dict) -> "ZpAction":
        gens = [mat_from_json(g) for g in data["generators"]]
        return ZpAction(gens, q=data.get("q"))


@dataclass(frozen=True)
class HasFixedPoint:
    """phi(ell) has a fixed point on the torus."""
    ell: IntVec
    note: str

    @property
    def free(self) -> bool:
        return False


@dataclass(frozen=True)
class FreeAt:
    """phi(ell) is fixed-point free, certified by a dual vector.

    `dual` is an integer vector m with m^T (A(ell) - I) = 0 whose
    pairing with the translation gamma(ell) is not an integer.
    """
    ell: IntVec
    dual: IntVec
    pairing: SymReal

    @property
    def free(self) -> bool:
        return True


FixedPointReport = HasFixedPoint | FreeAt


class AffineZpAction:
    """Affine Z^p-action on T^q: linear part plus translation cocycle."""

    def __init__(self, linear: ZpAction, pool: SymbolPool,
                 trans: list[SymVec] | tuple[SymVec, ...]):
        self.linear = linear
        self.pool = pool
        self.trans = tuple(trans)
        self._axis_cache: list[dict[int, SymVec]] = [
            {0: sym_zero_vec(pool, linear.q), 1: t} for t in self.trans]

    @property
    def p(self) -> int:
        return self.linear.p

    @property
    def q(self) -> int:
        return self.linear.q

    def validate(self) -> list[str]:
        out = self.linear.validate()
        if len(self.trans) != self.linear.p:
            out.append("translation count differs from generator count")
            return out
        for i, t in enumerate(self.trans):
            if len(t) != self.linear.q:
                out.append(f"translation {i}: wrong length")
            for x in t:
                if x.pool is not self.pool:
                    out.append(f"translation {i}: foreign symbol pool")
                    break
        if out:
            return out
        eye = Mat.identity(self.linear.q)
        for i in range(self.p):
            for j in range(i + 1, self.p):
                lhs = mat_apply_sym(self.linear.gens[i] - eye, self.trans[j])
                rhs = mat_apply_sym(self.linear.gens[j] - eye, self.trans[i])
                if lhs != rhs:
                    out.append(f"incompatible translations for pair ({i},{j})")
        return out

    def require_valid(self) -> "AffineZpAction":
        violations = self.validate()
        if violations:
            raise ValidationError(violations)
        return self

    # -- the translation cocycle ------------------------------------------

    def _axis_translation(self, i: int, n: int) -> SymVec:
        """gamma(n * e_i), extended along one axis by the cocycle law."""
        cache = self._axis_cache[i]
        if n not in cache:
            if n > 0:
                prev = self._axis_translation(i, n - 1)
                step = mat_apply_sym(self.linear.gen_power(i, n - 1), self.trans[i])
                cache[n] = sym_vec_add(prev, step)
            else:
                pos = self._axis_translation(i, -n)
                cache[n] = tuple(-x for x in
                                 mat_apply_sym(self.linear.gen_power(i, n), pos))
        return cache[n]

    def translation_of(self, ell: IntVec) -> SymVec:
        """gamma(ell), independent of the expansion order by compatibility."""
        if len(ell) != self.p:
            raise ValueError("ell length mismatch")
        gamma = sym_zero_vec(self.pool, self.q)
        # gamma(l1 e1 + rest) = gamma(l1 e1) + A(l1 e1) gamma(rest)
        for i in range(self.p - 1, -1, -1):
            n = ell[i]
            if n == 0:
                continue
            head = self._axis_translation(i, n)
            gamma = sym_vec_add(head, mat_apply_sym(self.linear.gen_power(i, n), gamma))
        return gamma

    # -- fixed points -------------------------------------------------------

    def fixed_point_test(self, ell: IntVec) -> FixedPointReport:
        """Decide whether phi(ell) has a fixed point on T^q.

        With {m_1..m_r} a saturated basis of the integer left kernel of
        (A(ell) - I), a fixed point exists iff <m_j, gamma(ell)> is an
        integer for every j.  Saturation is essential: it makes
        N -> (<m_j, N>)_j map Z^q onto Z^r, so integer right-hand sides
        are exactly the attainable ones.
        """
        if all(x == 0 for x in ell):
            raise ValueError("fixed_point_test requires ell != 0")
        a = self.linear.evaluate(ell)
        lat = kernel_saturated((a - Mat.identity(self.q)).transpose())
        if lat.rank == 0:
            return HasFixedPoint(tuple(ell), "A(ell) - I is invertible over Q")
        gamma = self.translation_of(ell)
        for m in lat.basis:
            val = dot(m, gamma)
            if not val.is_integer():
                return FreeAt(tuple(ell), m, val)
        return HasFixedPoint(tuple(ell), "all dual pairings are integral")

    def free_box_check(self, box: int) -> HasFixedPoint | None:
        """First ell (canonical, lexicographic) whose map has a fixed point.

        Returns None when phi(ell) is fixed-point free for every nonzero
        ell with max-norm at most `box`.
        """
        for ell in box_representatives(self.p, box):
            report = self.fixed_point_test(ell)
            if not report.free:
                return report
        return None

    def conjugate_basis(self, pmat: Mat) -> "AffineZpAction":
        """Rewrite in new coordinates y = P x (linear part P A P^{-1})."""
        lin = self.linear.conjugate(pmat)
        trans = [mat_apply_sym(pmat, t) for t in self.trans]
        return AffineZpAction(lin, self.pool, trans)

    def __repr__(self) -> str:
        return f"AffineZpAction(p={self.p}, q={self.q}, symbols={len(self.pool)})"

    def to_json(self) -> dict:
        out = self.linear.to_json()
        out["symbols"] = list(self.pool.names)
        out["translations"] = [sym_vec_to_json(t) for t in self.trans]
        return out

    @staticmethod
    def from_json(data: dict) -> "AffineZpAction":
        linear = ZpAction.from_json(data)
        pool = SymbolPool(data.get("symbols", []))
        trans = [sym_vec_from_json(pool, t) for t in data["translations"]]
        return AffineZpAction(linear, pool, trans)


def box_representatives(p: int, box: int):
    """Nonzero ell with |ell|_inf <= box, first nonzero coordinate positive,
    in ascending lexicographic order."""
    for ell in product(range(-box, box + 1), repeat=p):
        for x in ell:
            if x > 0:
                yield ell
                break
            if x < 0:
                break


def linear_as_affine(action: ZpAction) -> AffineZpAction:
    """The purely linear action viewed as affine (zero translations)."""
    pool = SymbolPool()
    return AffineZpAction(action, pool, [sym_zero_vec(pool, action.q)
                                         for _ in range(action.p)])


def validate(action: ZpAction | AffineZpAction) -> list[str]:
    return action.validate()
