"""Canonical splittings of a commuting unimodular action.

Two basis changes are computed here.

`decompose` conjugates the action into the block-lower-triangular shape

    P A(e_i) P^{-1} = [[A1(e_i), 0], [V(e_i), A2(e_i)]]

with A1 unipotent on the first q1 coordinates, A2 having no nonzero
rational fixed vector on the last q2 coordinates, and V an integer
1-cocycle over the pair (A1, A2):

    V(l + l') = V(l) A1(l') + A2(l) V(l').

The splitting comes from the joint Fitting decomposition: the first
block is the common generalized 1-eigenspace, the second the sum of the
images of (A(e_i) - I)^q.  For a single matrix these are the classical
kernel/image pair of the q-th power; for a commuting family the single
splittings refine each other because each factor is invariant under the
other generators, so intersecting kernels and summing images again
yields complementary invariant sublattices (property-tested over a
random conjugated corpus).

`unipotent_split` conjugates a unipotent action so its fixed lattice is
the last k coordinates:

    P U(e_i) P^{-1} = [[U1(e_i), 0], [V(e_i), I_k]].

Quotient coordinates always come first; P is built from a unimodular
basis completion of the invariant sublattice.
"""

from __future__ import annotations

from dataclasses import dataclass

from .action_model import ZpAction
from .exact_linalg import (
    Lattice,
    Mat,
    complete_to_unimodular,
    image_saturated,
    kernel_saturated,
    mat_to_json,
    stack_all,
)


class FixTrivialError(ValueError):
    """The action has no nonzero fixed vector, so there is no splitting."""


class NotUnipotentError(ValueError):
    pass


class DecompositionError(ValueError):
    pass


@dataclass(frozen=True)
class Decomposition:
    action: ZpAction          # the original action
    P: Mat                    # unimodular; blocks live in P A P^{-1}
    q1: int
    q2: int
    A1: ZpAction              # unipotent on Z^q1
    A2: ZpAction              # fixed-point free over Q on Z^q2
    Vgens: tuple[Mat, ...]    # q2 x q1 blocks, one per generator

    def block_matrix(self, i: int) -> Mat:
        return self.P @ self.action.gens[i] @ self.P.inverse()

    def to_json(self) -> dict:
        return {
            "P": mat_to_json(self.P),
            "q1": self.q1,
            "q2": self.q2,
            "A1": [mat_to_json(g) for g in self.A1.gens],
            "A2": [mat_to_json(g) for g in self.A2.gens],
            "V": [mat_to_json(v) for v in self.Vgens],
        }


@dataclass(frozen=True)
class UnipotentSplit:
    action: ZpAction          # the original unipotent action
    P: Mat
    k: int                    # rank of the fixed lattice
    U1: ZpAction              # unipotent on Z^(q-k)
    Vgens: tuple[Mat, ...]    # k x (q-k) blocks

    @property
    def q(self) -> int:
        return self.action.q

    def v_of(self, ell) -> Mat:
        """The V(ell) block of the conjugated matrix."""
        b = self.P @ self.action.evaluate(ell) @ self.P.inverse()
        return b.block(self.q - self.k, self.q, 0, self.q - self.k)

    def to_json(self) -> dict:
        return {
            "P": mat_to_json(self.P),
            "k": self.k,
            "U1": [mat_to_json(g) for g in self.U1.gens],
            "V": [mat_to_json(v) for v in self.Vgens],
        }


def fitting_split(action: ZpAction) -> tuple[Lattice, Lattice]:
    """Joint generalized 1-eigenspace W and its invariant complement L2.

    W is the saturation of the common kernel of (A(e_i) - I)^q; L2 the
    saturation of the sum of their images.  Both are invariant under
    every generator and their ranks add to q.
    """
    q = action.q
    eye = Mat.identity(q)
    powers = [((g - eye) ** q) for g in action.gens]
    if not powers:
        powers = [Mat.zeros(q, q)]
    w = kernel_saturated(stack_all(powers))
    columns = [m.col(j) for m in powers for j in range(q)]
    l2 = image_saturated(Mat.from_cols(columns, rows=q))
    return w, l2


def decompose(action: ZpAction) -> Decomposition:
    """Split off the unipotent quotient over the fixed-point-free part.

    Requires a nonzero fixed lattice.  The change of basis P is the
    inverse of a unimodular completion whose last q2 columns span L2,
    so the quotient coordinates come first.
    """
    action.require_valid()
    if action.fix_set().rank == 0:
        raise FixTrivialError("the action has only 0 as a fixed vector")
    w, l2 = fitting_split(action)
    q = action.q
    q2 = l2.rank
    q1 = q - q2
    qmat = complete_to_unimodular(l2)
    p = qmat.inverse()
    a1, a2, vs = [], [], []
    for g in action.gens:
        b = p @ g @ qmat
        if not b.block(0, q1, q1, q).is_zero():
            raise DecompositionError("complement block is not invariant")
        a1.append(b.block(0, q1, 0, q1))
        a2.append(b.block(q1, q, q1, q))
        vs.append(b.block(q1, q, 0, q1))
    dec = Decomposition(action, p, q1, q2,
                        ZpAction(a1, q=q1), ZpAction(a2, q=q2), tuple(vs))
    problems = verify_decomposition(action, dec)
    if problems:
        raise DecompositionError(f"internal invariant violated: {problems}")
    return dec


def unipotent_split(action: ZpAction) -> UnipotentSplit:
    """Conjugate a unipotent action so fix(U) is the last k coordinates."""
    action.require_valid()
    if not action.is_unipotent():
        raise NotUnipotentError("action is not unipotent")
    fix = action.fix_set()
    q, k = action.q, fix.rank
    qmat = complete_to_unimodular(fix)
    p = qmat.inverse()
    u1, vs = [], []
    for g in action.gens:
        b = p @ g @ qmat
        if not b.block(0, q - k, q - k, q).is_zero():
            raise DecompositionError("fixed block is not a direct summand")
        if not b.block(q - k, q, q - k, q).is_identity():
            raise DecompositionError("action is not trivial on its fixed lattice")
        u1.append(b.block(0, q - k, 0, q - k))
        vs.append(b.block(q - k, q, 0, q - k))
    return UnipotentSplit(action, p, k, ZpAction(u1, q=q - k), tuple(vs))


def verify_decomposition(action: ZpAction, dec: Decomposition) -> list[str]:
    """Recheck every invariant of a Decomposition; empty list means ok."""
    out = []
    if abs(dec.P.det()) != 1 or not dec.P.is_integral():
        out.append("unimodular")
        return out
    q, q1 = action.q, dec.q1
    pinv = dec.P.inverse()
    for i, g in enumerate(action.gens):
        b = dec.P @ g @ pinv
        ok = (b.block(0, q1, 0, q1) == dec.A1.gens[i]
              and b.block(0, q1, q1, q).is_zero()
              and b.block(q1, q, 0, q1) == dec.Vgens[i]
              and b.block(q1, q, q1, q) == dec.A2.gens[i])
        if not ok:
            out.append("block")
            break
    eye1 = Mat.identity(q1)
    if not all(((g - eye1) ** q1).is_zero() for g in dec.A1.gens):
        out.append("A1 unipotent")
    if dec.q2:
        eye2 = Mat.identity(dec.q2)
        stacked = stack_all([g - eye2 for g in dec.A2.gens])
        if kernel_saturated(stacked).rank != 0:
            out.append("A2 fixed-point-free")
    # the 1-cocycle identity on generator pairs, both orders
    for i in range(action.p):
        for j in range(action.p):
            if i == j:
                continue
            lhs = dec.Vgens[i] @ dec.A1.gens[j] + dec.A2.gens[i] @ dec.Vgens[j]
            rhs = dec.Vgens[j] @ dec.A1.gens[i] + dec.A2.gens[j] @ dec.Vgens[i]
            if lhs != rhs:
                out.append("cocycle")
                return out
    return out
