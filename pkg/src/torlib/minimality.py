"""Minimality analysis through the dual fixed lattice.

An affine action with translation cocycle gamma satisfies the
irrationality condition when for every nonzero k in the dual fixed
lattice (the common fixed vectors of the transposed generators) some
group element pairs with k non-integrally.  This is the algebraic
criterion used for minimality; the equivalence with topological
minimality is standard and cited in the README, not re-proved here.

Decision procedure.  For k in the dual lattice the pairing
<k, gamma(ell)> is additive in ell (the transposed action fixes k), so
integrality for all ell reduces to the generators; and the "bad" set

    B = {k : <k, gamma(e_i)> integral for all i}

pins down the decision: the condition holds iff B = 0.  B itself mixes
symbol and denominator constraints, but

    G0 = {k : every symbol coefficient of <k, gamma(e_i)> vanishes}

satisfies B <= G0 and d * G0 <= B for the common denominator d of the
rational parts, and both are subgroups, so B = 0 iff G0 = 0.  G0 is a
rational kernel: the check is a single exact rank computation, replacing
the unbounded quantifier over k.

The torus classifier covers unipotent actions on Z^3 presented in the
flag form (x, y, z) -> (x, mu x + y, om x + nu y + z).  Writing the two
shear homomorphisms mu, nu and the corner entry om per generator, the
cases are: nu = 0 with {mu, om} independent is liberable but never from
a minimal action (every compatible affine action is forced to translate
the first coordinate by 0); every other combination admits an explicit
minimal free witness, constructed below and verified by the freeness
box check plus the irrationality test.
"""

from __future__ import annotations

from dataclasses import dataclass

from .action_model import AffineZpAction, ZpAction
from .exact_linalg import Mat, saturate
from .liberation import (
    _construct_case_II,
    _construct_case_III,
    _construct_translations,
)
from .symbolic_reals import SymReal, SymbolPool, dot


class MinimalityError(ValueError):
    pass


@dataclass(frozen=True)
class MinimalClassification:
    kind: str  # not_liberable | liberable_not_minimal | minimal_liberable | unknown
    case: str | None = None
    reason: str | None = None
    action: AffineZpAction | None = None

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.case is not None:
            out["case"] = self.case
        if self.reason is not None:
            out["reason"] = self.reason
        if self.action is not None:
            out["action"] = self.action.to_json()
        return out


def irrationality_check(affine: AffineZpAction) -> bool:
    """True iff every nonzero dual fixed vector pairs non-integrally
    with some translation (see the module docstring for the reduction
    to a rank computation)."""
    gamma_lat = affine.linear.dual_fix_set()
    r = gamma_lat.rank
    if r == 0:
        return True
    names = affine.pool.names
    rows = []
    for i in range(affine.p):
        pairings = [dot(g, affine.trans[i]) for g in gamma_lat.basis]
        for s in names:
            rows.append([v.coeff(s) for v in pairings])
    if not rows:
        return False  # no symbols anywhere: every k in the lattice is bad
    m = Mat(rows, rows=len(rows), cols=r)
    return m.rank() == r


def is_minimal(affine: AffineZpAction) -> bool:
    """Alias of the irrationality criterion on the dual fixed lattice."""
    return irrationality_check(affine)


def _flag_form_parameters(action: ZpAction) -> tuple[list[int], list[int], list[int]]:
    for i, g in enumerate(action.gens):
        if g[0][1] != 0 or g[0][2] != 0 or g[1][2] != 0 or \
                any(g[r][r] != 1 for r in range(3)):
            raise MinimalityError(
                f"generator {i} is not in the flag form "
                "(x, mu x + y, om x + nu y + z)")
    mus = [int(g[1][0]) for g in action.gens]
    nus = [int(g[2][1]) for g in action.gens]
    oms = [int(g[2][0]) for g in action.gens]
    return mus, nus, oms


def _case_I_dependent_witness(action: ZpAction, mus: list[int],
                              oms: list[int]) -> AffineZpAction:
    """nu = 0 with mu, om proportional: one symbol rides the common
    direction and fresh symbols fill the other two coordinates."""
    p = action.p
    h = saturate([tuple(mus), tuple(oms)], p).basis[0]
    pool = SymbolPool()
    a = SymReal.symbol(pool, pool.add("a"))
    bs = [pool.fresh("b") for _ in range(p)]
    cs = [pool.fresh("c") for _ in range(p)]
    trans = []
    for i in range(p):
        trans.append((h[i] * a, SymReal.symbol(pool, bs[i]),
                      SymReal.symbol(pool, cs[i])))
    return AffineZpAction(action, pool, trans).require_valid()


def classify_minimal_T3(action: ZpAction, box: int = 4) -> MinimalClassification:
    """Classify a unipotent flag-form action on Z^3 by whether it is the
    linear part of a minimal free affine action on T^3."""
    action.require_valid()
    if action.q != 3:
        raise MinimalityError("classification requires q = 3")
    if not action.is_unipotent():
        return MinimalClassification(
            "unknown",
            reason="non-unipotent linear part: the minimal classification "
                   "implemented here covers the unipotent flag forms only")
    mus, nus, oms = _flag_form_parameters(action)
    p = action.p

    def checked(aff: AffineZpAction, case: str) -> MinimalClassification:
        bad = aff.free_box_check(box)
        if bad is not None:
            raise MinimalityError(f"constructed witness not free at {bad.ell}")
        if not irrationality_check(aff):
            raise MinimalityError("constructed witness fails the "
                                  "irrationality condition")
        return MinimalClassification("minimal_liberable", case=case, action=aff)

    if all(n == 0 for n in nus):
        if all(m == 0 for m in mus) and all(o == 0 for o in oms):
            aff, _ = _construct_translations(action)
            return checked(aff, "identity")
        if Mat([mus, oms], rows=2, cols=p).rank() == 2:
            return MinimalClassification(
                "liberable_not_minimal", case="I-independent",
                reason="with independent shear and corner homomorphisms the "
                       "kernels of the two span the whole group, forcing the "
                       "first translation coordinate of every compatible "
                       "affine action to vanish; the dual fixed vector "
                       "(1,0,0) then always pairs integrally")
        return checked(_case_I_dependent_witness(action, mus, oms),
                       "I-dependent")
    if all(m == 0 for m in mus):
        aff, _ = _construct_case_II(action, Mat.identity(3), nus, oms)
        rank = Mat([oms, nus], rows=2, cols=p).rank()
        return checked(aff, "II-independent" if rank == 2 else "II-dependent")
    aff, _ = _construct_case_III(action, Mat.identity(3), mus, nus, oms)
    return checked(aff, "III")
