import random

import pytest

from conftest import rand_block_action
from torlib.action_model import ZpAction
from torlib.decomposition import (
    Decomposition,
    FixTrivialError,
    NotUnipotentError,
    decompose,
    fitting_split,
    unipotent_split,
    verify_decomposition,
)
from torlib.exact_linalg import Mat, kernel_saturated, mat_apply, stack_all

RNG = random.Random(777)

FLIPSHEAR = Mat([[1, 0], [1, -1]])
ROT90 = Mat([[0, -1], [1, 0]])
HYPER = Mat([[2, 1], [1, 1]])
SHEAR = Mat([[1, 0], [1, 1]])

# A(e1)(x, y1, y2) = (x, x - y2, y1) as a matrix on column vectors
MIX3 = Mat([[1, 0, 0], [1, 0, -1], [0, 1, 0]])


# ------------------------------------------------------------ fitting_split

def test_fitting_identity():
    w, l2 = fitting_split(ZpAction([Mat.identity(2)]))
    assert w.rank == 2 and l2.rank == 0


def test_fitting_flipshear():
    # (A-I)^2 = [[0,0],[-2,4]]: kernel span{(2,1)}, image span{(0,1)}
    w, l2 = fitting_split(ZpAction([FLIPSHEAR]))
    assert tuple(abs(x) for x in w.basis[0]) == (2, 1)
    assert tuple(abs(x) for x in l2.basis[0]) == (0, 1)


def test_fitting_block3():
    a = Mat([[1, 0, 0], [0, 0, -1], [0, 1, 0]])  # 1 + rot90
    w, l2 = fitting_split(ZpAction([a]))
    assert w.basis == ((1, 0, 0),)
    assert l2.rank == 2
    assert all(v[0] == 0 for v in l2.basis)


def test_fitting_ranks_complementary_random():
    for _ in range(40):
        q = RNG.randint(1, 5)
        action, _, _ = rand_block_action(RNG, q, RNG.randint(1, 3))
        w, l2 = fitting_split(action)
        assert w.rank + l2.rank == q
        # both invariant under every generator
        for g in action.gens:
            for v in w.basis + l2.basis:
                img = mat_apply(g, v)
                lat = w if v in w.basis else l2
                assert lat.contains(img)


# ------------------------------------------------------------ decompose

def test_decompose_flipshear():
    dec = decompose(ZpAction([FLIPSHEAR]))
    assert (dec.q1, dec.q2) == (1, 1)
    assert dec.P == Mat.identity(2)
    assert dec.A1.gens[0] == Mat([[1]])
    assert dec.A2.gens[0] == Mat([[-1]])
    assert dec.Vgens[0] == Mat([[1]])


def test_decompose_mix3():
    dec = decompose(ZpAction([MIX3]))
    assert (dec.q1, dec.q2) == (1, 2)
    assert dec.A1.gens[0] == Mat([[1]])
    assert dec.A2.gens[0] == ROT90
    assert dec.Vgens[0] == Mat([[1], [0]])


def test_decompose_fix_trivial():
    with pytest.raises(FixTrivialError):
        decompose(ZpAction([HYPER]))


def test_decompose_random_corpus():
    for _ in range(50):
        q = RNG.randint(1, 6)
        action, q1_truth, q2_truth = rand_block_action(RNG, q, RNG.randint(1, 3))
        if action.fix_set().rank == 0:
            continue
        dec = decompose(action)
        assert verify_decomposition(action, dec) == []
        assert (dec.q1, dec.q2) == (q1_truth, q2_truth)
        # round trip P^{-1} B P = A
        pinv = dec.P.inverse()
        for i, g in enumerate(action.gens):
            assert pinv @ dec.block_matrix(i) @ dec.P == g
        assert action.fix_set().rank <= dec.q1


# ------------------------------------------------------------ unipotent_split

def test_split_identity():
    sp = unipotent_split(ZpAction([Mat.identity(2)]))
    assert sp.k == 2
    assert sp.U1.q == 0
    assert all(v.rows == 2 and v.cols == 0 for v in sp.Vgens)


def test_split_shear():
    sp = unipotent_split(ZpAction([SHEAR]))
    assert sp.k == 1
    assert sp.U1.gens[0] == Mat([[1]])
    assert sp.Vgens[0] == Mat([[1]])


def test_split_case_three_pair():
    a1 = Mat([[1, 0, 0], [1, 1, 0], [0, 1, 1]])
    a2 = Mat([[1, 0, 0], [0, 1, 0], [1, 0, 1]])
    sp = unipotent_split(ZpAction([a1, a2]))
    assert sp.k == 1
    assert sp.U1.gens[0] == Mat([[1, 0], [1, 1]])
    assert sp.U1.gens[1] == Mat.identity(2)
    assert sp.Vgens[0] == Mat([[0, 1]])
    assert sp.Vgens[1] == Mat([[1, 0]])


def test_split_rejects_nonunipotent():
    with pytest.raises(NotUnipotentError):
        unipotent_split(ZpAction([FLIPSHEAR]))


def test_split_block_shape_random():
    for _ in range(30):
        q = RNG.randint(1, 5)
        gens = None
        from conftest import rand_commuting_unipotent, rand_unimodular
        gens = rand_commuting_unipotent(RNG, q, RNG.randint(1, 3))
        action = ZpAction(gens, q=q).conjugate(rand_unimodular(RNG, q))
        sp = unipotent_split(action)
        assert sp.k == action.fix_set().rank
        pinv = sp.P.inverse()
        eye_k = Mat.identity(sp.k)
        for i, g in enumerate(action.gens):
            b = sp.P @ g @ pinv
            assert b.block(0, q - sp.k, q - sp.k, q).is_zero()
            assert b.block(q - sp.k, q, q - sp.k, q) == eye_k
            assert b.block(0, q - sp.k, 0, q - sp.k) == sp.U1.gens[i]
            assert b.block(q - sp.k, q, 0, q - sp.k) == sp.Vgens[i]
        # V is a cocycle over U1 on generator pairs
        for i in range(action.p):
            for j in range(action.p):
                lhs = sp.Vgens[i] @ sp.U1.gens[j] + sp.Vgens[j]
                rhs = sp.Vgens[j] @ sp.U1.gens[i] + sp.Vgens[i]
                assert lhs == rhs


# ------------------------------------------------------------ verification

def test_verify_catches_tampered_v():
    dec = decompose(ZpAction([FLIPSHEAR]))
    bad = Decomposition(dec.action, dec.P, dec.q1, dec.q2, dec.A1, dec.A2,
                        (Mat([[2]]),))
    problems = verify_decomposition(dec.action, bad)
    assert problems and "block" in problems


def test_verify_catches_bad_p():
    dec = decompose(ZpAction([FLIPSHEAR]))
    bad = Decomposition(dec.action, Mat([[2, 0], [0, 1]]), dec.q1, dec.q2,
                        dec.A1, dec.A2, dec.Vgens)
    assert verify_decomposition(dec.action, bad) == ["unimodular"]


def test_verify_catches_cocycle_break():
    # two generators, tamper V of one so pair check fails
    rng = random.Random(5)
    while True:
        action, q1, q2 = rand_block_action(rng, 3, 2, conjugate=False)
        if q1 == 2 and q2 == 1 and action.fix_set().rank > 0:
            break
    dec = decompose(action)
    tampered = list(dec.Vgens)
    rows = [list(r) for r in tampered[0].data]
    rows[0][0] += 1
    tampered[0] = Mat(rows)
    bad = Decomposition(dec.action, dec.P, dec.q1, dec.q2, dec.A1, dec.A2,
                        tuple(tampered))
    assert "block" in verify_decomposition(dec.action, bad) \
        or "cocycle" in verify_decomposition(dec.action, bad)
