"""Shared random-instance generators for the test suite.

All generators take an explicit random.Random so every test run is
deterministic.  Actions are built in block form (unipotent part, fixed-
point-free part, coboundary coupling) and conjugated by random
unimodular matrices; the construction guarantees commutation and
unimodularity by shape, and the properties are still asserted wherever
the tests rely on them.
"""

import random
from itertools import product

from torlib.action_model import ZpAction
from torlib.exact_linalg import Mat, kernel_saturated, stack_all, vec_dot


def rand_unimodular(rng: random.Random, n: int, steps: int = 4, bound: int = 2) -> Mat:
    """Random product of elementary shears, swaps and sign flips."""
    m = Mat.identity(n)
    if n == 0:
        return m
    for _ in range(steps):
        kind = rng.randrange(3)
        rows = [list(r) for r in m.data]
        if kind == 0 and n >= 2:  # row shear
            i, j = rng.sample(range(n), 2)
            c = rng.choice([-2, -1, 1, 2])
            rows[i] = [a + c * b for a, b in zip(rows[i], rows[j])]
        elif kind == 1 and n >= 2:  # swap
            i, j = rng.sample(range(n), 2)
            rows[i], rows[j] = rows[j], rows[i]
        else:  # sign flip
            i = rng.randrange(n)
            rows[i] = [-a for a in rows[i]]
        cand = Mat(rows)
        if max(abs(x) for row in cand.data for x in row) <= bound:
            m = cand
    return m


def rand_commuting_unipotent(rng: random.Random, q: int, p: int) -> list[Mat]:
    """Commuting unipotent family: I + v_i w^T with w^T v_i = 0."""
    if q == 0:
        return [Mat.zeros(0, 0) for _ in range(p)]
    if q == 1 or rng.random() < 0.25:
        return [Mat.identity(q) for _ in range(p)]
    style = rng.randrange(2)
    if style == 0:
        # single unipotent with random powers
        base = Mat.identity(q)
        for _ in range(2):
            i, j = rng.sample(range(q), 2)
            if i > j or rng.random() < 0.5:
                rows = [list(r) for r in base.data]
                rows[i] = [a + rng.choice([-1, 1]) * b for a, b in zip(rows[i], rows[j])]
                cand = Mat(rows)
                eye = Mat.identity(q)
                if ((cand - eye) ** q).is_zero():
                    base = cand
        return [base ** rng.randint(-2, 2) for _ in range(p)]
    # rank-one shear plane: (I + v w^T)(I + v' w^T) = I + (v + v') w^T
    w = [0] * q
    w[rng.randrange(q)] = 1
    gens = []
    for _ in range(p):
        v = [rng.randint(-2, 2) for _ in range(q)]
        # force orthogonality to w
        idx = w.index(1)
        v[idx] = 0
        gens.append(Mat([[int(i == j) + v[i] * w[j] for j in range(q)]
                         for i in range(q)]))
    return gens


_FIXFREE_BLOCKS = [
    Mat([[-1]]),
    Mat([[0, -1], [1, 0]]),     # order 4 rotation
    Mat([[0, -1], [1, -1]]),    # order 3
    Mat([[2, 1], [1, 1]]),      # hyperbolic
    Mat([[1, 1], [1, 0]]),      # det -1 hyperbolic
]


def rand_fixfree(rng: random.Random, q: int, p: int, tries: int = 50) -> list[Mat]:
    """Commuting family on Z^q with no nonzero rational fixed vector."""
    if q == 0:
        return [Mat.zeros(0, 0) for _ in range(p)]
    for _ in range(tries):
        sizes = []
        left = q
        while left:
            s = rng.choice([1, 2]) if left >= 2 else 1
            sizes.append(s)
            left -= s
        blocks = [rng.choice([b for b in _FIXFREE_BLOCKS if b.rows == s])
                  for s in sizes]
        gens = []
        for _ in range(p):
            rows = []
            offset = 0
            diag = []
            for b in blocks:
                diag.append(b ** rng.randint(-2, 2))
            for bi, b in enumerate(diag):
                for r in range(b.rows):
                    row = [0] * q
                    off = sum(x.rows for x in diag[:bi])
                    for c in range(b.cols):
                        row[off + c] = b[r][c]
                    rows.append(row)
            gens.append(Mat(rows))
        eye = Mat.identity(q)
        if kernel_saturated(stack_all([g - eye for g in gens])).rank == 0:
            return gens
    raise RuntimeError("could not build a fixed-point-free family")


def rand_block_action(rng: random.Random, q: int, p: int,
                      conjugate: bool = True) -> tuple[ZpAction, int, int]:
    """Random commuting action assembled as [[A1,0],[V,A2]] and conjugated.

    Returns (action, q1, q2) where the block sizes are the ground truth
    used to build it (decompose may legally report a smaller q1 if the
    A1 part accidentally contains fixed-point-free directions, which the
    construction below avoids by keeping A1 unipotent).
    """
    q1 = rng.randint(1, q)
    q2 = q - q1
    a1 = rand_commuting_unipotent(rng, q1, p)
    a2 = rand_fixfree(rng, q2, p)
    w = Mat([[rng.randint(-2, 2) for _ in range(q1)] for _ in range(q2)],
            rows=q2, cols=q1)
    gens = []
    for i in range(p):
        v = w @ a1[i] - a2[i] @ w  # coboundary coupling, a valid 1-cocycle
        rows = []
        for r in range(q1):
            rows.append(list(a1[i][r]) + [0] * q2)
        for r in range(q2):
            rows.append(list(v[r]) + list(a2[i][r]))
        gens.append(Mat(rows))
    action = ZpAction(gens, q=q)
    if conjugate:
        pm = rand_unimodular(rng, q, steps=5)
        action = action.conjugate(pm)
    return action, q1, q2


def small_q_le3_corpus(rng: random.Random, count: int) -> list[ZpAction]:
    """Commuting actions on Z^q, q <= 3, entries in [-2,2], fix != 0."""
    out = []
    seen = set()
    while len(out) < count:
        q = rng.randint(1, 3)
        p = rng.choice([2, 3])
        action, _, _ = rand_block_action(rng, q, p)
        if max(abs(x) for g in action.gens for row in g.data for x in row) > 2:
            continue
        if action.fix_set().rank == 0:
            continue
        key = tuple(g.data for g in action.gens)
        if key in seen:
            continue
        seen.add(key)
        assert action.validate() == []
        out.append(action)
    return out
