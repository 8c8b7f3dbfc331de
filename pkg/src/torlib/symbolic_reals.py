"""Exact arithmetic in the Q-span of 1 and a pool of formal symbols.

A :class:`SymReal` is c0 + sum_s c_s * xi_s with rational coefficients
over symbols declared Q-linearly independent.  Every "irrational number"
used by a construction in this library is such a symbol, which makes
membership tests (is this value an integer? rational?) decidable: they
reduce to inspecting coefficients.

The declared semantic of a pool is "algebraically independent
transcendentals".  Numeric instantiation (see `numeric_oracle`) should
substitute values that are Q-linearly independent to good precision;
this is documented, not enforced.

Products of two genuinely symbolic values are rejected: no construction
here needs them, and keeping the model linear keeps the membership tests
sound.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

from .exact_linalg import Mat, Scalar, rat_from_str, rat_to_str


class PoolMismatchError(ValueError):
    pass


class NonLinearError(ValueError):
    """Raised on a product of two symbolic values."""


class SymbolPool:
    """Ordered, append-only collection of symbol names."""

    def __init__(self, names: Iterable[str] = ()):
        self._names: list[str] = []
        self._index: dict[str, int] = {}
        for n in names:
            self.add(n)

    def add(self, name: str) -> str:
        if name in self._index:
            raise ValueError(f"duplicate symbol {name!r}")
        self._index[name] = len(self._names)
        self._names.append(name)
        return name

    def fresh(self, prefix: str) -> str:
        k = 1
        while f"{prefix}{k}" in self._index:
            k += 1
        return self.add(f"{prefix}{k}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self._names)

    def index(self, name: str) -> int:
        return self._index[name]

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __len__(self) -> int:
        return len(self._names)

    def __repr__(self) -> str:
        return f"SymbolPool({self._names!r})"


class SymReal:
    """Immutable element const + sum of coeff * symbol over one pool."""

    __slots__ = ("pool", "const", "coeffs")

    def __init__(self, pool: SymbolPool, const: Scalar = 0,
                 coeffs: Mapping[str, Scalar] | None = None):
        self.pool = pool
        self.const = Fraction(const)
        clean: dict[str, Fraction] = {}
        for name, c in (coeffs or {}).items():
            if name not in pool:
                raise PoolMismatchError(f"symbol {name!r} not in pool")
            c = Fraction(c)
            if c != 0:
                clean[name] = c
        # stored sorted by pool order so equal values hash equal
        self.coeffs = tuple(sorted(clean.items(), key=lambda kv: pool.index(kv[0])))

    # -- helpers ---------------------------------------------------------

    @staticmethod
    def symbol(pool: SymbolPool, name: str, coeff: Scalar = 1) -> "SymReal":
        return SymReal(pool, 0, {name: coeff})

    @staticmethod
    def rational(pool: SymbolPool, value: Scalar) -> "SymReal":
        return SymReal(pool, value)

    def coeff(self, name: str) -> Fraction:
        for n, c in self.coeffs:
            if n == name:
                return c
        return Fraction(0)

    def coeff_map(self) -> dict[str, Fraction]:
        return dict(self.coeffs)

    def _check(self, other: "SymReal") -> None:
        if self.pool is not other.pool:
            raise PoolMismatchError("operands belong to different symbol pools")

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, SymReal):
            self._check(other)
            merged = dict(self.coeffs)
            for n, c in other.coeffs:
                merged[n] = merged.get(n, Fraction(0)) + c
            return SymReal(self.pool, self.const + other.const, merged)
        return SymReal(self.pool, self.const + Fraction(other), dict(self.coeffs))

    __radd__ = __add__

    def __neg__(self):
        return SymReal(self.pool, -self.const, {n: -c for n, c in self.coeffs})

    def __sub__(self, other):
        if isinstance(other, SymReal):
            return self + (-other)
        return self + (-Fraction(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, SymReal):
            self._check(other)
            if other.coeffs and self.coeffs:
                raise NonLinearError("product of two symbolic values is unsupported")
            if other.coeffs:
                return other * self.const
            other = other.const
        c = Fraction(other)
        return SymReal(self.pool, self.const * c, {n: co * c for n, co in self.coeffs})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if isinstance(other, SymReal):
            return self.pool is other.pool and self.const == other.const \
                and self.coeffs == other.coeffs
        return not self.coeffs and self.const == other

    def __hash__(self):
        return hash((id(self.pool), self.const, self.coeffs))

    # -- membership tests --------------------------------------------------

    def is_rational(self) -> bool:
        return not self.coeffs

    def is_integer(self) -> bool:
        return not self.coeffs and self.const.denominator == 1

    def is_zero(self) -> bool:
        return not self.coeffs and self.const == 0

    # -- substitution & formatting ------------------------------------------

    def substitute(self, assignment: Mapping[str, Scalar | float]):
        """Value under a full symbol assignment (exact when all rational)."""
        exact = self.const
        for n, c in self.coeffs:
            if n not in assignment:
                raise KeyError(f"no value assigned to symbol {n!r}")
            val = assignment[n]
            if isinstance(val, float):
                return float(exact) + float(sum(float(c2) * float(assignment[n2])
                                                for n2, c2 in self.coeffs))
            exact += c * Fraction(val)
        return exact

    def __repr__(self) -> str:
        parts = []
        if self.const or not self.coeffs:
            parts.append(rat_to_str(self.const))
        for n, c in self.coeffs:
            if c == 1:
                parts.append(n)
            else:
                parts.append(f"{rat_to_str(c)}*{n}")
        return " + ".join(parts).replace("+ -", "- ")

    # -- serialization -------------------------------------------------------

    def to_json(self) -> dict:
        out: dict = {"rat": rat_to_str(self.const)}
        if self.coeffs:
            out["sym"] = {n: rat_to_str(c) for n, c in self.coeffs}
        return out

    @staticmethod
    def from_json(pool: SymbolPool, data: dict) -> "SymReal":
        const = rat_from_str(data.get("rat", "0"))
        coeffs = {n: rat_from_str(c) for n, c in data.get("sym", {}).items()}
        return SymReal(pool, const, coeffs)


SymVec = tuple[SymReal, ...]


def sym_zero_vec(pool: SymbolPool, n: int) -> SymVec:
    return tuple(SymReal(pool) for _ in range(n))


def sym_vec(pool: SymbolPool, entries: Iterable[SymReal | Scalar]) -> SymVec:
    out = []
    for e in entries:
        out.append(e if isinstance(e, SymReal) else SymReal(pool, e))
    return tuple(out)


def sym_vec_add(u: SymVec, v: SymVec) -> SymVec:
    return tuple(a + b for a, b in zip(u, v))


def sym_vec_sub(u: SymVec, v: SymVec) -> SymVec:
    return tuple(a - b for a, b in zip(u, v))


def sym_vec_neg(u: SymVec) -> SymVec:
    return tuple(-a for a in u)


def sym_vec_is_zero(u: SymVec) -> bool:
    return all(a.is_zero() for a in u)


def sym_vec_is_integral(u: SymVec) -> bool:
    return all(a.is_integer() for a in u)


def mat_apply_sym(m: Mat, v: SymVec) -> SymVec:
    """Matrix (int or rational entries) times a symbolic vector."""
    if m.cols != len(v):
        raise ValueError("apply length mismatch")
    pool = v[0].pool if v else None
    out = []
    for row in m.data:
        acc: SymReal | None = None
        for a, x in zip(row, v):
            if a == 0:
                continue
            term = x * a
            acc = term if acc is None else acc + term
        if acc is None:
            acc = SymReal(pool) if pool is not None else None
        out.append(acc)
    if pool is None and m.rows:
        raise ValueError("cannot determine pool for empty vector")
    return tuple(out)


def dot(m: Iterable[Scalar], v: SymVec) -> SymReal:
    """Exact inner product of an integer/rational vector with a SymVec."""
    m = tuple(m)
    if len(m) != len(v):
        raise ValueError("dot length mismatch")
    if not v:
        raise ValueError("empty dot needs a pool")
    acc = SymReal(v[0].pool)
    for a, x in zip(m, v):
        if a != 0:
            acc = acc + x * a
    return acc


def sym_vec_to_json(v: SymVec) -> list:
    return [x.to_json() for x in v]


def sym_vec_from_json(pool: SymbolPool, data: list) -> SymVec:
    return tuple(SymReal.from_json(pool, d) for d in data)
