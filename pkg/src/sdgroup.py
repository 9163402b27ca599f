"""有限レベルの半直積 (Z/ℓ^m)² ⋊ GL₂(Z/ℓ^m)

元の演算・部分群の閉包・指数・レベル還元を提供する。im ω と im ρ の計算モデル。

群演算は行ベクトル・右作用の規約に従う:
    (v, g) * (w, h) = (v·h + w, g·h)
部分群はレベル m の生成元で与え、その有限群の完全逆像（ℓ進の開部分群）を表すものと解釈する。
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from typing import Iterator, Literal, Union

from sympy import primitive_root

from src import config
from src.errors import BudgetExceededError, InputError, InvariantError
from src.modring import (
    ModCtx,
    ModMat,
    ModVec,
    gl2_order,
    mat_mul,
    vec_mat,
)

logger = logging.getLogger(__name__)

Kind = Literal["linear", "affine"]

# 線形は 4 成分、アフィンは (v0, v1, a, b, c, d) の 6 成分タプルをキーにする
Key = tuple[int, ...]


@dataclass(frozen=True, slots=True)
class AffineElement:
    """(v, g) ∈ (Z/ℓ^m)² ⋊ GL₂(Z/ℓ^m)"""
    v: ModVec
    g: ModMat

    def __post_init__(self):
        if self.v.ctx != self.g.ctx:
            raise InputError(f"context mismatch: {self.v.ctx} vs {self.g.ctx}")
        if not self.g.is_invertible:
            raise InputError(f"linear part {self.g.entries} is not invertible mod {self.g.ctx.ell}")

    @property
    def ctx(self) -> ModCtx:
        return self.g.ctx

    @classmethod
    def identity(cls, ctx: ModCtx) -> "AffineElement":
        return cls(ModVec.zero(ctx), ModMat.identity(ctx))

    @classmethod
    def from_key(cls, ctx: ModCtx, key: Key) -> "AffineElement":
        return cls(ModVec(ctx, key[:2]), ModMat(ctx, key[2:]))  # type: ignore[arg-type]

    def key(self) -> Key:
        return self.v.entries + self.g.entries

    def reduce(self, m: int) -> "AffineElement":
        return AffineElement(self.v.reduce(m), self.g.reduce(m))


def _affine_mul(x: Key, y: Key, n: int) -> Key:
    v, g = x[:2], x[2:]
    w, h = y[:2], y[2:]
    vh = vec_mat(v, h, n)  # type: ignore[arg-type]
    return ((vh[0] + w[0]) % n, (vh[1] + w[1]) % n) + mat_mul(g, h, n)  # type: ignore[arg-type]


def compose(a: AffineElement, b: AffineElement) -> AffineElement:
    """(v, g) * (w, h) = (v·h + w, g·h)"""
    if a.ctx != b.ctx:
        raise InputError(f"context mismatch: {a.ctx} vs {b.ctx}")
    return AffineElement.from_key(a.ctx, _affine_mul(a.key(), b.key(), a.ctx.modulus))


def inverse(a: AffineElement) -> AffineElement:
    """(v, g)^{-1} = (-v·g^{-1}, g^{-1})"""
    g_inv = a.g.inverse()
    return AffineElement(-(a.v @ g_inv), g_inv)


# =============================================
# 部分群
# =============================================


Generator = Union[ModMat, AffineElement]


@dataclass(frozen=True)
class SubgroupSpec:
    """生成元で与える部分群（完全逆像規約）"""
    ctx: ModCtx
    kind: Kind
    generators: tuple[Generator, ...]

    def __post_init__(self):
        if self.kind not in ("linear", "affine"):
            raise InputError(f"kind must be 'linear' or 'affine', got {self.kind!r}")
        if not self.generators:
            raise InputError("generator list must not be empty (use the identity for the trivial group)")
        expected = ModMat if self.kind == "linear" else AffineElement
        for gen in self.generators:
            if not isinstance(gen, expected):
                raise InputError(f"{self.kind} subgroup needs {expected.__name__} generators, got {type(gen).__name__}")
            if gen.ctx != self.ctx:
                raise InputError(f"generator context {gen.ctx} differs from {self.ctx}")
            if isinstance(gen, ModMat) and not gen.is_invertible:
                raise InputError(f"generator {gen.entries} is not invertible mod {self.ctx.ell}")

    def keys(self) -> list[Key]:
        return [g.entries if isinstance(g, ModMat) else g.key() for g in self.generators]


def ambient_order(ctx: ModCtx, kind: Kind) -> int:
    """外側の群の位数: GL₂(Z/ℓ^m) または (Z/ℓ^m)² ⋊ GL₂(Z/ℓ^m)"""
    order = gl2_order(ctx.ell, ctx.m)
    if kind == "affine":
        order *= ctx.modulus ** 2
    return order


class ClosedSubgroup:
    """閉包計算済みの有限部分群。生成後は不変で、読み取りはスレッドセーフ。"""

    def __init__(self, spec: SubgroupSpec, elements: list[Key]):
        self.spec = spec
        self._elements = elements
        self._members = frozenset(elements)
        if len(self._members) != len(elements):
            raise InvariantError("duplicate elements in closed subgroup")

    @property
    def ctx(self) -> ModCtx:
        return self.spec.ctx

    @property
    def kind(self) -> Kind:
        return self.spec.kind

    @property
    def order(self) -> int:
        return len(self._elements)

    def __len__(self) -> int:
        return len(self._elements)

    def keys(self) -> Iterator[Key]:
        """BFS 順（再現可能）で元のキーを返す。"""
        return iter(self._elements)

    def __iter__(self) -> Iterator[Generator]:
        if self.kind == "linear":
            return (ModMat(self.ctx, k) for k in self._elements)  # type: ignore[arg-type]
        return (AffineElement.from_key(self.ctx, k) for k in self._elements)

    def contains_key(self, key: Key) -> bool:
        return key in self._members

    def contains(self, x: Generator) -> bool:
        if isinstance(x, ModMat):
            return self.kind == "linear" and x.ctx == self.ctx and x.entries in self._members
        return self.kind == "affine" and x.ctx == self.ctx and x.key() in self._members

    def generator_keys(self) -> list[Key]:
        return self.spec.keys()


def _check_ambient(ctx: ModCtx, kind: Kind) -> None:
    ambient = ambient_order(ctx, kind)
    if ambient > config.CLOSURE_AMBIENT_LIMIT:
        raise BudgetExceededError(
            f"ambient group order {ambient} exceeds the closure budget {config.CLOSURE_AMBIENT_LIMIT}"
        )


def close(spec: SubgroupSpec, limit: int | None = None) -> ClosedSubgroup:
    """生成元から幅優先探索（FIFO）で部分群を閉じる。

    有限群なので生成元の右乗算だけで群全体に到達する。
    """
    ctx, kind = spec.ctx, spec.kind
    _check_ambient(ctx, kind)
    limit = config.CLOSURE_ELEMENT_LIMIT if limit is None else limit
    n = ctx.modulus
    gens = list(dict.fromkeys(spec.keys()))
    if kind == "linear":
        identity: Key = (1, 0, 0, 1)
        mul = lambda x, y: mat_mul(x, y, n)  # noqa: E731
    else:
        identity = (0, 0, 1, 0, 0, 1)
        mul = lambda x, y: _affine_mul(x, y, n)  # noqa: E731

    seen = {identity}
    elements = [identity]
    queue = deque([identity])
    while queue:
        x = queue.popleft()
        for s in gens:
            y = mul(x, s)
            if y not in seen:
                if len(elements) >= limit:
                    raise BudgetExceededError(
                        f"closure exceeded {limit} elements (ambient order {ambient_order(ctx, kind)})"
                    )
                seen.add(y)
                elements.append(y)
                queue.append(y)

    ambient = ambient_order(ctx, kind)
    if ambient % len(elements):
        raise InvariantError(f"subgroup order {len(elements)} does not divide ambient order {ambient}")
    logger.info(f"closed {kind} subgroup at ell={ctx.ell}, m={ctx.m}: order {len(elements)} (ambient {ambient})")
    return ClosedSubgroup(spec, elements)


def index_in_full(sub: ClosedSubgroup) -> int:
    """外側の群における指数（完全逆像規約により ℓ進の指数と一致）"""
    return ambient_order(sub.ctx, sub.kind) // sub.order


# =============================================
# レベル還元・完全逆像
# =============================================


def _reduce_key(key: Key, n: int) -> Key:
    return tuple(x % n for x in key)


def reduce_level(x: Union[AffineElement, ModMat, ClosedSubgroup], m: int):
    """mod ℓ^{m'} への還元（群準同型）。ClosedSubgroup は像の部分群を返す。"""
    if m < 1:
        raise InputError(f"target level must be >= 1, got {m}")
    if isinstance(x, (AffineElement, ModMat)):
        return x.reduce(m)
    if m > x.ctx.m:
        raise InputError(f"cannot reduce from level {x.ctx.m} to higher level {m}")
    ctx = x.ctx.at_level(m)
    n = ctx.modulus
    image = list(dict.fromkeys(_reduce_key(k, n) for k in x.keys()))
    gens = tuple(g.reduce(m) for g in x.spec.generators)
    return ClosedSubgroup(SubgroupSpec(ctx, x.kind, gens), image)


def gamma_generators(ctx: ModCtx, k: int) -> list[ModMat]:
    """Γ(ℓ^k)/Γ(ℓ^m) を生成する行列 I + ℓ^j·E_ab（k ≤ j < m）"""
    out = []
    for j in range(k, ctx.m):
        step = ctx.ell ** j
        for e in ((step, 0, 0, 0), (0, step, 0, 0), (0, 0, step, 0), (0, 0, 0, step)):
            out.append(ModMat(ctx, (1 + e[0], e[1], e[2], 1 + e[3])))
    return out


def gl2_generators(ctx: ModCtx) -> list[ModMat]:
    """GL₂(Z/ℓ^m) の生成元: 基本行列と単数群の生成元を対角に置いたもの"""
    ell, m, n = ctx.ell, ctx.m, ctx.modulus
    gens = [ModMat(ctx, (1, 1, 0, 1)), ModMat(ctx, (1, 0, 1, 1))]
    if ell == 2:
        units = [] if m == 1 else ([n - 1] if m == 2 else [n - 1, 5])
    else:
        units = [primitive_root(n)]
    gens.extend(ModMat(ctx, (u, 0, 0, 1)) for u in units)
    return gens


def full_linear_spec(ctx: ModCtx) -> SubgroupSpec:
    return SubgroupSpec(ctx, "linear", tuple(gl2_generators(ctx)))


def preimage_at_level(sub: ClosedSubgroup, m: int) -> ClosedSubgroup:
    """線形部分群をレベル m' で表す: m' ≤ m なら還元、m' > m なら完全逆像。"""
    if sub.kind != "linear":
        raise InputError("preimage_at_level expects a linear subgroup")
    if m <= sub.ctx.m:
        return reduce_level(sub, m)
    ctx = sub.ctx.at_level(m)
    lifts = [ModMat(ctx, g.entries) for g in sub.spec.generators]  # type: ignore[union-attr]
    spec = SubgroupSpec(ctx, "linear", tuple(lifts + gamma_generators(ctx, sub.ctx.m)))
    lifted = close(spec)
    expected = sub.order * ctx.ell ** (4 * (m - sub.ctx.m))
    if lifted.order != expected:
        raise InvariantError(f"full preimage has order {lifted.order}, expected {expected}")
    return lifted


def full_preimage_contains_gamma(sub: ClosedSubgroup, n: int) -> bool:
    """レベル m で ≡ I mod ℓ^n の全行列が部分群に含まれるか"""
    if sub.kind != "linear":
        raise InputError("full_preimage_contains_gamma expects a linear subgroup")
    ctx = sub.ctx
    if not 0 <= n <= ctx.m:
        raise InputError(f"n must be in [0, {ctx.m}], got {n}")
    step = ctx.ell ** n
    hits = sum(
        1 for a, b, c, d in sub.keys()
        if (a - 1) % step == 0 and b % step == 0 and c % step == 0 and (d - 1) % step == 0
    )
    # Γ(ℓ^n)/Γ(ℓ^m) の位数。n = 0 のときは GL₂ 全体
    expected = ctx.ell ** (4 * (ctx.m - n)) if n >= 1 else gl2_order(ctx.ell, ctx.m)
    return hits == expected
