"""主定理のパラメータ計算

群 G から r, s, n_ℓ を求め、Kummer 軌道部分群 S と
指数の上界 ℓ^{2d+2r+s}·[GL₂(Z_ℓ):G] を計算する。

d は群からは決まらない（Mordell-Weil 群に依存する）ので、常に呼び出し側が与える。
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

from sympy import isprime

from src.errors import InputError, InvariantError
from src.modring import ModCtx, ModMat, ModVec, SubmoduleInfo, _val, span, vec_mat
from src.sdgroup import (
    ClosedSubgroup,
    SubgroupSpec,
    close,
    full_preimage_contains_gamma,
    index_in_full,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoundParams:
    """主定理の入力パラメータ。n_ell は群から計算した場合のみ持つ。"""
    ell: int
    d: int
    r: int
    s: int
    index: int
    n_ell: int | None = None

    def __post_init__(self):
        if not isprime(self.ell):
            raise InputError(f"ell must be a prime, got {self.ell}")
        if self.d < 0 or self.s < 0:
            raise InputError(f"d and s must be non-negative (d={self.d}, s={self.s})")
        if self.r < 1 or self.index < 1:
            raise InputError(f"r and index must be positive (r={self.r}, index={self.index})")
        if self.n_ell is not None and self.n_ell < 1:
            raise InputError(f"n_ell must be positive, got {self.n_ell}")


@dataclass(frozen=True)
class OrbitSubgroup:
    """p·G が生成する部分群 S と、その指数 ℓ^{k'}"""
    base_point: ModVec
    S: SubmoduleInfo
    k_prime: int


@dataclass(frozen=True)
class BoundReport:
    ell: int
    level: int
    d: int
    r: int
    s: int
    n_ell: int
    index: int
    bound: int
    kummer_exponent: int
    remark_exponent: int
    comparison_exponent: int
    disjointness_level: int
    containment_level: int
    saturated: list[str] = field(default_factory=list)

    def to_record(self) -> dict:
        return asdict(self)


# =============================================
# r, s, n_ℓ
# =============================================


def compute_r(G: ClosedSubgroup) -> int:
    """G に含まれるスカラー行列 xI のうち ord_ℓ(x-1) ≥ 1 の最小値（上限 m）"""
    if G.kind != "linear":
        raise InputError("compute_r expects a linear subgroup")
    ell, m = G.ctx.ell, G.ctx.m
    r = m
    for a, b, c, d in G.keys():
        if b == 0 and c == 0 and a == d:
            v = _val(a - 1, ell, m)
            if 1 <= v < r:
                r = v
    return r


def _line_representatives(ell: int, s: int):
    """(Z/ℓ^s)² の原始ベクトルが生成する巡回部分群の代表元"""
    n = ell ** s
    for y in range(n):
        yield (1, y)
    for z in range(ell ** (s - 1)):
        yield ((ell * z) % n, 1)


def _is_stable_line(p: tuple[int, int], gens: list, ell: int, n: int) -> bool:
    p0, p1 = p
    for g in gens:
        q0, q1 = vec_mat(p, g, n)
        if p0 % ell:
            lam = q0 * pow(p0, -1, n)
            if (lam * p1 - q1) % n:
                return False
        else:
            lam = q1 * pow(p1, -1, n)
            if (lam * p0 - q0) % n:
                return False
    return True


def stable_lines(G: ClosedSubgroup, s: int) -> list[tuple[int, int]]:
    """G mod ℓ^s で安定な位数 ℓ^s の巡回部分群（代表元）を全て返す。"""
    ell = G.ctx.ell
    n = ell ** s
    gens = [tuple(x % n for x in k) for k in G.generator_keys()]
    return [p for p in _line_representatives(ell, s) if _is_stable_line(p, gens, ell, n)]


def compute_s(G: ClosedSubgroup) -> int:
    """安定な巡回部分群 (位数 ℓ^s) が存在する最大の s ≤ m。s=1 でも無ければ 0。

    安定性は還元で保たれるので、上から探して最初に見つかったレベルを返す。
    """
    if G.kind != "linear":
        raise InputError("compute_s expects a linear subgroup")
    ell = G.ctx.ell
    for s in range(G.ctx.m, 0, -1):
        n = ell ** s
        gens = [tuple(x % n for x in k) for k in G.generator_keys()]
        if any(_is_stable_line(p, gens, ell, n) for p in _line_representatives(ell, s)):
            return s
    return 0


def compute_n_ell(G: ClosedSubgroup) -> int:
    """≡ I mod ℓ^n の行列を全て含む最小の n（1 ≤ n ≤ m）"""
    if G.kind != "linear":
        raise InputError("compute_n_ell expects a linear subgroup")
    for n in range(1, G.ctx.m):
        if full_preimage_contains_gamma(G, n):
            return n
    return G.ctx.m


# =============================================
# 上界
# =============================================


def theorem1_bound(params: BoundParams) -> int:
    """ℓ^{2d+2r+s}·[GL₂(Z_ℓ):G]"""
    return params.ell ** kummer_index_exponent(params) * params.index


def kummer_index_exponent(params: BoundParams) -> int:
    """Kummer 像の Z_ℓ² における指数の ℓ 指数 2d+2r+s"""
    return 2 * params.d + 2 * params.r + params.s


def containment_level(params: BoundParams) -> int:
    """Kummer 像は ≡ 0 mod ℓ^{d+r+s} の全ベクトルを含む"""
    return params.d + params.r + params.s


def disjointness_level(params: BoundParams) -> int:
    """m > r+d なら β_m は ℓ 冪等分体上に無い。その最小の m。"""
    return params.r + params.d + 1


def _ell_log(x: int, ell: int) -> int:
    e = 0
    while x % ell == 0 and x > 1:
        x //= ell
        e += 1
    if x != 1:
        raise InputError(f"{x * ell ** e} is not a power of {ell}")
    return e


def cohomological_bound(params: BoundParams, h1_exponent: int) -> int:
    """H¹ の実際の指数 ℓ^e で Sah の ℓ^r を置き換えた上界 ℓ^{2d+2e+s}·index"""
    e = _ell_log(h1_exponent, params.ell)
    if e > params.r:
        raise InputError(f"H1 exponent {h1_exponent} exceeds the Sah bound {params.ell ** params.r}")
    return params.ell ** (2 * params.d + 2 * e + params.s) * params.index


# 既知の例のパラメータ (d, r, s, index)。生成元がないので公式レベルでのみ扱う。
REFERENCE_EXAMPLES: dict[str, BoundParams] = {
    "surjective": BoundParams(ell=2, d=0, r=1, s=0, index=1),
    "X2a": BoundParams(ell=2, d=0, r=2, s=0, index=4),
    "X238a": BoundParams(ell=2, d=0, r=4, s=1, index=96),
    "X243g": BoundParams(ell=2, d=0, r=3, s=4, index=96),
    # 上三角（Borel）像: 公表値は s=1 だが、群論的定義では全レベルで s=m になる
    "borel": BoundParams(ell=2, d=0, r=1, s=1, index=3),
}

# X238a で実際に計算された H¹ の指数（Sah の上界は 16）
X238A_H1_EXPONENT = 4


# =============================================
# Kummer 軌道
# =============================================


def kummer_orbit(p: ModVec, G: ClosedSubgroup, s: int | None = None) -> OrbitSubgroup:
    """p·g（g ∈ G）を全て含む最小の部分群 S と k'（|(Z/ℓ^m)²:S| = ℓ^{k'}）"""
    if G.kind != "linear":
        raise InputError("kummer_orbit expects a linear subgroup")
    if p.ctx != G.ctx:
        raise InputError(f"context mismatch: {p.ctx} vs {G.ctx}")
    if not p.is_primitive():
        raise InputError(f"base point {p.entries} is not primitive (decompose it first)")
    ctx = G.ctx
    gens = [ModMat(ctx, k) for k in G.generator_keys()]

    S = span([p], ctx)
    while True:
        vecs = list(S.generators) + [x @ g for x in S.generators for g in gens]
        grown = span(vecs, ctx)
        if grown.order == S.order:
            break
        S = grown

    k_prime = _ell_log(S.index(), ctx.ell)
    if not S.contains_all_multiples(k_prime):
        raise InvariantError(f"orbit subgroup of {p.entries} misses vectors ≡ 0 mod ell^{k_prime}")
    s = compute_s(G) if s is None else s
    if k_prime > s:
        raise InvariantError(f"k'={k_prime} exceeds s={s} for base point {p.entries}")
    return OrbitSubgroup(base_point=p, S=S, k_prime=k_prime)


# =============================================
# まとめ
# =============================================


def analyze(spec: SubgroupSpec, d: int) -> BoundReport:
    """線形部分群 G と d から主定理の全パラメータと上界を計算する。"""
    if spec.kind != "linear":
        raise InputError("analyze expects a linear subgroup")
    if d < 0:
        raise InputError(f"d must be non-negative, got {d}")
    G = close(spec)
    ctx: ModCtx = spec.ctx
    r = compute_r(G)
    s = compute_s(G)
    n_ell = compute_n_ell(G)
    if r > n_ell or s > n_ell:
        raise InvariantError(f"r={r}, s={s} must not exceed n_ell={n_ell}")
    params = BoundParams(ell=ctx.ell, d=d, r=r, s=s, index=index_in_full(G), n_ell=n_ell)

    saturated = [name for name, value in (("r", r), ("s", s)) if value == ctx.m]
    if saturated:
        logger.warning(
            f"{', '.join(saturated)} saturated at level {ctx.m}; supply a deeper group to certify"
        )
    return BoundReport(
        ell=ctx.ell,
        level=ctx.m,
        d=d,
        r=r,
        s=s,
        n_ell=n_ell,
        index=params.index,
        bound=theorem1_bound(params),
        kummer_exponent=kummer_index_exponent(params),
        remark_exponent=2 * d + 3 * n_ell,
        comparison_exponent=2 * d + 4 * n_ell,
        disjointness_level=disjointness_level(params),
        containment_level=containment_level(params),
        saturated=saturated,
    )
