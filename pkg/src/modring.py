"""Z/ℓ^m 上の厳密演算

スカラー・行ベクトル・2×2行列・ℓ進付値・像/核・アフィン方程式を提供する。
他の全モジュールの線形代数基盤。

規約: ベクトルは常に行ベクトルで、行列は右から作用する（v ↦ v·M）。
剰余は [0, ℓ^m) の代表元で保持する。
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Iterable, Iterator

from sympy import isprime

from src import config
from src.errors import InputError, InvariantError

logger = logging.getLogger(__name__)

# 行優先 (a, b, c, d) = [[a, b], [c, d]]
RawMat = tuple[int, int, int, int]
RawVec = tuple[int, int]


@lru_cache(maxsize=None)
def _checked_prime(ell: int) -> bool:
    return isprime(ell)


def level_cap(ell: int) -> int:
    """ℓ^m ≤ 2^MAX_MODULUS_BITS となる最大の m（最低1）"""
    limit = 2 ** config.MAX_MODULUS_BITS
    m = 0
    while ell ** (m + 1) <= limit:
        m += 1
    return max(m, 1)


@dataclass(frozen=True, slots=True)
class ModCtx:
    """剰余環 Z/ℓ^m の文脈（ℓ は素数、m はレベル）"""
    ell: int
    m: int
    modulus: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if isinstance(self.ell, bool) or not isinstance(self.ell, int) or self.ell < 2 or not _checked_prime(self.ell):
            raise InputError(f"ell must be a prime, got {self.ell!r}")
        cap = level_cap(self.ell)
        if isinstance(self.m, bool) or not isinstance(self.m, int) or not 1 <= self.m <= cap:
            raise InputError(f"level must be in [1, {cap}] for ell={self.ell}, got {self.m!r}")
        object.__setattr__(self, "modulus", self.ell ** self.m)

    def at_level(self, m: int) -> "ModCtx":
        return ModCtx(self.ell, m)


def _val(x: int, ell: int, m: int) -> int:
    """x mod ℓ^m の付値（0 は m に切り詰める）"""
    x %= ell ** m
    if x == 0:
        return m
    e = 0
    while x % ell == 0:
        x //= ell
        e += 1
    return e


def val_ell(x: int, ctx: ModCtx) -> int:
    """ℓ^e | x となる最大の e ≤ m を返す。x ≡ 0 なら m。"""
    return _val(x, ctx.ell, ctx.m)


# =============================================
# 生タプル演算（群の列挙など速度が必要な箇所で使う）
# =============================================


def mat_mul(g: RawMat, h: RawMat, n: int) -> RawMat:
    a, b, c, d = g
    e, f, x, y = h
    return ((a * e + b * x) % n, (a * f + b * y) % n, (c * e + d * x) % n, (c * f + d * y) % n)


def vec_mat(v: RawVec, g: RawMat, n: int) -> RawVec:
    x0, x1 = v
    a, b, c, d = g
    return ((x0 * a + x1 * c) % n, (x0 * b + x1 * d) % n)


def mat_det(g: RawMat, n: int) -> int:
    a, b, c, d = g
    return (a * d - b * c) % n


def mat_inv(g: RawMat, n: int) -> RawMat:
    """可逆行列の逆行列。det が単数でなければ InputError。"""
    a, b, c, d = g
    try:
        t = pow((a * d - b * c) % n, -1, n)
    except ValueError:
        raise InputError(f"matrix {g} is not invertible mod {n}") from None
    return ((d * t) % n, (-b * t) % n, (-c * t) % n, (a * t) % n)


def mat_reduce(g: RawMat, n: int) -> RawMat:
    return tuple(x % n for x in g)  # type: ignore[return-value]


def iter_gl2_raw(ell: int, m: int) -> Iterator[RawMat]:
    """GL₂(Z/ℓ^m) の元を生タプルでストリーム列挙する（実体化しない）。"""
    n = ell ** m
    for a, b, c, d in product(range(n), repeat=4):
        if (a * d - b * c) % ell:
            yield (a, b, c, d)


def gl2_order(ell: int, m: int) -> int:
    """|GL₂(Z/ℓ^m)| = ℓ^{4(m-1)}(ℓ²-1)(ℓ²-ℓ)"""
    return ell ** (4 * (m - 1)) * (ell * ell - 1) * (ell * ell - ell)


# =============================================
# 値型
# =============================================


@dataclass(frozen=True, slots=True)
class ModVec:
    """(Z/ℓ^m)² の行ベクトル"""
    ctx: ModCtx
    entries: RawVec

    def __post_init__(self):
        n = self.ctx.modulus
        x0, x1 = self.entries
        object.__setattr__(self, "entries", (int(x0) % n, int(x1) % n))

    @classmethod
    def zero(cls, ctx: ModCtx) -> "ModVec":
        return cls(ctx, (0, 0))

    def _same(self, other: "ModVec") -> None:
        if other.ctx != self.ctx:
            raise InputError(f"context mismatch: {self.ctx} vs {other.ctx}")

    def __add__(self, other: "ModVec") -> "ModVec":
        self._same(other)
        return ModVec(self.ctx, (self.entries[0] + other.entries[0], self.entries[1] + other.entries[1]))

    def __sub__(self, other: "ModVec") -> "ModVec":
        self._same(other)
        return ModVec(self.ctx, (self.entries[0] - other.entries[0], self.entries[1] - other.entries[1]))

    def __neg__(self) -> "ModVec":
        return ModVec(self.ctx, (-self.entries[0], -self.entries[1]))

    def scale(self, k: int) -> "ModVec":
        return ModVec(self.ctx, (k * self.entries[0], k * self.entries[1]))

    def __matmul__(self, g: "ModMat") -> "ModVec":
        """右作用 v·g"""
        if g.ctx != self.ctx:
            raise InputError(f"context mismatch: {self.ctx} vs {g.ctx}")
        return ModVec(self.ctx, vec_mat(self.entries, g.entries, self.ctx.modulus))

    def is_zero(self) -> bool:
        return self.entries == (0, 0)

    def is_primitive(self) -> bool:
        """少なくとも一方の成分が mod ℓ で単数"""
        ell = self.ctx.ell
        return self.entries[0] % ell != 0 or self.entries[1] % ell != 0

    def reduce(self, m: int) -> "ModVec":
        if m > self.ctx.m:
            raise InputError(f"cannot reduce from level {self.ctx.m} to higher level {m}")
        return ModVec(self.ctx.at_level(m), self.entries)


@dataclass(frozen=True, slots=True)
class ModMat:
    """2×2 行列 over Z/ℓ^m（行優先）"""
    ctx: ModCtx
    entries: RawMat

    def __post_init__(self):
        n = self.ctx.modulus
        if len(self.entries) != 4:
            raise InputError(f"a 2x2 matrix needs 4 entries, got {self.entries!r}")
        object.__setattr__(self, "entries", tuple(int(x) % n for x in self.entries))

    @classmethod
    def from_rows(cls, ctx: ModCtx, rows: Iterable[Iterable[int]]) -> "ModMat":
        flat = [x for row in rows for x in row]
        return cls(ctx, tuple(flat))  # type: ignore[arg-type]

    @classmethod
    def identity(cls, ctx: ModCtx) -> "ModMat":
        return cls(ctx, (1, 0, 0, 1))

    @classmethod
    def scalar(cls, ctx: ModCtx, x: int) -> "ModMat":
        return cls(ctx, (x, 0, 0, x))

    def _same(self, other: "ModMat") -> None:
        if other.ctx != self.ctx:
            raise InputError(f"context mismatch: {self.ctx} vs {other.ctx}")

    @property
    def det(self) -> int:
        return mat_det(self.entries, self.ctx.modulus)

    @property
    def is_invertible(self) -> bool:
        """GL フラグ: det が mod ℓ で単数"""
        return self.det % self.ctx.ell != 0

    @property
    def is_scalar(self) -> bool:
        a, b, c, d = self.entries
        return b == 0 and c == 0 and a == d

    def __mul__(self, other: "ModMat") -> "ModMat":
        self._same(other)
        return ModMat(self.ctx, mat_mul(self.entries, other.entries, self.ctx.modulus))

    def __add__(self, other: "ModMat") -> "ModMat":
        self._same(other)
        return ModMat(self.ctx, tuple(x + y for x, y in zip(self.entries, other.entries)))  # type: ignore[arg-type]

    def __sub__(self, other: "ModMat") -> "ModMat":
        self._same(other)
        return ModMat(self.ctx, tuple(x - y for x, y in zip(self.entries, other.entries)))  # type: ignore[arg-type]

    def inverse(self) -> "ModMat":
        return ModMat(self.ctx, mat_inv(self.entries, self.ctx.modulus))

    def reduce(self, m: int) -> "ModMat":
        if m > self.ctx.m:
            raise InputError(f"cannot reduce from level {self.ctx.m} to higher level {m}")
        return ModMat(self.ctx.at_level(m), self.entries)

    def rows(self) -> list[list[int]]:
        a, b, c, d = self.entries
        return [[a, b], [c, d]]


# =============================================
# 部分加群
# =============================================


@dataclass(frozen=True)
class SubmoduleInfo:
    """(Z/ℓ^m)² の部分群

    内部では Howell 型の標準形 (a, y, b) を持つ:
    r0 = (ℓ^a, y)（a = m なら無し）、r1 = (0, ℓ^b)（b = m なら無し）、0 ≤ y < ℓ^b。
    全ての元は c0·r0 + c1·r1（0 ≤ c0 < ℓ^{m-a}, 0 ≤ c1 < ℓ^{m-b}）として一意に書ける。
    """
    ctx: ModCtx
    generators: tuple[ModVec, ...]
    order: int
    cyclic: bool
    form: tuple[int, int, int] = field(repr=False)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SubmoduleInfo):
            return NotImplemented
        return self.ctx == other.ctx and self.form == other.form

    def __hash__(self) -> int:
        return hash((self.ctx, self.form))

    def contains(self, v: ModVec) -> bool:
        ell, m, n = self.ctx.ell, self.ctx.m, self.ctx.modulus
        a, y, b = self.form
        x0, x1 = v.entries
        if a == m:
            if x0 != 0:
                return False
        else:
            step = ell ** a
            if x0 % step:
                return False
            x1 = (x1 - (x0 // step) * y) % n
        return x1 % (ell ** b) == 0 if b < m else x1 == 0

    def index(self) -> int:
        """(Z/ℓ^m)² における指数"""
        return self.ctx.modulus ** 2 // self.order

    def elements(self) -> Iterator[ModVec]:
        ell, m, n = self.ctx.ell, self.ctx.m, self.ctx.modulus
        a, y, b = self.form
        r0 = (ell ** a % n, y) if a < m else (0, 0)
        for c0 in range(ell ** (m - a)):
            for c1 in range(ell ** (m - b)):
                yield ModVec(self.ctx, (c0 * r0[0], c0 * r0[1] + c1 * ell ** b))

    def is_full(self) -> bool:
        return self.order == self.ctx.modulus ** 2

    def contains_all_multiples(self, k: int) -> bool:
        """ℓ^k·(Z/ℓ^m)² ⊆ S か（≡ 0 mod ℓ^k の全ベクトルを含むか）"""
        if k >= self.ctx.m:
            return True
        step = self.ctx.ell ** k
        return self.contains(ModVec(self.ctx, (step, 0))) and self.contains(ModVec(self.ctx, (0, step)))


def span(vectors: Iterable[ModVec], ctx: ModCtx) -> SubmoduleInfo:
    """ベクトル列が生成する加法部分群を標準形で返す。"""
    ell, m, n = ctx.ell, ctx.m, ctx.modulus
    rows: list[RawVec] = []
    for v in vectors:
        if v.ctx != ctx:
            raise InputError(f"context mismatch: {v.ctx} vs {ctx}")
        rows.append(v.entries)

    # 第0列: 付値最小の行を pivot にする
    a = min((_val(r[0], ell, m) for r in rows), default=m)
    pool: list[int] = []
    y = 0
    if a < m:
        step = ell ** a
        pivot = next(r for r in rows if _val(r[0], ell, m) == a)
        uinv = pow(pivot[0] // step, -1, n)
        y = pivot[1] * uinv % n
        for r in rows:
            f = r[0] // step
            pool.append((r[1] - f * y) % n)
        # Howell 閉包: ℓ^{m-a}·r0 = (0, ℓ^{m-a}·y)
        pool.append(ell ** (m - a) * y % n)
    else:
        pool = [r[1] for r in rows]

    b = min((_val(x, ell, m) for x in pool), default=m)
    if b < m:
        y %= ell ** b

    order = ell ** (m - a) * ell ** (m - b)
    gens: list[ModVec] = []
    r0 = ModVec(ctx, (ell ** a, y)) if a < m else None
    r1 = ModVec(ctx, (0, ell ** b)) if b < m else None
    ord_r0 = ell ** (m - min(a, _val(y, ell, m))) if r0 is not None else 1
    ord_r1 = ell ** (m - b) if r1 is not None else 1
    cyclic = max(ord_r0, ord_r1) == order
    if order == 1:
        gens = []
    elif cyclic:
        gens = [r0] if r0 is not None and ord_r0 == order else [r1]  # type: ignore[list-item]
    else:
        gens = [r0, r1]  # type: ignore[list-item]
    return SubmoduleInfo(ctx=ctx, generators=tuple(gens), order=order, cyclic=cyclic, form=(a, y, b))


# =============================================
# 2×2 Smith 標準形
# =============================================


def _smith2(g: RawMat, ell: int, m: int) -> tuple[int, int, RawMat, RawMat]:
    """P·M·Q = diag(ℓ^a, ℓ^b)（a ≤ b, 0 は指数 m）となる (a, b, P, Q) を返す。"""
    n = ell ** m
    A = [[g[0] % n, g[1] % n], [g[2] % n, g[3] % n]]
    P = [[1, 0], [0, 1]]
    Q = [[1, 0], [0, 1]]
    cells = [(0, 0), (0, 1), (1, 0), (1, 1)]
    i, j = min(cells, key=lambda ij: _val(A[ij[0]][ij[1]], ell, m))
    a = _val(A[i][j], ell, m)
    if a == m:
        return m, m, (1, 0, 0, 1), (1, 0, 0, 1)
    if i == 1:
        A[0], A[1] = A[1], A[0]
        P[0], P[1] = P[1], P[0]
    if j == 1:
        for M_ in (A, Q):
            M_[0][0], M_[0][1] = M_[0][1], M_[0][0]
            M_[1][0], M_[1][1] = M_[1][1], M_[1][0]
    step = ell ** a
    uinv = pow(A[0][0] // step, -1, n)
    A[0] = [x * uinv % n for x in A[0]]
    P[0] = [x * uinv % n for x in P[0]]
    # 行基本変形で (1,0) 成分を消す
    f = A[1][0] // step
    A[1] = [(A[1][k] - f * A[0][k]) % n for k in range(2)]
    P[1] = [(P[1][k] - f * P[0][k]) % n for k in range(2)]
    # 列基本変形で (0,1) 成分を消す
    h = A[0][1] // step
    for M_ in (A, Q):
        M_[0][1] = (M_[0][1] - h * M_[0][0]) % n
        M_[1][1] = (M_[1][1] - h * M_[1][0]) % n
    b = _val(A[1][1], ell, m)
    if b < m:
        winv = pow(A[1][1] // ell ** b, -1, n)
        A[1] = [x * winv % n for x in A[1]]
        P[1] = [x * winv % n for x in P[1]]
    return a, b, (P[0][0], P[0][1], P[1][0], P[1][1]), (Q[0][0], Q[0][1], Q[1][0], Q[1][1])


def image_order_raw(g: RawMat, ell: int, m: int) -> int:
    """v ↦ v·g の像の位数（密度計算の per-g 高速経路用）"""
    a, b, _, _ = _smith2(g, ell, m)
    return ell ** (2 * m - a - b)


def affine_solvable_raw(v: RawVec, g: RawMat, ell: int, m: int) -> bool:
    """w·g = -v が解を持つか（-v が g の像に入るか）"""
    n = ell ** m
    a, b, _, Q = _smith2(g, ell, m)
    t0, t1 = vec_mat(((-v[0]) % n, (-v[1]) % n), Q, n)
    for t, e in ((t0, a), (t1, b)):
        if e == m:
            if t:
                return False
        elif t % (ell ** e):
            return False
    return True


def image_kernel(M: ModMat) -> tuple[SubmoduleInfo, SubmoduleInfo]:
    """v ↦ v·M の (像, 核) を返す。|像|·|核| = ℓ^{2m}。"""
    ctx = M.ctx
    ell, m, n = ctx.ell, ctx.m, ctx.modulus
    a, b, P, Q = _smith2(M.entries, ell, m)
    Qi = mat_inv(Q, n)
    image = span(
        [ModVec(ctx, (ell ** a * Qi[0], ell ** a * Qi[1])), ModVec(ctx, (ell ** b * Qi[2], ell ** b * Qi[3]))],
        ctx,
    )
    kernel = span(
        [ModVec(ctx, (ell ** (m - a) * P[0], ell ** (m - a) * P[1])),
         ModVec(ctx, (ell ** (m - b) * P[2], ell ** (m - b) * P[3]))],
        ctx,
    )
    if image.order * kernel.order != n * n:
        raise InvariantError(f"|im|·|ker| = {image.order}·{kernel.order} != {n * n} for {M.entries}")
    return image, kernel


def solve_affine(v: ModVec, M: ModMat) -> ModVec | None:
    """w·M = -v を満たす w を1つ返す。解がなければ None。"""
    if v.ctx != M.ctx:
        raise InputError(f"context mismatch: {v.ctx} vs {M.ctx}")
    ctx = M.ctx
    ell, m, n = ctx.ell, ctx.m, ctx.modulus
    a, b, P, Q = _smith2(M.entries, ell, m)
    # u = w·P^{-1} として u·D = -v·Q を解く
    t0, t1 = vec_mat(((-v.entries[0]) % n, (-v.entries[1]) % n), Q, n)
    u: list[int] = []
    for t, e in ((t0, a), (t1, b)):
        if e == m:
            if t != 0:
                return None
            u.append(0)
        else:
            if t % (ell ** e):
                return None
            u.append(t // ell ** e)
    w = ModVec(ctx, vec_mat((u[0], u[1]), P, n))
    if (w @ M) != -v:
        raise InvariantError(f"solve_affine produced a wrong solution for v={v.entries}, M={M.entries}")
    return w


def primitive_decompose(v: ModVec) -> tuple[int, ModVec]:
    """v = ℓ^t·p（p は原始的, 0 ≤ t < m）。p は各成分を ℓ^t で割った持ち上げ。"""
    ctx = v.ctx
    t = min(val_ell(v.entries[0], ctx), val_ell(v.entries[1], ctx))
    if t == ctx.m:
        raise InputError("zero vector has no primitive part")
    step = ctx.ell ** t
    return t, ModVec(ctx, (v.entries[0] // step, v.entries[1] // step))
