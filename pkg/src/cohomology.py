"""H¹(G, (Z/ℓ^n)²) の計算

G は有限行列群で、(Z/ℓ^n)² に mod ℓ^n 還元を通して右から作用する。
コサイクル条件は右作用の規約で ξ(gh) = ξ(g)·h + ξ(h)。

手順:
  1. 生成元 s_j 上の値 X_j = ξ(s_j) を未知数とし、Cayley グラフの BFS 木に沿って
     ξ(x) = Σ_j X_j·A_{x,j} となる 2×2 行列 A_{x,j} を伝播する。
  2. 木に含まれない辺ごとに線形関係式を得て、Howell 型の挿入で縮約する。
  3. 関係式の Smith 標準形から Z¹ ≅ ⊕ Z/ℓ^{d_i} とその基底を得る。
  4. 余境界 T·s_j − T を Z¹ の座標に写し、商の Smith 標準形から H¹ の不変因子を得る。
"""
from __future__ import annotations

import logging
import random
from collections import deque
from dataclasses import dataclass, field

from src import config
from src.arboreal import compute_r
from src.errors import BudgetExceededError, InputError, InvariantError
from src.modring import RawMat, RawVec, _val, mat_mul, vec_mat
from src.sdgroup import ClosedSubgroup, Key, SubgroupSpec, close, preimage_at_level

logger = logging.getLogger(__name__)

_ZERO: RawMat = (0, 0, 0, 0)


# =============================================
# Z/ℓ^n 上の行列演算（関係式の消去）
# =============================================


def _howell_insert(pivots: dict[int, list[int]], row: list[int], ell: int, n: int) -> None:
    """行を pivot 付き階段形に挿入する。

    pivot 成分は ℓ^e に正規化し、ℓ^{n-e} 倍した行も挿入する（Howell 閉包）。
    付値の小さい行が来たら既存の pivot 行を押し出して再挿入する。
    """
    q = ell ** n
    stack = [row]
    while stack:
        v = stack.pop()
        for c in range(len(v)):
            x = v[c] % q
            if x == 0:
                continue
            e = _val(x, ell, n)
            p = pivots.get(c)
            if p is not None:
                pe = _val(p[c], ell, n)
                if pe <= e:
                    f = x // ell ** pe
                    v = [(a - f * b) % q for a, b in zip(v, p)]
                    continue
            u = pow(x // ell ** e, -1, q)
            v = [a * u % q for a in v]
            pivots[c] = v
            if p is not None:
                stack.append(p)
            if e > 0:
                stack.append([a * ell ** (n - e) % q for a in v])
            break


def _identity(k: int) -> list[list[int]]:
    return [[int(i == j) for j in range(k)] for i in range(k)]


def _snf(rows: list[list[int]], width: int, ell: int, n: int) -> tuple[list[int], list[list[int]], list[list[int]]]:
    """P·A·Q = diag(ℓ^{e_0}, ℓ^{e_1}, ...) の (e, Q, Q^{-1}) を返す。

    e は列ごとの付値で、pivot が立たなかった列は n。行変換は記録しない。
    """
    q = ell ** n
    A = [[x % q for x in r] for r in rows]
    Q = _identity(width)
    Qi = _identity(width)
    vals: list[int] = []
    t = 0
    while t < min(len(A), width):
        best = None
        for i in range(t, len(A)):
            for j in range(t, width):
                if A[i][j]:
                    e = _val(A[i][j], ell, n)
                    if best is None or e < best[0]:
                        best = (e, i, j)
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        e, i, j = best
        A[t], A[i] = A[i], A[t]
        if j != t:
            for M in (A, Q):
                for r in M:
                    r[t], r[j] = r[j], r[t]
            Qi[t], Qi[j] = Qi[j], Qi[t]
        step = ell ** e
        u = pow(A[t][t] // step, -1, q)
        A[t] = [x * u % q for x in A[t]]
        for i2 in range(len(A)):
            if i2 != t and A[i2][t]:
                f = A[i2][t] // step
                A[i2] = [(x - f * y) % q for x, y in zip(A[i2], A[t])]
        for j2 in range(t + 1, width):
            if A[t][j2]:
                f = A[t][j2] // step
                for M in (A, Q):
                    for r in M:
                        r[j2] = (r[j2] - f * r[t]) % q
                Qi[t] = [(x + f * y) % q for x, y in zip(Qi[t], Qi[j2])]
        vals.append(e)
        t += 1
    vals.extend([n] * (width - len(vals)))
    return vals, Q, Qi


def _mat_vec(M: list[list[int]], v: list[int], q: int) -> list[int]:
    return [sum(a * b for a, b in zip(r, v)) % q for r in M]


# =============================================
# コサイクル
# =============================================


class CocycleSystem:
    """生成元上の値を未知数とするコサイクル方程式系

    A[x] は元 x ごとの 2×2 行列列 (A_{x,0}, ..., A_{x,k-1}) で、
    ξ(x) = Σ_j X_j·A_{x,j}（X_j = ξ(s_j)）。
    """

    def __init__(self, G: ClosedSubgroup, n: int):
        if G.kind != "linear":
            raise InputError("cohomology expects a linear subgroup")
        if not 1 <= n <= G.ctx.m:
            raise InputError(f"module level must be in [1, {G.ctx.m}], got {n}")
        if G.order > config.H1_ELEMENT_LIMIT:
            raise BudgetExceededError(f"|G| = {G.order} exceeds the H1 budget {config.H1_ELEMENT_LIMIT}")
        self.group = G
        self.ell = G.ctx.ell
        self.n = n
        self.q = self.ell ** n
        self.gens: list[Key] = list(dict.fromkeys(G.generator_keys()))
        self.actions: list[RawMat] = [tuple(x % self.q for x in s) for s in self.gens]  # type: ignore[misc]
        self.A: dict[Key, tuple[RawMat, ...]] = {}
        self.pivots: dict[int, list[int]] = {}
        self._build()

    @property
    def width(self) -> int:
        return 2 * len(self.gens)

    def _step(self, coeffs: tuple[RawMat, ...], i: int) -> tuple[RawMat, ...]:
        """A_{x s_i, j} = A_{x,j}·s_i + δ_ij·I"""
        q, s = self.q, self.actions[i]
        out = []
        for j, a in enumerate(coeffs):
            b = mat_mul(a, s, q)
            if j == i:
                b = ((b[0] + 1) % q, b[1], b[2], (b[3] + 1) % q)
            out.append(b)
        return tuple(out)

    def _build(self) -> None:
        m_mod = self.group.ctx.modulus
        k = len(self.gens)
        identity: Key = (1, 0, 0, 1)
        self.A[identity] = tuple(_ZERO for _ in range(k))
        queue = deque([identity])
        relations: set[tuple[int, ...]] = set()
        while queue:
            x = queue.popleft()
            for i, s in enumerate(self.gens):
                y = mat_mul(x, s, m_mod)
                coeffs = self._step(self.A[x], i)
                if y not in self.A:
                    self.A[y] = coeffs
                    queue.append(y)
                    continue
                # 木に含まれない辺: Σ_j X_j·(coeffs_j − A_{y,j}) = 0 の2列
                diff = [tuple((a - b) % self.q for a, b in zip(c, d)) for c, d in zip(coeffs, self.A[y])]
                for col in (0, 1):
                    rel = tuple(dj[2 * t + col] for dj in diff for t in (0, 1))
                    if any(rel):
                        relations.add(rel)
        if len(self.A) != self.group.order:
            raise InvariantError(f"cocycle tree reached {len(self.A)} elements, group has {self.group.order}")
        for rel in sorted(relations):
            _howell_insert(self.pivots, list(rel), self.ell, self.n)
        logger.info(
            f"cocycle system: |G|={self.group.order}, {k} generators, "
            f"{len(relations)} distinct relations, {len(self.pivots)} pivots"
        )

    def evaluate(self, X: tuple[RawVec, ...], key: Key) -> RawVec:
        q = self.q
        x0 = x1 = 0
        for xj, a in zip(X, self.A[key]):
            w = vec_mat(xj, a, q)
            x0 += w[0]
            x1 += w[1]
        return (x0 % q, x1 % q)

    def is_cocycle(self, X: tuple[RawVec, ...]) -> bool:
        flat = [c for xj in X for c in xj]
        return all(sum(a * b for a, b in zip(r, flat)) % self.q == 0 for r in self.pivots.values())

    def cocycle(self, values: list[RawVec] | tuple[RawVec, ...]) -> "Cocycle":
        """生成元上の値からコサイクルを作る。関係式を満たさなければ InputError。"""
        if len(values) != len(self.gens):
            raise InputError(f"expected {len(self.gens)} generator values, got {len(values)}")
        X = tuple((v[0] % self.q, v[1] % self.q) for v in values)
        if not self.is_cocycle(X):
            raise InputError("generator values do not extend to a cocycle")
        return Cocycle(self, X)

    def coboundary(self, T: RawVec) -> "Cocycle":
        """ξ_T(g) = T·g − T"""
        q = self.q
        X = []
        for s in self.actions:
            w = vec_mat(T, s, q)
            X.append(((w[0] - T[0]) % q, (w[1] - T[1]) % q))
        return Cocycle(self, tuple(X))


@dataclass(frozen=True)
class Cocycle:
    """生成元上の値で決まるコサイクル。全元への拡張は CocycleSystem が持つ。"""
    system: CocycleSystem = field(repr=False)
    on_generators: tuple[RawVec, ...]

    @property
    def level(self) -> int:
        return self.system.n

    def __call__(self, key: Key) -> RawVec:
        return self.system.evaluate(self.on_generators, key)

    def verify(self, trials: int = 1000, rng: random.Random | None = None) -> bool:
        """ランダムな (g, h) でコサイクル条件 ξ(gh) = ξ(g)·h + ξ(h) を確かめる。"""
        rng = rng or random.Random(0)
        sys_ = self.system
        keys = list(sys_.group.keys())
        m_mod, q = sys_.group.ctx.modulus, sys_.q
        for _ in range(trials):
            g, h = rng.choice(keys), rng.choice(keys)
            lhs = self(mat_mul(g, h, m_mod))
            a = vec_mat(self(g), tuple(x % q for x in h), q)  # type: ignore[arg-type]
            b = self(h)
            if lhs != ((a[0] + b[0]) % q, (a[1] + b[1]) % q):
                return False
        return True


# =============================================
# H¹
# =============================================


@dataclass(frozen=True)
class H1Result:
    ell: int
    level: int
    module_level: int
    group_order: int
    factors: list[int]
    exponent: int
    sah_bound: int
    z1_order: int
    b1_order: int
    fixed_order: int
    z1_basis: list[Cocycle] = field(default_factory=list, repr=False, compare=False)

    @property
    def structure(self) -> str:
        if not self.factors:
            return "trivial"
        return " × ".join(f"Z/{f}" for f in self.factors)

    def to_record(self) -> dict:
        return {
            "ell": self.ell,
            "level": self.level,
            "module_level": self.module_level,
            "group_order": self.group_order,
            "factors": list(self.factors),
            "structure": self.structure,
            "exponent": self.exponent,
            "sah_bound": self.sah_bound,
            "z1_order": self.z1_order,
            "b1_order": self.b1_order,
            "fixed_order": self.fixed_order,
        }


def sah_exponent_bound(G: ClosedSubgroup) -> int:
    """スカラー xI ∈ G（中心元）について x−1 = 単数·ℓ^r が H¹ を消すので、指数は ℓ^r を割る。"""
    return G.ctx.ell ** compute_r(G)


def _fixed_order(system: CocycleSystem) -> int:
    """|M^G|: 全生成元 s について T·(s − I) = 0 となる T の個数"""
    q = system.q
    rows = [[0] * system.width for _ in range(2)]
    for j, s in enumerate(system.actions):
        c = ((s[0] - 1) % q, s[1], s[2], (s[3] - 1) % q)
        for t in (0, 1):
            for col in (0, 1):
                rows[t][2 * j + col] = c[2 * t + col]
    vals, _, _ = _snf(rows, system.width, system.ell, system.n)
    return system.ell ** (vals[0] + vals[1])


def h1(G: ClosedSubgroup, n: int) -> H1Result:
    """H¹(G, (Z/ℓ^n)²) の不変因子・指数・Sah の上界を返す。"""
    system = CocycleSystem(G, n)
    ell, q = system.ell, system.q
    width = system.width

    vals, Q, Qi = _snf(list(system.pivots.values()), width, ell, n)
    z1_cols = [i for i in range(width) if vals[i] > 0]
    z1_order = ell ** sum(vals[i] for i in z1_cols)

    basis = []
    for i in z1_cols:
        scale = ell ** (n - vals[i])
        flat = [Q[r][i] * scale % q for r in range(width)]
        X = tuple((flat[2 * j], flat[2 * j + 1]) for j in range(len(system.gens)))
        basis.append(Cocycle(system, X))

    # 余境界を Z¹ の座標に写した関係式と位数関係式から H¹ を表示する
    presentation: list[list[int]] = []
    for idx, i in enumerate(z1_cols):
        if vals[i] < n:
            row = [0] * len(z1_cols)
            row[idx] = ell ** vals[i]
            presentation.append(row)
    for T in ((1, 0), (0, 1)):
        b = system.coboundary(T)
        Y = _mat_vec(Qi, [c for xj in b.on_generators for c in xj], q)
        coords = []
        for i in range(width):
            step = ell ** (n - vals[i])
            if Y[i] % step:
                raise InvariantError(f"coboundary of {T} is not in Z1 (coordinate {i})")
            if vals[i] > 0:
                coords.append(Y[i] // step)
        presentation.append(coords)

    factors: list[int] = []
    if z1_cols:
        fvals, _, _ = _snf(presentation, len(z1_cols), ell, n)
        factors = sorted(ell ** f for f in fvals if f > 0)
    h1_order = 1
    for f in factors:
        h1_order *= f
    if z1_order % h1_order:
        raise InvariantError(f"|H1| = {h1_order} does not divide |Z1| = {z1_order}")
    b1_order = z1_order // h1_order

    fixed = _fixed_order(system)
    if b1_order * fixed != q * q:
        raise InvariantError(f"|B1|·|M^G| = {b1_order}·{fixed} != {q * q}")

    exponent = max(factors, default=1)
    sah = sah_exponent_bound(G)
    if sah % exponent:
        raise InvariantError(f"H1 exponent {exponent} does not divide the Sah bound {sah}")
    return H1Result(
        ell=ell,
        level=G.ctx.m,
        module_level=n,
        group_order=G.order,
        factors=factors,
        exponent=exponent,
        sah_bound=sah,
        z1_order=z1_order,
        b1_order=b1_order,
        fixed_order=fixed,
        z1_basis=basis,
    )


@dataclass(frozen=True)
class H1Tower:
    levels: list[int]
    results: list[H1Result]

    @property
    def stable(self) -> bool:
        """観測した範囲で構造が一定か（一般の安定化は主張しない）"""
        return len({tuple(r.factors) for r in self.results}) <= 1


def h1_tower(spec: SubgroupSpec, n: int, levels: list[int] | range) -> H1Tower:
    """各レベル m' での G の完全逆像（または還元）について H¹(·, (Z/ℓ^n)²) を計算する。"""
    if n < 1:
        raise InputError(f"module level must be >= 1, got {n}")
    levels = list(levels)
    if not levels:
        raise InputError("tower needs at least one level")
    base = close(spec)
    results = []
    for m in levels:
        if m < n:
            raise InputError(f"group level {m} is below the module level {n}")
        results.append(h1(preimage_at_level(base, m), n))
    return H1Tower(levels=levels, results=results)
