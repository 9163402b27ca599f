"""テスト用ヘルパー

ランダム部分群コーパス・群ファイル/曲線ファイルの書き出し・
H¹ の総当たりオラクルを提供する。
"""
import json
import random
from itertools import product
from pathlib import Path

from src.modring import ModCtx, ModMat, ModVec, mat_mul, vec_mat
from src.sdgroup import AffineElement, ClosedSubgroup, SubgroupSpec, close, gamma_generators, gl2_generators


def linear_spec(ell: int, m: int, mats: list) -> SubgroupSpec:
    ctx = ModCtx(ell, m)
    return SubgroupSpec(ctx, "linear", tuple(ModMat(ctx, tuple(g)) for g in mats))


def affine_spec(ell: int, m: int, gens: list) -> SubgroupSpec:
    """gens: [(v, g), ...]"""
    ctx = ModCtx(ell, m)
    return SubgroupSpec(
        ctx, "affine", tuple(AffineElement(ModVec(ctx, tuple(v)), ModMat(ctx, tuple(g))) for v, g in gens)
    )


def full_affine_spec(ell: int, m: int) -> SubgroupSpec:
    ctx = ModCtx(ell, m)
    gens = [((1, 0), (1, 0, 0, 1)), ((0, 1), (1, 0, 0, 1))]
    gens += [((0, 0), g.entries) for g in gl2_generators(ctx)]
    return affine_spec(ell, m, gens)


def _random_unit_matrix(rng: random.Random, ell: int, m: int, shape: str = "any") -> tuple:
    n = ell ** m
    while True:
        a, b, c, d = (rng.randrange(n) for _ in range(4))
        if shape == "borel":
            c = 0
        elif shape == "diagonal":
            b = c = 0
        elif shape == "congruence":
            a, b, c, d = 1 + ell * a, ell * b, ell * c, 1 + ell * d
        if (a * d - b * c) % ell:
            return tuple(x % n for x in (a, b, c, d))


def random_subgroup_specs(count: int, seed: int = 0, levels=((2, 1), (2, 2), (3, 1), (3, 2))) -> list[SubgroupSpec]:
    """大小さまざまな線形部分群のコーパス（決定的）"""
    rng = random.Random(seed)
    specs = []
    for i in range(count):
        ell, m = levels[i % len(levels)]
        shape = rng.choice(["any", "borel", "diagonal", "congruence", "cyclic", "scalar"])
        if shape == "cyclic":
            mats = [_random_unit_matrix(rng, ell, m)]
        elif shape == "scalar":
            x = rng.randrange(1, ell ** m)
            while x % ell == 0:
                x = rng.randrange(1, ell ** m)
            mats = [(x, 0, 0, x)]
        elif shape == "congruence":
            mats = [_random_unit_matrix(rng, ell, m, shape) for _ in range(2)] if m > 1 else [(1, 0, 0, 1)]
            mats.append(_random_unit_matrix(rng, ell, m, "diagonal"))
        else:
            mats = [_random_unit_matrix(rng, ell, m, shape) for _ in range(rng.choice([1, 2]))]
        specs.append(linear_spec(ell, m, mats))
    return specs


def random_subgroups(count: int, seed: int = 0, levels=((2, 1), (2, 2), (3, 1), (3, 2))) -> list[ClosedSubgroup]:
    return [close(spec) for spec in random_subgroup_specs(count, seed, levels)]


def borel_spec(ell: int, m: int) -> SubgroupSpec:
    """上三角行列全体"""
    from sympy import primitive_root

    n = ell ** m
    units = [n - 1, 5] if ell == 2 and m >= 3 else ([n - 1] if ell == 2 and m == 2 else [])
    if ell != 2:
        units = [primitive_root(n)]
    mats = [(1, 1, 0, 1)] + [(u, 0, 0, 1) for u in units] + [(1, 0, 0, u) for u in units]
    return linear_spec(ell, m, mats)


def preimage_spec(ell: int, m: int, mats: list) -> SubgroupSpec:
    """mod ℓ の生成元の完全逆像をレベル m で与える。"""
    ctx = ModCtx(ell, m)
    gens = tuple(ModMat(ctx, tuple(g)) for g in mats) + tuple(gamma_generators(ctx, 1))
    return SubgroupSpec(ctx, "linear", gens)


# =============================================
# 総当たりオラクル
# =============================================


def brute_force_h1(G: ClosedSubgroup, n: int = 1) -> tuple[int, int]:
    """写像 G → (Z/ℓ^n)² を1元ずつ割り当てて (|H¹|, H¹ の指数) を返す。小さい群専用。

    割り当て済みの元どうしでコサイクル条件が破れた枝だけを刈るので、列挙は全写像と同じ結果になる。
    """
    ell, q = G.ctx.ell, G.ctx.ell ** n
    m_mod = G.ctx.modulus
    keys = list(G.keys())
    identity = (1, 0, 0, 1)
    others = [k for k in keys if k != identity]
    vectors = list(product(range(q), repeat=2))

    def act(v, g):
        return vec_mat(v, tuple(x % q for x in g), q)

    xi = {identity: (0, 0)}
    cocycles = []

    def consistent(k) -> bool:
        for g in xi:
            for h in xi:
                gh = mat_mul(g, h, m_mod)
                if gh not in xi or k not in (g, h, gh):
                    continue
                a = act(xi[g], h)
                b = xi[h]
                if xi[gh] != ((a[0] + b[0]) % q, (a[1] + b[1]) % q):
                    return False
        return True

    def extend(i: int) -> None:
        if i == len(others):
            cocycles.append(tuple(xi[k] for k in keys))
            return
        k = others[i]
        for value in vectors:
            xi[k] = value
            if consistent(k):
                extend(i + 1)
        del xi[k]

    extend(0)

    boundaries = set()
    for T in vectors:
        boundaries.add(tuple(
            ((act(T, g)[0] - T[0]) % q, (act(T, g)[1] - T[1]) % q) for g in keys
        ))
    order = len(cocycles) // len(boundaries)

    exponent = 1
    while True:
        if all(tuple((exponent * x % q, exponent * y % q) for x, y in z) in boundaries for z in cocycles):
            return order, exponent
        exponent *= ell


# =============================================
# ファイル
# =============================================


def write_group(path: Path, ell: int, level: int, generators: list, kind: str = "linear") -> str:
    """generators: 線形は [[a, b], [c, d]] の列、アフィンは {"matrix", "translation"} の列"""
    path.write_text(json.dumps({"ell": ell, "level": level, "kind": kind, "generators": generators}))
    return str(path)


def write_curve(path: Path, a: list, point) -> str:
    path.write_text(json.dumps({"a": a, "point": point}))
    return str(path)


# 既知の例の曲線（37a と X2a）
CURVE_37A = [0, 0, 1, -1, 0]
CURVE_X2A = [0, 0, 0, -343, 2401]
