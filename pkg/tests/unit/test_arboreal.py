"""arboreal のテスト

r, s, n_ℓ の計算・主定理の上界・Kummer 軌道部分群・既知の例の数値をカバーする。
"""
import logging
from itertools import product

import pytest

from src.arboreal import (
    REFERENCE_EXAMPLES,
    X238A_H1_EXPONENT,
    BoundParams,
    analyze,
    cohomological_bound,
    compute_n_ell,
    compute_r,
    compute_s,
    containment_level,
    disjointness_level,
    kummer_orbit,
    stable_lines,
    theorem1_bound,
)
from src.errors import InputError
from src.modring import ModCtx, ModVec
from src.sdgroup import close, full_linear_spec
from tests.helpers import borel_spec, linear_spec, preimage_spec, random_subgroups


def _primitive_vectors(ctx):
    n = ctx.modulus
    return [ModVec(ctx, v) for v in product(range(n), repeat=2) if v[0] % ctx.ell or v[1] % ctx.ell]


class TestComputeR:
    """スカラー部分の付値 r"""

    def test_full_group(self):
        """GL₂(Z/4) は −I を含むので r = 1"""
        assert compute_r(close(full_linear_spec(ModCtx(2, 2)))) == 1

    def test_scalar_five(self):
        """{I, 5I} ⊂ GL₂(Z/8) は r = 2"""
        assert compute_r(close(linear_spec(2, 3, [(5, 0, 0, 5)]))) == 2

    def test_trivial_group_saturates(self):
        """自明群の r はレベル m"""
        assert compute_r(close(linear_spec(3, 2, [(1, 0, 0, 1)]))) == 2

    def test_scalar_mod_three(self):
        """4I mod 9 は r = 1"""
        assert compute_r(close(linear_spec(3, 2, [(4, 0, 0, 4)]))) == 1


class TestComputeS:
    """安定な巡回部分群のレベル s"""

    def test_full_group(self):
        """GL₂(F₂) は直線を安定化しないので s = 0"""
        assert compute_s(close(full_linear_spec(ModCtx(2, 1)))) == 0

    def test_unipotent(self):
        """[[1,1],[0,1]] は (0,1) を固定するので s = 1"""
        G = close(linear_spec(2, 1, [(1, 1, 0, 1)]))
        assert compute_s(G) == 1
        assert (0, 1) in stable_lines(G, 1)

    def test_scalar_only_saturates(self):
        """スカラーだけの群は s = m"""
        assert compute_s(close(linear_spec(2, 2, [(3, 0, 0, 3)]))) == 2

    def test_borel_saturates(self):
        """上三角の群は全レベルで s = m"""
        for ell, m in ((2, 1), (2, 2), (2, 3), (3, 2)):
            assert compute_s(close(borel_spec(ell, m))) == m

    def test_stable_lines_match_brute_force(self):
        """安定な直線の判定を全原始ベクトルの軌道と突き合わせる"""
        for G in random_subgroups(40, seed=21):
            ctx = G.ctx
            s = compute_s(G)
            if s == 0:
                continue
            lines = stable_lines(G, s)
            assert lines
            n = ctx.ell ** s
            for p in lines:
                line = {(k * p[0] % n, k * p[1] % n) for k in range(n)}
                for g in G.keys():
                    a, b, c, d = (x % n for x in g)
                    image = ((p[0] * a + p[1] * c) % n, (p[0] * b + p[1] * d) % n)
                    assert image in line


class TestComputeNEll:
    """Γ(ℓ^n) を含む最小の n"""

    def test_full_group(self):
        """全射なら n_ℓ = 1"""
        assert compute_n_ell(close(full_linear_spec(ModCtx(2, 3)))) == 1

    def test_scalar_group(self):
        """{I, 3I} ⊂ GL₂(Z/4) は n_ℓ = 2"""
        assert compute_n_ell(close(linear_spec(2, 2, [(3, 0, 0, 3)]))) == 2

    def test_index_two_preimage(self):
        """mod 2 の条件だけで決まる群は n_ℓ = 1"""
        assert compute_n_ell(close(preimage_spec(2, 2, [(0, 1, 1, 1)]))) == 1


class TestBound:
    """主定理の上界の公式"""

    def test_formula(self):
        """ℓ^{2d+2r+s}·index"""
        params = BoundParams(ell=2, d=1, r=2, s=1, index=3)
        assert theorem1_bound(params) == 2 ** 7 * 3
        assert containment_level(params) == 4
        assert disjointness_level(params) == 4

    def test_known_examples(self):
        """既知の例の上界"""
        assert theorem1_bound(REFERENCE_EXAMPLES["surjective"]) == 4
        assert theorem1_bound(REFERENCE_EXAMPLES["X2a"]) == 64
        assert theorem1_bound(REFERENCE_EXAMPLES["X238a"]) == 49152
        assert theorem1_bound(REFERENCE_EXAMPLES["X243g"]) == 98304
        assert theorem1_bound(REFERENCE_EXAMPLES["borel"]) == 24

    def test_cohomological_refinement(self):
        """X238a で Sah の ℓ^r を実際の指数 4 に置き換えると 3072"""
        assert cohomological_bound(REFERENCE_EXAMPLES["X238a"], X238A_H1_EXPONENT) == 3072

    def test_cohomological_rejects_large_exponent(self):
        """H¹ の指数が ℓ^r を超えれば InputError"""
        with pytest.raises(InputError):
            cohomological_bound(REFERENCE_EXAMPLES["surjective"], 4)

    def test_cohomological_rejects_non_power(self):
        """ℓ 冪でない指数は InputError"""
        with pytest.raises(InputError):
            cohomological_bound(REFERENCE_EXAMPLES["X238a"], 6)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"ell": 4, "d": 0, "r": 1, "s": 0, "index": 1},
            {"ell": 2, "d": -1, "r": 1, "s": 0, "index": 1},
            {"ell": 2, "d": 0, "r": 0, "s": 0, "index": 1},
            {"ell": 2, "d": 0, "r": 1, "s": -1, "index": 1},
            {"ell": 2, "d": 0, "r": 1, "s": 0, "index": 0},
        ],
    )
    def test_invalid_params(self, kwargs):
        """不正なパラメータは InputError"""
        with pytest.raises(InputError):
            BoundParams(**kwargs)


class TestKummerOrbit:
    """p·G が生成する部分群 S"""

    def test_full_group(self):
        """全射なら S は全体で k' = 0"""
        ctx = ModCtx(2, 3)
        orbit = kummer_orbit(ModVec(ctx, (1, 0)), close(full_linear_spec(ctx)))
        assert orbit.S.is_full()
        assert orbit.k_prime == 0

    def test_scalar_group(self):
        """スカラーだけなら S は p の張る直線で k' = m"""
        ctx = ModCtx(2, 2)
        G = close(linear_spec(2, 2, [(3, 0, 0, 3)]))
        orbit = kummer_orbit(ModVec(ctx, (1, 0)), G)
        assert orbit.k_prime == 2
        assert orbit.S.cyclic

    def test_borel_moves_first_axis(self):
        """上三角の群では (1,0) の軌道が全体を張る"""
        ctx = ModCtx(2, 3)
        orbit = kummer_orbit(ModVec(ctx, (1, 0)), close(borel_spec(2, 3)))
        assert orbit.k_prime == 0

    def test_non_primitive_rejected(self):
        """原始的でない基点は InputError"""
        ctx = ModCtx(2, 2)
        with pytest.raises(InputError):
            kummer_orbit(ModVec(ctx, (2, 0)), close(full_linear_spec(ctx)))

    def test_random_corpus(self):
        """ランダムな群と全原始ベクトルで k' ≤ s と ℓ^{k'} 倍の包含が成り立つ"""
        groups = random_subgroups(200, seed=5, levels=((2, 1), (2, 2), (2, 3), (3, 1), (3, 2)))
        for G in groups:
            s = compute_s(G)
            sample = [g for g, _ in zip(G, range(64))]
            for p in _primitive_vectors(G.ctx):
                orbit = kummer_orbit(p, G, s)
                assert orbit.k_prime <= s
                assert orbit.S.contains_all_multiples(orbit.k_prime)
                for g in sample:
                    assert orbit.S.contains(p @ g)


class TestAnalyze:
    """群からの一括計算"""

    def test_full_gl2_mod4(self):
        """GL₂(Z/4), d = 0: r=1, s=0, n=1, 指数1, 上界4"""
        report = analyze(full_linear_spec(ModCtx(2, 2)), 0)
        assert (report.r, report.s, report.n_ell, report.index, report.bound) == (1, 0, 1, 1, 4)
        assert report.saturated == []
        assert report.remark_exponent == 3
        assert report.comparison_exponent == 4

    def test_scalar_mod4(self, caplog):
        """{I, 3I} ⊂ GL₂(Z/4), d = 0: r=1, s=2, n=2, 指数48, 上界768（s は飽和）"""
        with caplog.at_level(logging.WARNING):
            report = analyze(linear_spec(2, 2, [(3, 0, 0, 3)]), 0)
        assert (report.r, report.s, report.n_ell, report.index, report.bound) == (1, 2, 2, 48, 768)
        assert report.saturated == ["s"]
        assert "saturated" in caplog.text

    def test_d_enters_bound(self):
        """d が1増えると上界は ℓ² 倍"""
        spec = full_linear_spec(ModCtx(3, 1))
        assert analyze(spec, 2).bound == analyze(spec, 0).bound * 3 ** 4

    def test_negative_d_rejected(self):
        """d < 0 は InputError"""
        with pytest.raises(InputError):
            analyze(full_linear_spec(ModCtx(2, 1)), -1)

    def test_invariants_over_corpus(self):
        """ランダムな群で 1 ≤ r ≤ m かつ r, s ≤ n_ℓ"""
        for G in random_subgroups(200, seed=9):
            r, s, n = compute_r(G), compute_s(G), compute_n_ell(G)
            assert 1 <= r <= G.ctx.m
            assert r <= n
            assert s <= n
