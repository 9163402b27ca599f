"""ecq のテスト

楕円曲線の群演算・mod p 還元・点の数え上げ・位数判定・素数スキャン・
有理点の ℓ 分割と可除深さをカバーする。
"""
import random
from fractions import Fraction

import pytest
from sympy import primerange

from src import config
from src.ecq import (
    INFINITY,
    CurveFp,
    CurveQ,
    Point,
    _count_bsgs,
    _count_exhaustive,
    compute_d,
    density_scan,
    divide_point,
    divisibility_cross_check,
    group_order,
    is_torsion,
    order_coprime_to_ell,
    point_order,
    rational_ell_power_torsion,
    reduce_mod_p,
)
from src.errors import BadReductionError, EmptyResultError, InputError
from tests.helpers import CURVE_37A, CURVE_X2A


@pytest.fixture
def e37():
    """y² + y = x³ − x（導手 37）と生成元 (0, 0)"""
    E = CurveQ.from_list(CURVE_37A)
    return E, E.point(0, 0)


@pytest.fixture
def x2a():
    """y² = x³ − 343x + 2401 と (0, −49)"""
    E = CurveQ.from_list(CURVE_X2A)
    return E, E.point(0, -49)


@pytest.fixture
def congruent():
    """y² = x³ − x（有理点は 2 ねじれ点のみ）"""
    return CurveQ.from_list([0, 0, 0, -1, 0])


class TestCurveQ:
    """Q 上の曲線と群演算"""

    def test_discriminant(self, e37):
        """37a の判別式は 37"""
        E, _ = e37
        assert E.discriminant == 37

    def test_singular_rejected(self):
        """判別式 0 の曲線は InputError"""
        with pytest.raises(InputError):
            CurveQ.from_list([0, 0, 0, 0, 0])

    def test_point_not_on_curve(self, e37):
        """曲線上にない点は InputError"""
        E, _ = e37
        with pytest.raises(InputError):
            E.point(1, 1)

    def test_multiples(self, e37):
        """(0,0) の倍数: 2P=(1,0), 3P=(−1,−1), 4P=(2,−3), 5P=(1/4,−5/8)"""
        E, P = e37
        assert E.mul(2, P) == Point(1, 0)
        assert E.mul(3, P) == Point(-1, -1)
        assert E.mul(4, P) == Point(2, -3)
        assert E.mul(5, P) == Point(Fraction(1, 4), Fraction(-5, 8))
        assert E.add(E.mul(2, P), E.mul(3, P)) == E.mul(5, P)

    def test_negation(self, e37):
        """−(0,0) = (0,−1) で P + (−P) = ∞"""
        E, P = e37
        assert E.neg(P) == Point(0, -1)
        assert E.add(P, E.neg(P)) == INFINITY
        assert E.mul(-2, P) == E.neg(E.mul(2, P))
        assert E.add(P, INFINITY) == P
        assert E.mul(0, P) == INFINITY

    def test_torsion_detection(self, e37, congruent):
        """2 ねじれ点はねじれ、37a の生成元は非ねじれ"""
        E, P = e37
        assert not is_torsion(E, P)
        assert is_torsion(congruent, congruent.point(0, 0))
        assert is_torsion(congruent, INFINITY)


class TestReduction:
    """mod p 還元"""

    def test_bad_prime(self, e37):
        """p = 37 は BadReductionError"""
        E, P = e37
        with pytest.raises(BadReductionError):
            reduce_mod_p(E, P, 37)

    def test_point_with_p_in_denominator(self, e37):
        """分母に p を持つ点は InputError"""
        E, P = e37
        with pytest.raises(InputError):
            reduce_mod_p(E, E.mul(5, P), 2)

    def test_reduction_is_homomorphism(self, e37):
        """還元は倍写像と可換"""
        E, P = e37
        Ep, Pp = reduce_mod_p(E, P, 101)
        _, P3 = reduce_mod_p(E, E.mul(3, P), 101)
        assert Ep.mul(3, Pp) == P3

    def test_composite_rejected(self, e37):
        """素数でない p は InputError"""
        E, P = e37
        with pytest.raises(InputError):
            reduce_mod_p(E, P, 15)


class TestPointCounts:
    """|E(F_p)|"""

    def test_small_primes(self, e37):
        """37a は #E(F₂) = 5, #E(F₃) = 7"""
        E, P = e37
        assert group_order(reduce_mod_p(E, P, 2)[0]) == 5
        assert group_order(reduce_mod_p(E, P, 3)[0]) == 7

    def test_exhaustive_matches_point_list(self, e37):
        """Legendre 記号の和と点の列挙が一致する"""
        E, P = e37
        for p in primerange(3, 200):
            if p == 37:
                continue
            Ep, _ = reduce_mod_p(E, P, p)
            assert _count_exhaustive(Ep) == sum(1 for _ in Ep.points())

    def test_bsgs_matches_exhaustive(self, e37, x2a):
        """BSGS（二次ねじり併用）の結果は全数えと一致する"""
        for E, P in (e37, x2a):
            for p in primerange(50, 400):
                try:
                    Ep, _ = reduce_mod_p(E, P, p)
                except BadReductionError:
                    continue
                assert _count_bsgs(Ep) == _count_exhaustive(Ep)

    def test_large_primes_satisfy_hasse(self, e37):
        """p ≥ 1000 でも Hasse の範囲に入り、N·Q = ∞"""
        E, P = e37
        rng = random.Random(2)
        for p in primerange(1000, 1100):
            Ep, _ = reduce_mod_p(E, P, p)
            N = group_order(Ep)
            assert (N - p - 1) ** 2 <= 4 * p
            for _ in range(5):
                Q = Ep.random_point(rng)
                assert Ep.is_on_curve(Q)
                assert Ep.mul(N, Q).is_infinity
                assert N % point_order(Ep, Q) == 0

    def test_twist_orders_sum(self, e37):
        """#E + #E^D = 2p + 2"""
        E, P = e37
        for p in (5, 7, 11, 101):
            Ep, _ = reduce_mod_p(E, P, p)
            assert _count_exhaustive(Ep) + _count_exhaustive(Ep.quadratic_twist()) == 2 * p + 2

    def test_bad_reduction_curve(self):
        """F_p 上で特異なら BadReductionError"""
        with pytest.raises(BadReductionError):
            CurveFp(37, 0, 0, 1, -1, 0)


class TestCoprimeOrder:
    """位数が ℓ と素かの判定"""

    def test_infinity(self, e37):
        """∞ は常に ℓ と素"""
        E, P = e37
        Ep, _ = reduce_mod_p(E, P, 5)
        assert order_coprime_to_ell(Ep, INFINITY, 2)

    def test_point_of_order_ell(self, e37):
        """位数 ℓ の点は ℓ と素でない"""
        E, P = e37
        rng = random.Random(4)
        checked = 0
        for p in primerange(5, 200):
            if p == 37:
                continue
            Ep, _ = reduce_mod_p(E, P, p)
            N = group_order(Ep)
            if N % 2:
                continue
            for _ in range(10):
                Q = Ep.mul(N // 2, Ep.random_point(rng))
                if not Q.is_infinity:
                    assert point_order(Ep, Q) == 2
                    assert not order_coprime_to_ell(Ep, Q, 2)
                    checked += 1
                    break
        assert checked > 0

    @pytest.mark.parametrize("ell", [2, 3])
    def test_cross_check_below_1000(self, e37, x2a, ell):
        """p < 1000 の全ての良い素数で ℓ^e 倍の像による判定と一致する"""
        for E, P in (e37, x2a):
            for p in primerange(2, 1000):
                try:
                    Ep, Pp = reduce_mod_p(E, P, p)
                except InputError:
                    continue
                assert divisibility_cross_check(Ep, Pp, ell)

    def test_cross_check_limit(self, e37):
        """全数えの上限以上の p は InputError"""
        E, P = e37
        Ep, Pp = reduce_mod_p(E, P, 1009)
        with pytest.raises(InputError):
            divisibility_cross_check(Ep, Pp, 2)


class TestDensityScan:
    """素数スキャン"""

    def test_counts(self, e37):
        """p ≤ 100 では 37 だけが悪い素数"""
        E, P = e37
        result = density_scan(E, P, 2, 100)
        assert result.good == 24
        assert result.skipped == 1
        assert result.fraction == Fraction(result.coprime, result.good)
        assert [o.prime for o in result.outcomes if not o.good] == [37]

    def test_workers_do_not_change_result(self, e37):
        """並列度によらず同じ結果"""
        E, P = e37
        a = density_scan(E, P, 2, 3000, workers=1)
        b = density_scan(E, P, 2, 3000, workers=3)
        assert a.fraction == b.fraction
        assert a.outcomes == b.outcomes

    def test_empty_scan(self, e37):
        """良い素数がなければ EmptyResultError"""
        E, P = e37
        with pytest.raises(EmptyResultError):
            density_scan(E, P, 2, 1)

    def test_torsion_point_rejected(self, congruent):
        """ねじれ点は InputError"""
        with pytest.raises(InputError):
            density_scan(congruent, congruent.point(0, 0), 2, 100)

    @pytest.mark.slow
    def test_approaches_surjective_density(self, e37):
        """37a, ℓ = 2 で p ≤ 10⁵ の割合は 11/21 から 0.03 以内"""
        E, P = e37
        result = density_scan(E, P, 2, 100_000, workers=config.WORKERS)
        assert abs(result.fraction - Fraction(11, 21)) < Fraction(3, 100)


class TestDivision:
    """有理点の ℓ 分割と可除深さ"""

    def test_two_torsion(self, congruent):
        """y² = x³ − x の ∞ の 2 分割は 4 点"""
        E = congruent
        points = divide_point(E, INFINITY, 2)
        assert points == [INFINITY, Point(-1, 0), Point(0, 0), Point(1, 0)]

    def test_torsion_search(self, congruent, e37):
        """有理 2 冪ねじれ点の探索"""
        assert len(rational_ell_power_torsion(congruent, 2)) == 4
        assert rational_ell_power_torsion(congruent, 3) == [INFINITY]
        E, _ = e37
        assert rational_ell_power_torsion(E, 2) == [INFINITY]

    def test_halving(self, e37):
        """(1, 0) = 2·(0, 0) の 2 分割は (0, 0) だけ"""
        E, P = e37
        assert divide_point(E, Point(1, 0), 2) == [P]

    def test_thirding(self, e37):
        """(−1, −1) = 3·(0, 0) の 3 分割は (0, 0) だけ"""
        E, P = e37
        assert divide_point(E, E.mul(3, P), 3) == [P]

    def test_generator_is_indivisible(self, e37, x2a):
        """37a の (0,0) と X2a の (0,−49) は d = 0"""
        E, P = e37
        assert compute_d(E, P, 2) == 0
        assert compute_d(E, P, 3) == 0
        E, P = x2a
        assert divide_point(E, P, 2) == []
        assert compute_d(E, P, 2) == 0

    @pytest.mark.parametrize("multiple", [1, -1, 3, -3, 5])
    @pytest.mark.parametrize("k", [1, 2])
    def test_round_trip(self, e37, multiple, k):
        """奇数倍 γ について d(2^k·γ) = k"""
        E, P = e37
        gamma = E.mul(multiple, P)
        assert compute_d(E, E.mul(2 ** k, gamma), 2) == k

    @pytest.mark.parametrize("multiple", [1, -1, 3])
    def test_round_trip_depth_three(self, e37, multiple):
        """d(8·γ) = 3"""
        E, P = e37
        assert compute_d(E, E.mul(8 * multiple, P), 2) == 3

    def test_round_trip_three(self, e37):
        """d(3·γ) = 1（ℓ = 3）"""
        E, P = e37
        assert compute_d(E, E.mul(6, P), 3) == 1

    def test_unsupported_ell(self, e37):
        """ℓ ∉ {2, 3} は InputError"""
        E, P = e37
        with pytest.raises(InputError):
            divide_point(E, P, 5)

    def test_torsion_rejected(self, congruent):
        """ねじれ点の d は InputError"""
        with pytest.raises(InputError):
            compute_d(congruent, congruent.point(0, 0), 2)
