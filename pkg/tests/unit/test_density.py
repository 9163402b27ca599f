"""density のテスト

分割点を固定する元の割合 f_n を閉じた式・アフィン群の列挙・単調性で確かめる。
"""
from fractions import Fraction

import pytest

from src import config
from src.density import (
    INDEX4_REFERENCE_DENSITY,
    FullImage,
    density_report,
    fix_fraction,
    surjective_density,
)
from src.errors import BudgetExceededError, InputError
from src.sdgroup import close, full_linear_spec
from src.modring import ModCtx
from tests.helpers import affine_spec, full_affine_spec


class TestClosedForm:
    """全射の場合の密度"""

    @pytest.mark.parametrize(
        "ell,expected",
        [(2, Fraction(11, 21)), (3, Fraction(139, 208)), (5, Fraction(2381, 2976))],
    )
    def test_values(self, ell, expected):
        """(ℓ⁵−ℓ⁴−ℓ³+ℓ+1)/(ℓ⁵−ℓ³−ℓ²+1)"""
        assert surjective_density(ell) == expected

    def test_rejects_composite(self):
        """素数でない ℓ は InputError"""
        with pytest.raises(InputError):
            surjective_density(6)

    def test_index4_reference(self):
        """指数4の像の参照値"""
        assert INDEX4_REFERENCE_DENSITY == Fraction(179, 336)


class TestFullImage:
    """全像での f_n"""

    def test_level_one(self):
        """f_1 は ℓ=2 で 5/8、ℓ=3 で 19/27"""
        assert fix_fraction(1, FullImage(2)) == Fraction(5, 8)
        assert fix_fraction(1, FullImage(3)) == Fraction(19, 27)

    def test_report_converges(self):
        """ℓ=2 で f_1 … f_4 は単調非増加で、f_4 − 11/21 < 0.02"""
        report = density_report(FullImage(2), 4)
        assert report.levels == [1, 2, 3, 4]
        assert report.monotone
        assert report.closed_form == Fraction(11, 21)
        assert all(g >= 0 for g in report.gaps)
        assert report.gaps[-1] < Fraction(2, 100)

    def test_workers_do_not_change_result(self):
        """並列度によらず同じ値"""
        assert fix_fraction(2, FullImage(3), workers=1) == fix_fraction(2, FullImage(3), workers=2)

    def test_budget(self, monkeypatch):
        """列挙が上限を超えると BudgetExceededError"""
        monkeypatch.setattr(config, "DENSITY_ELEMENT_LIMIT", 100)
        with pytest.raises(BudgetExceededError):
            fix_fraction(2, FullImage(2))

    def test_level_zero_rejected(self):
        """n = 0 は InputError"""
        with pytest.raises(InputError):
            fix_fraction(0, FullImage(2))


class TestAffineImage:
    """アフィン部分群の元の列挙"""

    @pytest.mark.parametrize("ell,n", [(2, 1), (2, 2), (3, 1)])
    def test_full_affine_matches_full_image(self, ell, n):
        """半直積全体を列挙した値は全像の和と一致する"""
        H = close(full_affine_spec(ell, n))
        assert fix_fraction(n, H) == fix_fraction(n, FullImage(ell))

    def test_trivial_group(self):
        """自明群は全レベル n ≤ m で 1"""
        H = close(affine_spec(2, 3, [((0, 0), (1, 0, 0, 1))]))
        report = density_report(H, 3)
        assert report.fractions == [1, 1, 1]
        assert report.closed_form is None

    def test_preimage_levels(self):
        """n > m では完全逆像を列挙し、割合は単調非増加"""
        H = close(full_affine_spec(2, 1))
        report = density_report(H, 2)
        assert report.fractions[0] == Fraction(5, 8)
        assert report.fractions[1] == fix_fraction(2, FullImage(2))

    def test_pure_translations(self):
        """平行移動だけの群では v = 0 のときだけ固定する"""
        H = close(affine_spec(2, 1, [((1, 0), (1, 0, 0, 1)), ((0, 1), (1, 0, 0, 1))]))
        assert fix_fraction(1, H) == Fraction(1, 4)

    def test_fixing_uses_g_minus_identity(self):
        """((1,0), [[1,1],[0,1]]) が生成する位数4の群では単位元だけが固定する"""
        H = close(affine_spec(2, 1, [((1, 0), (1, 1, 0, 1))]))
        assert H.order == 4
        assert fix_fraction(1, H) == Fraction(1, 4)

    def test_unipotent_without_translation_fixes(self):
        """平行移動 0 の元は常に固定する"""
        H = close(affine_spec(2, 2, [((0, 0), (1, 1, 0, 1)), ((0, 0), (3, 0, 0, 3))]))
        assert fix_fraction(2, H) == 1

    def test_linear_group_rejected(self):
        """線形部分群は InputError"""
        with pytest.raises(InputError):
            fix_fraction(1, close(full_linear_spec(ModCtx(2, 1))))
