"""分割点を固定する元の割合 f_n

(v, g) が ℓ^n 分割点を固定する ⟺ w·(g − I) = −v が解を持つ。
im ω のレベル n の像でこの割合 f_n を厳密な有理数で数える。
f_n は n について単調非増加で、その極限が「α の位数が ℓ と素な素数の密度」になる。
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from sympy import isprime

from src import config
from src.errors import BudgetExceededError, InputError, InvariantError
from src.modring import affine_solvable_raw, gl2_order, image_order_raw
from src.sdgroup import ClosedSubgroup

logger = logging.getLogger(__name__)

# 指数4の像で知られている奇数位数密度（像そのものはユーザー提供の群ファイルで扱う）
INDEX4_REFERENCE_DENSITY = Fraction(179, 336)


@dataclass(frozen=True)
class FullImage:
    """(Z_ℓ)² ⋊ GL₂(Z_ℓ) 全体"""
    ell: int

    def __post_init__(self):
        if not isprime(self.ell):
            raise InputError(f"ell must be a prime, got {self.ell}")

    def describe(self) -> str:
        return "full"


Image = FullImage | ClosedSubgroup


def surjective_density(ell: int) -> Fraction:
    """ω が全射のときの密度 (ℓ⁵−ℓ⁴−ℓ³+ℓ+1)/(ℓ⁵−ℓ³−ℓ²+1)"""
    if not isprime(ell):
        raise InputError(f"ell must be a prime, got {ell}")
    return Fraction(ell**5 - ell**4 - ell**3 + ell + 1, ell**5 - ell**3 - ell**2 + 1)


# =============================================
# f_n
# =============================================


def _full_chunk(args: tuple[int, int, int]) -> int:
    """先頭成分 a を固定した g ∈ GL₂ についての Σ |im(g − I)|"""
    ell, n, a = args
    q = ell ** n
    total = 0
    for b, c, d in product(range(q), repeat=3):
        if (a * d - b * c) % ell:
            total += image_order_raw(((a - 1) % q, b, c, (d - 1) % q), ell, n)
    return total


def _full_fraction(ell: int, n: int, workers: int) -> Fraction:
    q = ell ** n
    if q ** 4 > config.DENSITY_ELEMENT_LIMIT:
        raise BudgetExceededError(
            f"enumerating GL2(Z/{q}) needs {q ** 4} steps, budget is {config.DENSITY_ELEMENT_LIMIT}"
        )
    jobs = [(ell, n, a) for a in range(q)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            total = sum(pool.map(_full_chunk, jobs))
    else:
        total = sum(map(_full_chunk, jobs))
    return Fraction(total, gl2_order(ell, n) * q * q)


def _fixes(v: tuple[int, int], g: tuple[int, int, int, int], ell: int, n: int) -> bool:
    """w·(g − I) = −v が解を持つか"""
    q = ell ** n
    return affine_solvable_raw(v, ((g[0] - 1) % q, g[1], g[2], (g[3] - 1) % q), ell, n)


def _affine_fraction(n: int, H: ClosedSubgroup) -> Fraction:
    ell, m = H.ctx.ell, H.ctx.m
    q = ell ** n
    if n <= m:
        hits = sum(
            1 for k in H.keys()
            if _fixes((k[0] % q, k[1] % q), tuple(x % q for x in k[2:]), ell, n)  # type: ignore[arg-type]
        )
        return Fraction(hits, H.order)

    # n > m: 完全逆像の元 (v + ℓ^m·u, g + ℓ^m·X) を全て数える
    lifts = ell ** (6 * (n - m))
    if H.order * lifts > config.DENSITY_ELEMENT_LIMIT:
        raise BudgetExceededError(
            f"full preimage at level {n} has {H.order * lifts} elements, budget is {config.DENSITY_ELEMENT_LIMIT}"
        )
    step, r = ell ** m, range(ell ** (n - m))
    hits = 0
    for k in H.keys():
        for u0, u1, x0, x1, x2, x3 in product(r, repeat=6):
            v = ((k[0] + step * u0) % q, (k[1] + step * u1) % q)
            g = ((k[2] + step * x0) % q, (k[3] + step * x1) % q, (k[4] + step * x2) % q, (k[5] + step * x3) % q)
            if _fixes(v, g, ell, n):
                hits += 1
    return Fraction(hits, H.order * lifts)


def fix_fraction(n: int, image: Image, workers: int | None = None) -> Fraction:
    """レベル n で −v ∈ im(g − I) となる (v, g) の割合

    全像では g ごとに |im(g − I)|/ℓ^{2n} を足し、アフィン部分群では元を列挙する。
    """
    if n < 1:
        raise InputError(f"level must be >= 1, got {n}")
    if isinstance(image, FullImage):
        return _full_fraction(image.ell, n, config.WORKERS if workers is None else workers)
    if image.kind != "affine":
        raise InputError("fix_fraction expects the full image or an affine subgroup")
    return _affine_fraction(n, image)


# =============================================
# レポート
# =============================================


@dataclass(frozen=True)
class FixFractionReport:
    ell: int
    image: str
    levels: list[int]
    fractions: list[Fraction]
    monotone: bool
    closed_form: Fraction | None = None
    gaps: list[Fraction] = field(default_factory=list)


def density_report(image: Image, n_max: int, workers: int | None = None) -> FixFractionReport:
    """f_1 … f_{n_max} を並べ、単調性と（全像なら）閉じた式との差を検査する。"""
    if n_max < 1:
        raise InputError(f"n_max must be >= 1, got {n_max}")
    levels = list(range(1, n_max + 1))
    fractions = [fix_fraction(n, image, workers) for n in levels]
    monotone = all(a >= b for a, b in zip(fractions, fractions[1:]))
    if not monotone:
        raise InvariantError(f"fixed-preimage fractions are not nonincreasing: {fractions}")

    if isinstance(image, FullImage):
        ell, label = image.ell, image.describe()
        closed = surjective_density(ell)
        gaps = [f - closed for f in fractions]
        if any(g < 0 for g in gaps):
            raise InvariantError(f"a finite-level fraction fell below the limit {closed}")
        logger.info(f"density ell={ell}: f_{n_max} - limit = {float(gaps[-1]):.6f}")
        return FixFractionReport(ell, label, levels, fractions, monotone, closed, gaps)

    ctx = image.ctx
    label = f"affine subgroup of order {image.order} at level {ctx.m}"
    return FixFractionReport(ctx.ell, label, levels, fractions, monotone)
