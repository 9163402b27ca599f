"""Q および F_p 上の楕円曲線（長 Weierstrass 形）

y² + a1·xy + a3·y = x³ + a2·x² + a4·x + a6

群演算・素数 p での還元・|E(F_p)|・「位数が ℓ と素か」の判定・素数密度スキャン・
有理点の ℓ 分割・可除深さ d を提供する。Q 上の値は全て Fraction で厳密に扱う。
"""
from __future__ import annotations

import logging
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt, lcm
from typing import Any, Iterator

from sympy import QQ, Poly, Rational, factorint, integer_nthroot, isprime, legendre_symbol, primerange, sqrt_mod, symbols

from src import config
from src.errors import BadReductionError, EmptyResultError, InputError, InvariantError

logger = logging.getLogger(__name__)

_X = symbols("x")

# Q 上のねじれ点の位数は 12 以下（Mazur）
MAZUR_ORDER_BOUND = 12
# 有理 ℓ 冪ねじれ点の探索深さ: 2 は位数 16、3 は位数 9 まで
TORSION_DEPTH = {2: 4, 3: 2}


@dataclass(frozen=True)
class Point:
    """アフィン点 (x, y)。x, y が None なら無限遠点。"""
    x: Any = None
    y: Any = None

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def __str__(self) -> str:
        return "O" if self.is_infinity else f"({self.x}, {self.y})"


INFINITY = Point()


def sort_key(P: Point) -> tuple:
    return (0,) if P.is_infinity else (1, P.x, P.y)


class _Weierstrass:
    """群演算の共通部分。係数体の演算は _norm と _inv で差し替える。"""
    a1: Any
    a2: Any
    a3: Any
    a4: Any
    a6: Any

    def _norm(self, x):
        raise NotImplementedError

    def _inv(self, x):
        raise NotImplementedError

    def is_on_curve(self, P: Point) -> bool:
        if P.is_infinity:
            return True
        x, y = P.x, P.y
        lhs = y * y + self.a1 * x * y + self.a3 * y
        rhs = x * x * x + self.a2 * x * x + self.a4 * x + self.a6
        return self._norm(lhs - rhs) == 0

    def point(self, x, y) -> Point:
        P = Point(self._norm(x), self._norm(y))
        if not self.is_on_curve(P):
            raise InputError(f"point {P} is not on the curve")
        return P

    def neg(self, P: Point) -> Point:
        if P.is_infinity:
            return P
        return Point(P.x, self._norm(-P.y - self.a1 * P.x - self.a3))

    def add(self, P: Point, Q: Point) -> Point:
        if P.is_infinity:
            return Q
        if Q.is_infinity:
            return P
        a1, a2, a3, a4, a6 = self.a1, self.a2, self.a3, self.a4, self.a6
        x1, y1, x2, y2 = P.x, P.y, Q.x, Q.y
        if x1 == x2:
            den = self._norm(2 * y1 + a1 * x1 + a3)
            if den == 0 or self._norm(y1 + y2 + a1 * x2 + a3) == 0:
                return INFINITY
            inv = self._inv(den)
            lam = self._norm((3 * x1 * x1 + 2 * a2 * x1 + a4 - a1 * y1) * inv)
            nu = self._norm((-x1 * x1 * x1 + a4 * x1 + 2 * a6 - a3 * y1) * inv)
        else:
            inv = self._inv(self._norm(x2 - x1))
            lam = self._norm((y2 - y1) * inv)
            nu = self._norm((y1 * x2 - y2 * x1) * inv)
        x3 = self._norm(lam * lam + a1 * lam - a2 - x1 - x2)
        y3 = self._norm(-(lam + a1) * x3 - nu - a3)
        return Point(x3, y3)

    def sub(self, P: Point, Q: Point) -> Point:
        return self.add(P, self.neg(Q))

    def mul(self, k: int, P: Point) -> Point:
        if k < 0:
            return self.mul(-k, self.neg(P))
        result, addend = INFINITY, P
        while k:
            if k & 1:
                result = self.add(result, addend)
            addend = self.add(addend, addend)
            k >>= 1
        return result


# =============================================
# Q 上の曲線
# =============================================


@dataclass(frozen=True)
class CurveQ(_Weierstrass):
    a1: Fraction
    a2: Fraction
    a3: Fraction
    a4: Fraction
    a6: Fraction

    def __post_init__(self):
        for name in ("a1", "a2", "a3", "a4", "a6"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if self.discriminant == 0:
            raise InputError("singular curve (discriminant is zero)")
        if 4 * self.b8 != self.b2 * self.b6 - self.b4 ** 2:
            raise InvariantError("b-quantities are inconsistent")

    @classmethod
    def from_list(cls, coeffs: list) -> "CurveQ":
        if len(coeffs) != 5:
            raise InputError(f"a curve needs [a1, a2, a3, a4, a6], got {len(coeffs)} coefficients")
        return cls(*(Fraction(c) for c in coeffs))

    def _norm(self, x):
        return Fraction(x)

    def _inv(self, x):
        return 1 / Fraction(x)

    @property
    def b2(self) -> Fraction:
        return self.a1 ** 2 + 4 * self.a2

    @property
    def b4(self) -> Fraction:
        return 2 * self.a4 + self.a1 * self.a3

    @property
    def b6(self) -> Fraction:
        return self.a3 ** 2 + 4 * self.a6

    @property
    def b8(self) -> Fraction:
        a1, a2, a3, a4, a6 = self.a1, self.a2, self.a3, self.a4, self.a6
        return a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4

    @property
    def discriminant(self) -> Fraction:
        b2, b4, b6, b8 = self.b2, self.b4, self.b6, self.b8
        return -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    def coefficients(self) -> tuple[Fraction, ...]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)


# =============================================
# F_p 上の曲線
# =============================================


@dataclass(frozen=True)
class CurveFp(_Weierstrass):
    p: int
    a1: int
    a2: int
    a3: int
    a4: int
    a6: int

    def __post_init__(self):
        if not isprime(self.p):
            raise InputError(f"p must be a prime, got {self.p}")
        for name in ("a1", "a2", "a3", "a4", "a6"):
            object.__setattr__(self, name, getattr(self, name) % self.p)
        if self.discriminant == 0:
            raise BadReductionError(f"bad reduction at p={self.p}")

    def _norm(self, x):
        return x % self.p

    def _inv(self, x):
        return pow(x, -1, self.p)

    @property
    def discriminant(self) -> int:
        p, a1, a2, a3, a4, a6 = self.p, self.a1, self.a2, self.a3, self.a4, self.a6
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return (-b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6) % p

    def _y_discriminant(self, x: int) -> int:
        """y に関する2次式の判別式 (a1x+a3)² + 4(x³+a2x²+a4x+a6)"""
        t = self.a1 * x + self.a3
        return (t * t + 4 * (x * x * x + self.a2 * x * x + self.a4 * x + self.a6)) % self.p

    def points(self) -> Iterator[Point]:
        """E(F_p) の全点（∞ を含む）"""
        p = self.p
        yield INFINITY
        for x in range(p):
            if p == 2:
                for y in range(2):
                    if self.is_on_curve(Point(x, y)):
                        yield Point(x, y)
                continue
            D = self._y_discriminant(x)
            if D == 0:
                yield Point(x, (-(self.a1 * x + self.a3)) * pow(2, -1, p) % p)
            elif legendre_symbol(D, p) == 1:
                s = sqrt_mod(D, p)
                for r in sorted({s, p - s}):
                    yield Point(x, (r - self.a1 * x - self.a3) * pow(2, -1, p) % p)

    def random_point(self, rng: random.Random) -> Point:
        p = self.p
        while True:
            x = rng.randrange(p)
            D = self._y_discriminant(x)
            if D and legendre_symbol(D, p) != 1:
                continue
            s = sqrt_mod(D, p) if D else 0
            if rng.randrange(2):
                s = (p - s) % p
            return Point(x, (s - self.a1 * x - self.a3) * pow(2, -1, p) % p)

    def quadratic_twist(self) -> "CurveFp":
        """非平方数 D によるねじり（p 奇数）。#E + #E^D = 2p + 2。"""
        p = self.p
        if p == 2:
            raise InputError("quadratic twist is only implemented for odd p")
        D = next(d for d in range(2, p) if legendre_symbol(d, p) == -1)
        a1, a2, a3, a4, a6 = self.a1, self.a2, self.a3, self.a4, self.a6
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        i2, i4 = pow(2, -1, p), pow(4, -1, p)
        return CurveFp(p, 0, D * b2 * i4, 0, D * D * b4 * i2, D ** 3 * b6 * i4)


def reduce_mod_p(E: CurveQ, P: Point, p: int) -> tuple[CurveFp, Point]:
    """(E, P) を mod p で還元する。悪い還元は BadReductionError。"""
    if not isprime(p):
        raise InputError(f"p must be a prime, got {p}")
    for c in E.coefficients():
        if c.denominator % p == 0:
            raise BadReductionError(f"coefficient {c} is not p-integral at p={p}")
    if E.discriminant.numerator % p == 0:
        raise BadReductionError(f"bad reduction at p={p}")

    def red(c: Fraction) -> int:
        return c.numerator * pow(c.denominator, -1, p) % p

    Ep = CurveFp(p, *(red(c) for c in E.coefficients()))
    if P.is_infinity:
        return Ep, INFINITY
    if P.x.denominator % p == 0 or P.y.denominator % p == 0:
        raise InputError(f"point {P} does not reduce to an affine point at p={p}")
    return Ep, Ep.point(red(P.x), red(P.y))


# =============================================
# 位数
# =============================================


def _hasse_interval(p: int) -> tuple[int, int]:
    w = isqrt(4 * p)
    return p + 1 - w, p + 1 + w


def _find_multiple(E: CurveFp, P: Point, lo: int, hi: int) -> int:
    """Baby-step giant-step で M·P = ∞ となる M ≥ lo を1つ見つける。"""
    m = isqrt(hi - lo) + 1
    baby: dict[Point, int] = {}
    R = INFINITY
    for j in range(m + 1):
        baby.setdefault(E.neg(R), j)
        R = E.add(R, P)
    giant = E.mul(m, P)
    Q = E.mul(lo, P)
    for i in range(m + 1):
        j = baby.get(Q)
        if j is not None:
            return lo + i * m + j
        Q = E.add(Q, giant)
    raise InvariantError(f"no multiple of the point order found in [{lo}, {hi}] at p={E.p}")


def point_order(E: CurveFp, P: Point) -> int:
    """P の厳密な位数"""
    if P.is_infinity:
        return 1
    lo, hi = _hasse_interval(E.p)
    M = _find_multiple(E, P, lo, hi)
    for q in factorint(M):
        while M % q == 0 and E.mul(M // q, P).is_infinity:
            M //= q
    return M


def _sampled_lcm(E: CurveFp, rng: random.Random, candidates_of) -> tuple[int, list[int]]:
    L = 1
    cands: list[int] = []
    for _ in range(config.BSGS_MAX_POINTS):
        L = lcm(L, point_order(E, E.random_point(rng)))
        cands = candidates_of(L)
        if len(cands) == 1:
            break
    return L, cands


def _count_exhaustive(E: CurveFp) -> int:
    if E.p == 2:
        return sum(1 for _ in E.points())
    p = E.p
    total = 1
    for x in range(p):
        total += 1 + legendre_symbol(E._y_discriminant(x), p)
    return total


def _count_bsgs(E: CurveFp) -> int:
    p = E.p
    lo, hi = _hasse_interval(p)
    rng = random.Random(p)

    def multiples(L: int) -> list[int]:
        return [N for N in range(-(-lo // L) * L, hi + 1, L)]

    L, cands = _sampled_lcm(E, rng, multiples)
    if len(cands) == 1:
        return cands[0]

    twist = E.quadratic_twist()
    L_twist, _ = _sampled_lcm(twist, rng, multiples)
    cands = [N for N in cands if (2 * p + 2 - N) % L_twist == 0]
    if len(cands) == 1:
        logger.info(f"p={p}: group order fixed with the quadratic twist")
        return cands[0]
    logger.warning(f"p={p}: BSGS left {len(cands)} candidates, falling back to exhaustive counting")
    return _count_exhaustive(E)


def group_order(E: CurveFp) -> int:
    """|E(F_p)|。小さい p は全数え、それ以外は BSGS（必要なら二次ねじりを併用）。"""
    if E.p < config.EXHAUSTIVE_COUNT_LIMIT:
        N = _count_exhaustive(E)
    else:
        N = _count_bsgs(E)
    if (N - E.p - 1) ** 2 > 4 * E.p:
        raise InvariantError(f"group order {N} violates the Hasse bound at p={E.p}")
    return N


def _ell_part(N: int, ell: int) -> int:
    e = 0
    while N % ell == 0:
        N //= ell
        e += 1
    return e


def order_coprime_to_ell(E: CurveFp, P: Point, ell: int) -> bool:
    """(N/ℓ^e)·P = ∞ か（N = |E(F_p)|、ℓ^e ‖ N）"""
    N = group_order(E)
    return E.mul(N // ell ** _ell_part(N, ell), P).is_infinity


def divisibility_cross_check(E: CurveFp, P: Point, ell: int) -> bool:
    """P ∈ ℓ^e·E(F_p) を全数えで確かめ、order_coprime_to_ell と一致するかを返す。"""
    if E.p >= config.EXHAUSTIVE_COUNT_LIMIT:
        raise InputError(f"cross-check needs p < {config.EXHAUSTIVE_COUNT_LIMIT}, got {E.p}")
    image = set(E.points())
    N = len(image)
    for _ in range(_ell_part(N, ell)):
        image = {E.mul(ell, Q) for Q in image}
    return (P in image) == order_coprime_to_ell(E, P, ell)


# =============================================
# 素数密度スキャン
# =============================================


@dataclass(frozen=True)
class PrimeOutcome:
    prime: int
    good: bool
    coprime: bool


@dataclass(frozen=True)
class ScanResult:
    ell: int
    limit: int
    good: int
    coprime: int
    skipped: int
    fraction: Fraction
    outcomes: list[PrimeOutcome] = field(default_factory=list, repr=False)


def is_torsion(E: CurveQ, P: Point) -> bool:
    """n ≤ 12 で n·P = ∞ となるか"""
    Q = P
    for _ in range(MAZUR_ORDER_BOUND):
        if Q.is_infinity:
            return True
        Q = E.add(Q, P)
    return False


def _scan_chunk(args: tuple[CurveQ, Point, int, list[int]]) -> list[PrimeOutcome]:
    E, alpha, ell, primes = args
    out = []
    for p in primes:
        try:
            Ep, Pp = reduce_mod_p(E, alpha, p)
        except InputError:
            out.append(PrimeOutcome(p, False, False))
            continue
        out.append(PrimeOutcome(p, True, order_coprime_to_ell(Ep, Pp, ell)))
    return out


def density_scan(E: CurveQ, alpha: Point, ell: int, limit: int, workers: int | None = None) -> ScanResult:
    """p ≤ limit の良い素数で α mod p の位数が ℓ と素な割合を数える。"""
    if not isprime(ell):
        raise InputError(f"ell must be a prime, got {ell}")
    if not E.is_on_curve(alpha):
        raise InputError(f"point {alpha} is not on the curve")
    if is_torsion(E, alpha):
        raise InputError("point must be non-torsion")
    workers = config.WORKERS if workers is None else workers
    primes = list(primerange(2, limit + 1))

    if workers > 1 and len(primes) > workers:
        size = -(-len(primes) // workers)
        chunks = [(E, alpha, ell, primes[i:i + size]) for i in range(0, len(primes), size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = [o for part in pool.map(_scan_chunk, chunks) for o in part]
    else:
        outcomes = _scan_chunk((E, alpha, ell, primes))

    good = sum(1 for o in outcomes if o.good)
    if good == 0:
        raise EmptyResultError(f"empty scan: no prime of good reduction up to {limit}")
    coprime = sum(1 for o in outcomes if o.coprime)
    skipped = len(outcomes) - good
    logger.info(f"scan ell={ell} up to {limit}: {coprime}/{good} coprime, {skipped} skipped")
    return ScanResult(ell, limit, good, coprime, skipped, Fraction(coprime, good), outcomes)


# =============================================
# ℓ 分割と可除深さ
# =============================================


def _rational(c: Fraction) -> Rational:
    return Rational(c.numerator, c.denominator)


def _division_polynomial(E: CurveQ, alpha: Point, ell: int) -> Poly:
    """ℓβ = α となる β の x 座標が満たす多項式（α = ∞ なら ψ_ℓ）"""
    x = _X
    b2, b4, b6, b8 = (_rational(c) for c in (E.b2, E.b4, E.b6, E.b8))
    psi2_sq = 4 * x**3 + b2 * x**2 + 2 * b4 * x + b6
    if ell == 2:
        if alpha.is_infinity:
            return Poly(psi2_sq, x, domain=QQ)
        phi2 = x**4 - b4 * x**2 - 2 * b6 * x - b8
        return Poly(phi2 - _rational(alpha.x) * psi2_sq, x, domain=QQ)
    psi3 = 3 * x**4 + b2 * x**3 + 3 * b4 * x**2 + 3 * b6 * x + b8
    if alpha.is_infinity:
        return Poly(psi3, x, domain=QQ)
    F = 2 * x**6 + b2 * x**5 + 5 * b4 * x**4 + 10 * b6 * x**3 + 10 * b8 * x**2 + (b2 * b8 - b4 * b6) * x + (b4 * b8 - b6**2)
    phi3 = x * psi3**2 - psi2_sq * F
    return Poly(phi3 - _rational(alpha.x) * psi3**2, x, domain=QQ)


def _rational_roots(f: Poly) -> list[Fraction]:
    roots = set()
    for factor, _ in f.factor_list()[1]:
        if factor.degree() == 1:
            c1, c0 = factor.all_coeffs()
            r = -c0 / c1
            roots.add(Fraction(int(r.p), int(r.q)))
    return sorted(roots)


def _rational_sqrt(D: Fraction) -> Fraction | None:
    if D < 0:
        return None
    num, exact_num = integer_nthroot(D.numerator, 2)
    den, exact_den = integer_nthroot(D.denominator, 2)
    if not (exact_num and exact_den):
        return None
    return Fraction(int(num), int(den))


def divide_point(E: CurveQ, alpha: Point, ell: int) -> list[Point]:
    """ℓβ = α となる有理点 β を全て返す（α = ∞ なら有理 ℓ ねじれ点）。"""
    if ell not in (2, 3):
        raise InputError(f"division over Q is implemented for ell in {{2, 3}}, got {ell}")
    if not E.is_on_curve(alpha):
        raise InputError(f"point {alpha} is not on the curve")
    found = {INFINITY} if alpha.is_infinity else set()
    for x0 in _rational_roots(_division_polynomial(E, alpha, ell)):
        t = E.a1 * x0 + E.a3
        s = _rational_sqrt(t * t + 4 * (x0 ** 3 + E.a2 * x0 ** 2 + E.a4 * x0 + E.a6))
        if s is None:
            continue
        for y0 in {(-t + s) / 2, (-t - s) / 2}:
            beta = E.point(x0, y0)
            if E.mul(ell, beta) == alpha:
                found.add(beta)
    return sorted(found, key=sort_key)


def rational_ell_power_torsion(E: CurveQ, ell: int) -> list[Point]:
    """有理 ℓ 冪ねじれ点を ∞ からの反復分割で全て求める。"""
    if ell not in TORSION_DEPTH:
        raise InputError(f"rational torsion search is implemented for ell in {{2, 3}}, got {ell}")
    found = {INFINITY}
    frontier = [INFINITY]
    for _ in range(TORSION_DEPTH[ell]):
        fresh = [b for T in frontier for b in divide_point(E, T, ell) if b not in found]
        if not fresh:
            break
        found.update(fresh)
        frontier = fresh
    return sorted(found, key=sort_key)


def compute_d(E: CurveQ, alpha: Point, ell: int) -> int:
    """α = ℓ^d·γ + T（T は有理 ℓ 冪ねじれ点）となる最大の d"""
    if not E.is_on_curve(alpha):
        raise InputError(f"point {alpha} is not on the curve")
    if is_torsion(E, alpha):
        raise InputError("point must be non-torsion")
    cap = config.DIVISION_DEPTH_CAP
    memo: dict[Point, int] = {}

    def depth(P: Point, budget: int) -> int:
        if budget == 0:
            return 0
        if P in memo:
            return memo[P]
        preimages = divide_point(E, P, ell)
        d = 1 + max((depth(b, budget - 1) for b in preimages), default=-1)
        memo[P] = d
        return d

    d = max(depth(E.sub(alpha, T), cap) for T in rational_ell_power_torsion(E, ell))
    if d >= cap:
        logger.warning(f"division depth reached the cap {cap}")
    return d
