"""群ファイル・曲線ファイルの読み込みとレコード整形

ファイルは UTF-8 の JSON（YAML の部分集合なので yaml.safe_load でそのまま読める）。

群ファイル:
    {"ell": 2, "level": 2, "kind": "linear", "generators": [[[3, 0], [0, 3]]]}
    アフィンの場合は各生成元を {"matrix": [[a, b], [c, d]], "translation": [v0, v1]} で書く。

曲線ファイル:
    {"a": [0, 0, 1, -1, 0], "point": [0, 0]}
    各値は整数または "p/q" 形式の文字列。
"""
from fractions import Fraction
from pathlib import Path

import yaml

from src.ecq import CurveQ, Point
from src.errors import InputError
from src.modring import ModCtx, ModMat, ModVec
from src.sdgroup import AffineElement, SubgroupSpec


def load_document(path: str | Path) -> dict:
    """JSON/YAML ファイルを dict として読む。読めなければ InputError。"""
    try:
        with open(path, encoding="utf-8") as f:
            doc = yaml.safe_load(f)
    except OSError as e:
        raise InputError(f"{path}: cannot read file ({e.strerror})") from None
    except yaml.YAMLError as e:
        raise InputError(f"{path}: parse error: {e}") from None
    if not isinstance(doc, dict):
        raise InputError(f"{path}: top level must be an object")
    return doc


def _int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InputError(f"{where}: expected an integer, got {value!r}")
    return value


def _matrix(value, ctx: ModCtx, where: str) -> ModMat:
    if not (isinstance(value, list) and len(value) == 2 and all(isinstance(r, list) and len(r) == 2 for r in value)):
        raise InputError(f"{where}: expected a 2x2 matrix [[a, b], [c, d]], got {value!r}")
    entries = [_int(x, where) for row in value for x in row]
    M = ModMat(ctx, tuple(entries))  # type: ignore[arg-type]
    if not M.is_invertible:
        raise InputError(f"{where}: matrix {value} is not invertible mod {ctx.ell}")
    return M


def parse_group(doc: dict, source: str = "group") -> SubgroupSpec:
    """群ファイルの内容から SubgroupSpec を作る。"""
    for key in ("ell", "level", "generators"):
        if key not in doc:
            raise InputError(f"{source}: missing field '{key}'")
    ctx = ModCtx(_int(doc["ell"], f"{source}.ell"), _int(doc["level"], f"{source}.level"))
    kind = doc.get("kind", "linear")
    gens_doc = doc["generators"]
    if not isinstance(gens_doc, list) or not gens_doc:
        raise InputError(f"{source}.generators: expected a non-empty list")

    gens = []
    for i, g in enumerate(gens_doc):
        where = f"{source}.generators[{i}]"
        if kind == "affine":
            if not isinstance(g, dict) or "matrix" not in g:
                raise InputError(f"{where}: affine generators need 'matrix' and 'translation'")
            t = g.get("translation", [0, 0])
            if not (isinstance(t, list) and len(t) == 2):
                raise InputError(f"{where}.translation: expected [v0, v1], got {t!r}")
            v = ModVec(ctx, (_int(t[0], where), _int(t[1], where)))
            gens.append(AffineElement(v, _matrix(g["matrix"], ctx, f"{where}.matrix")))
        else:
            gens.append(_matrix(g, ctx, where))
    return SubgroupSpec(ctx, kind, tuple(gens))


def group_to_document(spec: SubgroupSpec) -> dict:
    """SubgroupSpec を群ファイルの形に戻す。"""
    gens = []
    for g in spec.generators:
        if isinstance(g, AffineElement):
            gens.append({"matrix": g.g.rows(), "translation": list(g.v.entries)})
        else:
            gens.append(g.rows())
    return {"ell": spec.ctx.ell, "level": spec.ctx.m, "kind": spec.kind, "generators": gens}


def _rational(value, where: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise InputError(f"{where}: expected an integer or 'p/q' string, got {value!r}")
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"{where}: invalid rational {value!r}") from None


def parse_curve(doc: dict, source: str = "curve") -> tuple[CurveQ, Point]:
    """曲線ファイルの内容から (E, α) を作る。α は曲線上になければ InputError。"""
    coeffs = doc.get("a")
    if not (isinstance(coeffs, list) and len(coeffs) == 5):
        raise InputError(f"{source}.a: expected [a1, a2, a3, a4, a6]")
    E = CurveQ.from_list([_rational(c, f"{source}.a[{i}]") for i, c in enumerate(coeffs)])
    pt = doc.get("point")
    if pt is None:
        raise InputError(f"{source}: missing field 'point'")
    if pt == "O" or pt == []:
        return E, Point()
    if not (isinstance(pt, list) and len(pt) == 2):
        raise InputError(f"{source}.point: expected [x, y] or \"O\"")
    return E, E.point(_rational(pt[0], f"{source}.point[0]"), _rational(pt[1], f"{source}.point[1]"))


def format_fraction(f: Fraction) -> str:
    """常に "num/den"（既約）で表す。"""
    return f"{f.numerator}/{f.denominator}"


def fraction_record(f: Fraction) -> dict:
    return {"value": format_fraction(f), "approx": float(f)}


def point_record(P: Point) -> list[str] | str:
    if P.is_infinity:
        return "O"
    return [str(P.x), str(P.y)]
