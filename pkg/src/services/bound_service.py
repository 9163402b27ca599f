"""主定理の上界サービス"""
import logging

from src.arboreal import (
    REFERENCE_EXAMPLES,
    BoundParams,
    analyze,
    cohomological_bound,
    containment_level,
    disjointness_level,
    kummer_index_exponent,
    theorem1_bound,
)
from src.errors import ArborealError, error_dict
from src.services.file_format import load_document, parse_group

logger = logging.getLogger(__name__)


def analyze_bound(group_path: str, d: int) -> dict:
    """群ファイルの G と d から r, s, n_ℓ, 指数, 上界を計算する。

    Args:
        group_path: 線形部分群の群ファイル
        d: α の可除深さ（0 以上）

    Returns:
        BoundReport のレコード、またはエラー {"error": {"code": str, "message": str}}
    """
    try:
        spec = parse_group(load_document(group_path), source=group_path)
        report = analyze(spec, d)
    except ArborealError as e:
        logger.error(f"analyze_bound failed: {e}")
        return error_dict(e)
    return {"mode": "group", **report.to_record()}


def _params_record(params: BoundParams) -> dict:
    return {
        "ell": params.ell,
        "d": params.d,
        "r": params.r,
        "s": params.s,
        "index": params.index,
        "bound": theorem1_bound(params),
        "kummer_exponent": kummer_index_exponent(params),
        "disjointness_level": disjointness_level(params),
        "containment_level": containment_level(params),
    }


def bound_from_params(
    ell: int, d: int, r: int, s: int, index: int, h1_exponent: int | None = None
) -> dict:
    """パラメータを直接与えて上界を計算する（群の生成元がない場合用）。

    Args:
        h1_exponent: H¹ の実際の指数（ℓ 冪）。与えるとコホモロジーによる上界も返す。
    """
    try:
        params = BoundParams(ell=ell, d=d, r=r, s=s, index=index)
        record = {"mode": "params", **_params_record(params)}
        if h1_exponent is not None:
            record["h1_exponent"] = h1_exponent
            record["cohomological_bound"] = cohomological_bound(params, h1_exponent)
    except ArborealError as e:
        return error_dict(e)
    return record


def bound_example(name: str) -> dict:
    """既知の例（surjective, X2a, X238a, X243g, borel）のパラメータで上界を計算する。"""
    params = REFERENCE_EXAMPLES.get(name)
    if params is None:
        return {
            "error": {
                "code": "VALIDATION_ERROR",
                "message": f"Unknown example: {name}. Must be one of: {', '.join(REFERENCE_EXAMPLES)}",
            }
        }
    return {"mode": "example", "example": name, **_params_record(params)}
