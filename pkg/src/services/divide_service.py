"""有理点の ℓ 分割・可除深さサービス"""
import logging

from src.ecq import compute_d, divide_point, rational_ell_power_torsion
from src.errors import ArborealError, error_dict
from src.services.file_format import load_document, parse_curve, point_record

logger = logging.getLogger(__name__)


def divide(curve_path: str, ell: int, depth: int = 1) -> dict:
    """α の ℓ 分割の木（depth 段まで）と d を返す。

    Args:
        curve_path: 曲線ファイル
        ell: 2 または 3
        depth: 展開する段数

    Returns:
        {"d", "strongly_indivisible", "torsion", "tree"}、またはエラー
    """
    if depth < 1:
        return {"error": {"code": "VALIDATION_ERROR", "message": f"depth must be >= 1, got {depth}"}}
    try:
        E, alpha = parse_curve(load_document(curve_path), source=curve_path)
        d = compute_d(E, alpha, ell)
        torsion = rational_ell_power_torsion(E, ell)
        tree = []
        frontier = [alpha]
        for level in range(1, depth + 1):
            nodes = []
            for P in frontier:
                for beta in divide_point(E, P, ell):
                    tree.append({"level": level, "parent": point_record(P), "point": point_record(beta)})
                    nodes.append(beta)
            if not nodes:
                break
            frontier = nodes
    except ArborealError as e:
        logger.error(f"divide failed: {e}")
        return error_dict(e)
    return {
        "ell": ell,
        "point": point_record(alpha),
        "d": d,
        "strongly_indivisible": d == 0,
        "torsion": [point_record(T) for T in torsion],
        "tree": tree,
    }
