"""H¹ 計算サービス"""
import logging

from src.cohomology import h1, h1_tower
from src.errors import ArborealError, error_dict
from src.sdgroup import close
from src.services.file_format import load_document, parse_group

logger = logging.getLogger(__name__)


def compute_h1(group_path: str, module_level: int, tower: list[int] | None = None) -> dict:
    """H¹(G, (Z/ℓ^n)²) を計算する。

    Args:
        group_path: 線形部分群の群ファイル
        module_level: 加群のレベル n
        tower: 指定すると各レベル m' での完全逆像について計算し、安定性を報告する

    Returns:
        {"result": H1Result} または {"tower": [...], "stable": bool}、またはエラー
    """
    try:
        spec = parse_group(load_document(group_path), source=group_path)
        if tower:
            t = h1_tower(spec, module_level, tower)
            return {
                "levels": t.levels,
                "tower": [r.to_record() for r in t.results],
                "stable": t.stable,
            }
        result = h1(close(spec), module_level)
    except ArborealError as e:
        logger.error(f"compute_h1 failed: {e}")
        return error_dict(e)
    return {"result": result.to_record()}
