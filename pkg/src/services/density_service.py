"""分割点固定割合・密度サービス"""
import logging

from src import density
from src.errors import ArborealError, error_dict
from src.sdgroup import close
from src.services.file_format import fraction_record, load_document, parse_group

logger = logging.getLogger(__name__)


def fix_fractions(ell: int, level: int, image_path: str | None = None, workers: int | None = None) -> dict:
    """f_1 … f_level を厳密な有理数で計算する。

    Args:
        ell: 素数 ℓ（image_path を与えた場合はファイルの ell と一致すること）
        level: 最大レベル n_max
        image_path: アフィン部分群の群ファイル。省略時は全像
        workers: 全像の和を分割するプロセス数

    Returns:
        FixFractionReport のレコード、またはエラー
    """
    try:
        if image_path is None:
            image = density.FullImage(ell)
        else:
            spec = parse_group(load_document(image_path), source=image_path)
            if spec.kind != "affine":
                return {
                    "error": {
                        "code": "VALIDATION_ERROR",
                        "message": f"{image_path}: density images must be affine groups",
                    }
                }
            if spec.ctx.ell != ell:
                return {
                    "error": {
                        "code": "VALIDATION_ERROR",
                        "message": f"{image_path}: file has ell={spec.ctx.ell}, requested ell={ell}",
                    }
                }
            image = close(spec)
        report = density.density_report(image, level, workers)
    except ArborealError as e:
        logger.error(f"fix_fractions failed: {e}")
        return error_dict(e)

    record = {
        "ell": report.ell,
        "image": report.image,
        "levels": report.levels,
        "fractions": [fraction_record(f) for f in report.fractions],
        "monotone": report.monotone,
    }
    if report.closed_form is not None:
        record["closed_form"] = fraction_record(report.closed_form)
        record["gaps"] = [fraction_record(g) for g in report.gaps]
    else:
        record["references"] = reference_densities()
    return record


def surjective_density(ell: int) -> dict:
    """ω 全射のときの密度の閉じた式"""
    try:
        value = density.surjective_density(ell)
    except ArborealError as e:
        return error_dict(e)
    return {"ell": ell, "density": fraction_record(value)}


def reference_densities() -> dict:
    """全射でない像と比べるための既知の密度"""
    return {"index4_odd_order": fraction_record(density.INDEX4_REFERENCE_DENSITY)}
