"""素数密度スキャンサービス"""
import csv
import logging

from src.density import surjective_density
from src.ecq import density_scan
from src.errors import ArborealError, error_dict
from src.services.file_format import fraction_record, load_document, parse_curve

logger = logging.getLogger(__name__)


def write_csv(path: str, outcomes) -> None:
    """素数ごとの結果を prime, good, coprime_order の列で書き出す。"""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["prime", "good", "coprime_order"])
        for o in outcomes:
            writer.writerow([o.prime, int(o.good), int(o.coprime)])


def scan_density(
    curve_path: str, ell: int, limit: int, workers: int | None = None, csv_path: str | None = None
) -> dict:
    """p ≤ limit で α mod p の位数が ℓ と素な素数の割合を数える。

    Args:
        curve_path: 曲線ファイル（非ねじれ点 α を含む）
        ell: 素数 ℓ
        limit: 素数の上限 X
        workers: 並列プロセス数（結果は並列度に依らない）
        csv_path: 指定すると素数ごとの結果を CSV で書き出す

    Returns:
        ScanResult のレコード（全射の場合の目標値を併記）、またはエラー
    """
    try:
        E, alpha = parse_curve(load_document(curve_path), source=curve_path)
        result = density_scan(E, alpha, ell, limit, workers)
        target = surjective_density(ell)
    except ArborealError as e:
        logger.error(f"scan_density failed: {e}")
        return error_dict(e)

    if csv_path:
        try:
            write_csv(csv_path, result.outcomes)
        except OSError as e:
            return {"error": {"code": "FILE_ERROR", "message": f"{csv_path}: {e.strerror}"}}

    return {
        "ell": result.ell,
        "limit": result.limit,
        "good": result.good,
        "coprime": result.coprime,
        "skipped": result.skipped,
        "fraction": fraction_record(result.fraction),
        "surjective_target": fraction_record(target),
    }
