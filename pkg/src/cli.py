"""arboreal コマンドライン

サブコマンド: bound, density, h1, scan, divide, config
結果は --format table（既定）または json で標準出力に出す。ログは標準エラー。

終了コード: 0 成功, 2 入力エラー, 3 計算量上限, 4 空の結果, 1 その他
"""
import argparse
import json
import logging
import sys

from src import config
from src.services import bound_service, cohomology_service, density_service, divide_service, scan_service

logger = logging.getLogger(__name__)

EXIT_CODES = {
    "VALIDATION_ERROR": 2,
    "BAD_REDUCTION": 2,
    "BUDGET_EXCEEDED": 3,
    "EMPTY_RESULT": 4,
}


def _parse_tower(text: str) -> list[int]:
    """"M1..M2" を [M1, ..., M2] にする。"""
    lo, sep, hi = text.partition("..")
    try:
        levels = list(range(int(lo), int(hi) + 1)) if sep else [int(lo)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"tower must look like M1..M2, got {text!r}") from None
    if not levels:
        raise argparse.ArgumentTypeError(f"empty tower range {text!r}")
    return levels


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="arboreal", description="Arboreal Galois representation bounds")
    parser.add_argument("--log-level", default=config.LOG_LEVEL, help="ログレベル（既定: ARB_LOG_LEVEL）")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_format(p):
        p.add_argument("--format", choices=["table", "json"], default="table")

    p = sub.add_parser("bound", help="r, s, n_ℓ と指数の上界")
    src_group = p.add_mutually_exclusive_group(required=True)
    src_group.add_argument("--group", help="線形部分群の群ファイル")
    src_group.add_argument("--example", help="既知の例の名前（surjective, X2a, X238a, X243g, borel）")
    src_group.add_argument("--r", type=int, help="パラメータを直接与える（--ell --s --index と併用）")
    p.add_argument("--d", type=int, default=0, help="可除深さ d（既定: 0）")
    p.add_argument("--ell", type=int, default=2)
    p.add_argument("--s", type=int)
    p.add_argument("--index", type=int)
    p.add_argument("--h1-exponent", type=int, help="H¹ の実際の指数（ℓ 冪）")
    add_format(p)

    p = sub.add_parser("density", help="分割点を固定する割合 f_1 … f_n")
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--image", help="アフィン部分群の群ファイル（省略時は全像）")
    p.add_argument("--threads", type=int, default=None)
    add_format(p)

    p = sub.add_parser("h1", help="H¹(G, (Z/ℓ^n)²)")
    p.add_argument("--group", required=True)
    p.add_argument("--module-level", type=int, required=True)
    p.add_argument("--tower", type=_parse_tower, help="群のレベル範囲 M1..M2")
    add_format(p)

    p = sub.add_parser("scan", help="位数が ℓ と素な素数の割合")
    p.add_argument("--curve", required=True)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--limit", type=int, required=True)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--csv", help="素数ごとの結果の書き出し先")
    add_format(p)

    p = sub.add_parser("divide", help="有理点の ℓ 分割と d")
    p.add_argument("--curve", required=True)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--depth", type=int, default=1)
    add_format(p)

    sub.add_parser("config", help="有効な設定値")
    return parser


def _run(args: argparse.Namespace) -> dict:
    if args.command == "bound":
        if args.group:
            return bound_service.analyze_bound(args.group, args.d)
        if args.example:
            return bound_service.bound_example(args.example)
        if args.s is None or args.index is None:
            return {"error": {"code": "VALIDATION_ERROR", "message": "--r needs --s and --index"}}
        return bound_service.bound_from_params(args.ell, args.d, args.r, args.s, args.index, args.h1_exponent)
    if args.command == "density":
        return density_service.fix_fractions(args.ell, args.level, args.image, args.threads)
    if args.command == "h1":
        return cohomology_service.compute_h1(args.group, args.module_level, args.tower)
    if args.command == "scan":
        return scan_service.scan_density(args.curve, args.ell, args.limit, args.threads, args.csv)
    if args.command == "divide":
        return divide_service.divide(args.curve, args.ell, args.depth)
    return config.as_dict()


def _cell(value) -> str:
    if isinstance(value, dict) and "value" in value and "approx" in value:
        return f"{value['value']}  (≈ {value['approx']:.6f})"
    if isinstance(value, list):
        return ", ".join(_cell(v) for v in value)
    return str(value)


def render_table(record: dict) -> str:
    lines = []
    width = max((len(k) for k in record), default=0)
    for key, value in record.items():
        if isinstance(value, dict) and "value" not in value:
            lines.append(f"{key}:")
            lines.extend("  " + line for line in render_table(value).splitlines())
        elif isinstance(value, list) and value and isinstance(value[0], dict) and "value" not in value[0]:
            lines.append(f"{key}:")
            for row in value:
                lines.append("  " + "  ".join(f"{k}={_cell(v)}" for k, v in row.items()))
        else:
            lines.append(f"{key.ljust(width)}  {_cell(value)}")
    return "\n".join(lines)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")

    record = _run(args)
    if "error" in record:
        err = record["error"]
        print(f"error [{err['code']}]: {err['message']}", file=sys.stderr)
        return EXIT_CODES.get(err["code"], 1)

    if getattr(args, "format", "table") == "json":
        print(json.dumps(record, ensure_ascii=False, indent=2))
    else:
        print(render_table(record))
    return 0


if __name__ == "__main__":
    sys.exit(main())
