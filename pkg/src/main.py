"""MCPサーバーのメインエントリーポイント"""
import logging

from fastmcp import FastMCP

from src import config
from src.services import bound_service, cohomology_service, density_service, divide_service, scan_service

logger = logging.getLogger(__name__)


# Instructions injected into the MCP server
RULES = """# arboreal-bounds 利用ガイド

楕円曲線の有理点 α に付随する樹状ガロア表現 ω の像の指数について、
上界 ℓ^{2d+2r+s}·[GL₂(Z_ℓ):G] を計算するツール群です。

## 入力ファイル

群は有限レベル m の生成元で与えます（完全逆像規約: レベル m の群はその逆像である ℓ進の開部分群を表す）。
- 群ファイル: {"ell": 2, "level": 2, "kind": "linear", "generators": [[[3, 0], [0, 3]]]}
- アフィン群: 各生成元を {"matrix": [[a, b], [c, d]], "translation": [v0, v1]} で書く
- 曲線ファイル: {"a": [a1, a2, a3, a4, a6], "point": [x, y]}（値は整数か "p/q"）

## ツールの選び方

- 群から上界を出す: `analyze_bound`（d は曲線側の量なので必ず与える）
- 群の生成元がなくパラメータだけ分かっている: `bound_from_params`
- d を曲線から求める: `divide_point`
- 密度: 有限レベルの近似は `fix_fractions`、全射の場合の極限は `surjective_density`、実際の素数での割合は `scan_density`
- H¹ の構造と指数: `compute_h1`

r や s が群のレベル m に達している場合は saturated として報告されます。より深いレベルの群を与えてください。

有理数は常に "num/den" 形式で返ります。approx は表示用の近似値です。
"""


def build_instructions() -> str:
    """MCP instructionsを返す"""
    return RULES


# MCPサーバーを作成
mcp = FastMCP("arboreal-bounds", instructions=build_instructions())


# MCPツール定義
@mcp.tool()
def analyze_bound(group_path: str, d: int = 0) -> dict:
    """群ファイルの線形部分群 G と d から r, s, n_ℓ, 指数, 上界を計算する。

    group_path: 線形部分群の群ファイルのパス
    d: α の可除深さ（0以上）。divide_point で求められる"""
    return bound_service.analyze_bound(group_path, d)


@mcp.tool()
def bound_from_params(
    ell: int,
    r: int,
    s: int,
    index: int,
    d: int = 0,
    h1_exponent: int | None = None,
) -> dict:
    """パラメータ (ℓ, d, r, s, index) から上界を計算する。

    h1_exponent: H¹ の実際の指数（ℓ冪、optional）。与えると ℓ^r をこれで置き換えた上界も返す"""
    return bound_service.bound_from_params(ell, d, r, s, index, h1_exponent)


@mcp.tool()
def bound_example(name: str) -> dict:
    """既知の例のパラメータで上界を計算する。name: surjective | X2a | X238a | X243g | borel"""
    return bound_service.bound_example(name)


@mcp.tool()
def fix_fractions(ell: int, level: int, image_path: str | None = None) -> dict:
    """分割点を固定する元の割合 f_1 … f_level を厳密に計算する。

    image_path: アフィン部分群の群ファイル（optional）。省略時は全像で、閉じた式との差も返す"""
    return density_service.fix_fractions(ell, level, image_path)


@mcp.tool()
def surjective_density(ell: int) -> dict:
    """ω が全射のときの「α の位数が ℓ と素な素数」の密度"""
    return density_service.surjective_density(ell)


@mcp.tool()
def compute_h1(group_path: str, module_level: int, tower: list[int] | None = None) -> dict:
    """H¹(G, (Z/ℓ^n)²) の不変因子・指数・Sahの上界を計算する。

    tower: 群のレベルの列（optional）。各レベルで計算し、構造が一定かを報告する"""
    return cohomology_service.compute_h1(group_path, module_level, tower)


@mcp.tool()
def scan_density(curve_path: str, ell: int, limit: int) -> dict:
    """p ≤ limit の良い素数で α mod p の位数が ℓ と素な割合を数える。"""
    return scan_service.scan_density(curve_path, ell, limit)


@mcp.tool()
def divide_point(curve_path: str, ell: int, depth: int = 1) -> dict:
    """α の ℓ 分割（ℓβ = α となる有理点 β）の木と可除深さ d を返す。ell は 2 または 3"""
    return divide_service.divide(curve_path, ell, depth)


@mcp.tool()
def get_config() -> dict:
    """有効な設定値（ARB_* 環境変数で上書き可能）"""
    return config.as_dict()


if __name__ == "__main__":
    import argparse

    parser = argparse.ArgumentParser(description="arboreal-bounds MCP server")
    parser.add_argument(
        "--transport",
        default="stdio",
        choices=["stdio", "http"],
        help="トランスポート方式（デフォルト: stdio）",
    )
    args = parser.parse_args()
    logging.basicConfig(level=config.LOG_LEVEL)

    if args.transport == "http":
        logger.info(f"Starting HTTP server on {config.HTTP_HOST}:{config.HTTP_PORT}")
        mcp.run(transport="http", host=config.HTTP_HOST, port=config.HTTP_PORT)
    else:
        mcp.run()
