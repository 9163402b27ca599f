"""arboreal-bounds 設定モジュール。環境変数で定数をオーバーライド可能にする。"""
import os

# --- Arithmetic ---
# レベル上限: ℓ^m ≤ 2^MAX_MODULUS_BITS となる最大の m（ℓ=2 なら 16）
MAX_MODULUS_BITS: int = int(os.environ.get("ARB_MAX_MODULUS_BITS", "16"))

# --- Group closure ---
# 外側の群の位数がこれを超える closure は拒否する
CLOSURE_AMBIENT_LIMIT: int = int(os.environ.get("ARB_CLOSURE_AMBIENT_LIMIT", str(2**30)))
# 1回の closure で列挙する元の上限
CLOSURE_ELEMENT_LIMIT: int = int(os.environ.get("ARB_CLOSURE_ELEMENT_LIMIT", "2000000"))

# --- Cohomology ---
H1_ELEMENT_LIMIT: int = int(os.environ.get("ARB_H1_ELEMENT_LIMIT", "100000"))

# --- Density ---
DENSITY_ELEMENT_LIMIT: int = int(os.environ.get("ARB_DENSITY_ELEMENT_LIMIT", "5000000"))

# --- Elliptic curves ---
# この値未満の素数では点を全数えする
EXHAUSTIVE_COUNT_LIMIT: int = int(os.environ.get("ARB_EXHAUSTIVE_COUNT_LIMIT", "1000"))
# BSGS で twist に切り替えるまでに試すランダム点の数
BSGS_MAX_POINTS: int = int(os.environ.get("ARB_BSGS_MAX_POINTS", "20"))
DIVISION_DEPTH_CAP: int = int(os.environ.get("ARB_DIVISION_DEPTH_CAP", "64"))

# --- Execution ---
WORKERS: int = int(os.environ.get("ARB_WORKERS", "1"))
LOG_LEVEL: str = os.environ.get("ARB_LOG_LEVEL", "WARNING").upper()

# --- Tool server (HTTP transport) ---
HTTP_HOST: str = os.environ.get("ARB_HTTP_HOST", "localhost")
HTTP_PORT: int = int(os.environ.get("ARB_HTTP_PORT", "52838"))


def as_dict() -> dict:
    """現在の設定値を dict で返す（get_config ツール・CLI 用）。"""
    return {
        "max_modulus_bits": MAX_MODULUS_BITS,
        "closure_ambient_limit": CLOSURE_AMBIENT_LIMIT,
        "closure_element_limit": CLOSURE_ELEMENT_LIMIT,
        "h1_element_limit": H1_ELEMENT_LIMIT,
        "density_element_limit": DENSITY_ELEMENT_LIMIT,
        "exhaustive_count_limit": EXHAUSTIVE_COUNT_LIMIT,
        "bsgs_max_points": BSGS_MAX_POINTS,
        "division_depth_cap": DIVISION_DEPTH_CAP,
        "workers": WORKERS,
        "log_level": LOG_LEVEL,
    }
