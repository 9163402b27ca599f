"""例外定義

コアモジュールはこれらの例外を送出し、サービス層が
{"error": {"code": ..., "message": ...}} 形式に変換する。
"""


class ArborealError(Exception):
    """全エラーの基底クラス。code はサービス層・CLIが参照する安定コード。"""
    code = "INTERNAL_ERROR"


class InputError(ArborealError, ValueError):
    """入力値が不正（素数でない ℓ、非可逆行列、曲線上にない点など）"""
    code = "VALIDATION_ERROR"


class BadReductionError(InputError):
    """素数 p で悪い還元を持つ（スキャンではその素数をスキップする）"""
    code = "BAD_REDUCTION"


class BudgetExceededError(ArborealError):
    """列挙サイズが設定上限を超える"""
    code = "BUDGET_EXCEEDED"


class EmptyResultError(ArborealError):
    """結果が空（良い還元の素数が1つもないスキャンなど）"""
    code = "EMPTY_RESULT"


class InvariantError(ArborealError):
    """数学的な自己検査の失敗。バグを意味する。"""
    code = "INVARIANT_VIOLATION"


def error_dict(e: ArborealError) -> dict:
    """サービス層・ツールサーバー共通のエラー形式"""
    return {"error": {"code": e.code, "message": str(e)}}
