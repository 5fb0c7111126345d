#!/usr/bin/env python3
"""
异常定义
所有模块共用的异常层次，命令行入口据此映射退出码
"""


class OrdLtlError(Exception):
    """所有求解器异常的基类"""


class FormulaSyntaxError(OrdLtlError):
    """公式语法错误，position 为从1开始的字符位置"""

    def __init__(self, message: str, position: int):
        super().__init__(f"position {position}: {message}")
        self.message = message
        self.position = position


class OrdinalError(OrdLtlError):
    """序数运算错误（非规范输入、减法越界、文本格式错误）"""


class OrdinalOverflowError(OrdinalError):
    """指数或系数超出机器自然数范围"""


class WordError(OrdLtlError):
    """超限单词相关错误"""


class WordFormatError(WordError):
    """单词JSON格式错误"""


class WordIndexError(WordError):
    """位置越界"""


class StateExplosionError(OrdLtlError):
    """状态数上界超过配置限制，拒绝构造自动机"""


class OracleInconsistencyError(OrdLtlError):
    """语义求值器内部不一致（极限判定规则出错的信号）"""


class WitnessValidationError(OrdLtlError):
    """求解器给出的见证单词未通过语义求值校验"""


class SkeletonError(OrdLtlError):
    """运行骨架格式错误，无法还原见证单词"""


class ConfigError(OrdLtlError):
    """配置或参数不合法"""
