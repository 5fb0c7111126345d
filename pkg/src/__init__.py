# -*- coding: utf-8 -*-
"""
序数时态逻辑求解器源代码包
"""

__version__ = "0.1.0"
