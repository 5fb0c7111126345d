# 测试模块
