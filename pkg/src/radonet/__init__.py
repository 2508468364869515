"""radonet: 线性优先连接增长过程的模拟与极限性质检验"""

__version__ = "1.0.0"
