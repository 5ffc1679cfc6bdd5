"""pakforge: 科研 Python 项目的脚手架、news/CHANGELOG、发布演练与迁移工具"""

__version__ = "0.1.0"
