# src/__init__.py
"""
GraphMerge ABSA - dependency-parse ensembling and relational graph
attention for aspect-level sentiment classification
"""

__version__ = "1.0.0"
