"""Synthetic clinical trial generation via retrieval-filtered few-shot LLM
prompting, plus the dataset/metric/analysis harness for augmentation studies.
"""

__version__ = "0.1.0"
