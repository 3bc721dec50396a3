"""reviewjudge: detect computer-generated product reviews.

Pipeline: corpus CSV -> text cleaning -> dual embeddings (skip-gram tokens
plus one contextual vector per review) -> Siamese LSTM scorer -> fuzzy
decision stage.
"""

__version__ = "0.1.0"
