"""flamewatch: sentiment labeling and flaming-event detection for comment streams.

Submodules:
    preprocess  comment ingestion and text cleanup
    porter      Porter stemmer
    lexicon     phrase-lexicon scoring and 5-class labels
    embeddings  skip-gram / subword word vectors
    network     CNN + BiLSTM classifier (numpy, manual backprop)
    metrics     confusion matrices and macro precision/recall/F1
    flaming     z-score outlier and burst detection
    cli         command-line pipeline
"""

from importlib import resources


def data_path(name: str):
    """Path to a bundled data file (emoji table, mini lexicon, fixtures)."""
    return resources.files("flamewatch") / "data" / name


__all__ = ["data_path"]
__version__ = "0.1.0"
