"""Low-light action recognition: degradation, ESIHE enhancement, entropy
silhouettes, key-pose cell features and a PCA + linear SVM classifier."""

__version__ = "0.1.0"

L = 256  # grey levels
