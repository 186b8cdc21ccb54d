"""
POP-CNN
Odor pleasantness prediction from electronic-nose signals with a small
convolutional network and gradient-driven non-uniform subsampling
"""

__version__ = "1.0.0"
