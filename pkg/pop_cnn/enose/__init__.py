"""
E-nose data: sensor matrices, preprocessing, gradient-driven subsampling and
synthetic datasets
"""
