"""
Neural network engine and the POP-CNN model built on it
"""
