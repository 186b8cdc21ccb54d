"""
Training and evaluation of POP networks
"""
