# Copyright (c) 2026, POP-CNN contributors
# For license information, please see license.txt

"""
Tests package for POP-CNN
"""
