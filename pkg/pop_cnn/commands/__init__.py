# Copyright (c) 2026, POP-CNN contributors
# For license information, please see license.txt

"""
CLI command handlers, one module per command (registered in pop_cnn.hooks)
"""
