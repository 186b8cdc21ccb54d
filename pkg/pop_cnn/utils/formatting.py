"""
Number formatting for command output
"""

import math
from typing import Optional

from babel.numbers import format_decimal, format_percent

DEFAULT_LOCALE = "en_US"


def format_metric(value: Optional[float], digits: int = 4, locale: str = DEFAULT_LOCALE) -> str:
    """
    Format a metric such as a correlation for display

    Args:
        value: Metric value, None or NaN render as "n/a"
        digits: Fraction digits to show
        locale: Babel locale

    Returns:
        Formatted string
    """
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "n/a"
    pattern = "0." + "0" * digits if digits > 0 else "0"
    return format_decimal(value, format=pattern, locale=locale)


def format_ratio(percent: Optional[float], locale: str = DEFAULT_LOCALE) -> str:
    """
    Format a machine-human ratio given in percent, rounded to an integer

    Args:
        percent: Ratio as a percentage (96.08 → "96%")
        locale: Babel locale

    Returns:
        Formatted string
    """
    if percent is None:
        return "n/a"
    return format_percent(round(percent) / 100.0, locale=locale)


def format_accuracy(accuracy: Optional[float], locale: str = DEFAULT_LOCALE) -> str:
    """Format a fraction in [0, 1] as a percentage with one decimal"""
    if accuracy is None:
        return "n/a"
    return format_percent(accuracy, format="#,##0.0%", locale=locale)
