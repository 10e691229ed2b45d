from .base import (
    opener, opened, Struct, HestonvarError, NumericalFailure, worker_count, fmt_float)

from .enum import Enum

__all__ = ['opener', 'opened', 'Struct', 'HestonvarError', 'NumericalFailure', 'worker_count', 'fmt_float', 'Enum']
