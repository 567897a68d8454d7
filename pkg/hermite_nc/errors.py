"""
errors.py
Exception types shared by the library and the CLI.

InputError     -> precondition violated by the caller (CLI exit 2)
ConfigError    -> bad experiment configuration, names the field (CLI exit 2)
NumericError   -> a decomposition or quadrature broke down (CLI exit 1)
"""

from __future__ import annotations
from typing import Any, Optional

import numpy as np


class InputError(ValueError):
    pass


class ConfigError(InputError):
    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        prefix = f"[{field}] " if field else ""
        super().__init__(prefix + message)


class NumericError(RuntimeError):
    def __init__(self, message: str, matrix: Any = None, params: Any = None):
        self.matrix = None if matrix is None else np.asarray(matrix)
        self.params = params
        parts = [message]
        if params is not None:
            parts.append(f"parameters: {params}")
        if self.matrix is not None:
            with np.printoptions(precision=6, suppress=True, threshold=64):
                parts.append(f"matrix:\n{self.matrix}")
        super().__init__("\n".join(parts))
