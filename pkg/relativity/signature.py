"""
Metric signature setting
One place every module reads the session sign convention from
"""

import os
import logging

import numpy as np

logger = logging.getLogger(__name__)

_signature = int(os.getenv('ATOMFRAME_SIGNATURE', '1'))


def get_signature() -> int:
    """Current sgn; eta = sgn * diag(+, -, -, -)"""
    return _signature


def set_signature(sgn: int):
    """Change the session signature (+1 particle physics, -1 general relativity)"""
    global _signature
    if sgn not in (1, -1):
        raise ValueError(f"Signature must be +1 or -1, got {sgn}")
    if sgn != _signature:
        logger.info(f"Metric signature set to {sgn:+d}")
    _signature = sgn


def minkowski_metric(sgn: int = None) -> np.ndarray:
    """eta_{mu nu}; numerically equal to its inverse eta^{mu nu}"""
    if sgn is None:
        sgn = get_signature()
    return sgn * np.diag([1.0, -1.0, -1.0, -1.0])
