"""Closed-form derivatives of the half-angle weights.

``d^n/dl^n cos(l/2) = 2^-n cos(l/2 + n pi/2)`` and likewise for ``sin``; using
the phase-shift form keeps every order exact.
"""

from __future__ import annotations

import numpy as np


def dcos_half(lam, order: int = 0):
    return 0.5 ** order * np.cos(np.asarray(lam) / 2 + order * np.pi / 2)


def dsin_half(lam, order: int = 0):
    return 0.5 ** order * np.sin(np.asarray(lam) / 2 + order * np.pi / 2)


def dcos(lam, order: int = 0):
    return np.cos(np.asarray(lam) + order * np.pi / 2)


def dsin(lam, order: int = 0):
    return np.sin(np.asarray(lam) + order * np.pi / 2)
