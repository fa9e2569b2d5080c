"""Manufactured solutions for verifying the Poisson solvers (Delta u = f)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

PointFunction = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ManufacturedCase:
    """Analytic u* on the unit square with its source f = Delta u* and boundary data."""

    name: str
    exact: PointFunction
    gradient: PointFunction
    source: PointFunction
    dirichlet: PointFunction
    expected_order: float = 2.0


def _sines() -> ManufacturedCase:
    pi = np.pi

    def exact(p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=np.float64).reshape(-1, 2)
        return np.sin(pi * p[:, 0]) * np.sin(pi * p[:, 1])

    def gradient(p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=np.float64).reshape(-1, 2)
        x, y = p[:, 0], p[:, 1]
        return np.stack(
            [pi * np.cos(pi * x) * np.sin(pi * y), pi * np.sin(pi * x) * np.cos(pi * y)], axis=1
        )

    def source(p: np.ndarray) -> np.ndarray:
        return -2.0 * pi**2 * exact(p)

    def dirichlet(p: np.ndarray) -> np.ndarray:
        return np.zeros(len(np.asarray(p).reshape(-1, 2)))

    return ManufacturedCase("sines", exact, gradient, source, dirichlet)


def _bubble() -> ManufacturedCase:
    def exact(p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=np.float64).reshape(-1, 2)
        x, y = p[:, 0], p[:, 1]
        return x * (1 - x) * y * (1 - y)

    def gradient(p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=np.float64).reshape(-1, 2)
        x, y = p[:, 0], p[:, 1]
        return np.stack([(1 - 2 * x) * y * (1 - y), x * (1 - x) * (1 - 2 * y)], axis=1)

    def source(p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=np.float64).reshape(-1, 2)
        x, y = p[:, 0], p[:, 1]
        return -2.0 * (y * (1 - y) + x * (1 - x))

    def dirichlet(p: np.ndarray) -> np.ndarray:
        return np.zeros(len(np.asarray(p).reshape(-1, 2)))

    return ManufacturedCase("bubble", exact, gradient, source, dirichlet)


_CASES: dict[str, Callable[[], ManufacturedCase]] = {
    "sines": _sines,
    "bubble": _bubble,
}


def available_cases() -> list[str]:
    return sorted(_CASES)


def manufactured_poisson(case_id: str) -> ManufacturedCase:
    """Look up a manufactured case.

    ``sines``: u* = sin(pi x) sin(pi y), f = -2 pi^2 sin(pi x) sin(pi y),
    homogeneous Dirichlet data on the unit square.

    Raises:
        KeyError: For an unknown case id.
    """
    if case_id not in _CASES:
        raise KeyError(
            f"No manufactured case '{case_id}'. Available: {', '.join(available_cases())}"
        )
    return _CASES[case_id]()
