"""Per-purpose seeds derived from one master seed.

``derive_seed(master, purpose, index)`` feeds ``(master, purpose_id, index)``
to numpy's SeedSequence and takes the first 32-bit word of its state. The
purpose ids are fixed, so a given master seed always yields the same network
initialization, batch stream and eigensolver start block.
"""

from __future__ import annotations

import numpy as np

PURPOSES: dict[str, int] = {"network": 0, "batch": 1, "eigensolver": 2}


def derive_seed(master: int, purpose: str, index: int = 0) -> int:
    """Seed for the ``index``-th draw of ``purpose`` under ``master``.

    Raises:
        KeyError: For an unknown purpose.
        ValueError: For negative master seeds or indices.
    """
    if purpose not in PURPOSES:
        raise KeyError(f"Unknown seed purpose '{purpose}'. Available: {', '.join(PURPOSES)}")
    if master < 0 or index < 0:
        raise ValueError(f"seeds must be non-negative, got master={master} index={index}")
    sequence = np.random.SeedSequence([int(master), PURPOSES[purpose], int(index)])
    return int(sequence.generate_state(1, dtype=np.uint32)[0])
