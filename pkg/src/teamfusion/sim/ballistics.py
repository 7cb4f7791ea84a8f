"""Shots at evaders inside the capture region."""

from __future__ import annotations

import math

import numpy as np

from .model import BallisticsSpec, Robot

CAPTURED = "captured"
MISSED = "missed"
NO_SHOT = "no_shot"


def resolve_ballistics(pursuer: Robot, evader: Robot, estimate, spec: BallisticsSpec,
                       rng: np.random.Generator) -> str:
    """Fire at ``evader`` when it is truly within the capture radius.

    ``estimate`` is the shooter's position estimate (anything with a
    ``covariance`` attribute, or a covariance matrix). Without an estimate
    there is nothing to aim at and no shot is taken. A shot consumes one
    uniform draw and hits with ``spec.hit_probability(trace(cov))``.
    """
    if not (pursuer.alive and evader.alive) or estimate is None:
        return NO_SHOT
    p, e = pursuer.state, evader.state
    if math.hypot(p.x - e.x, p.y - e.y) > spec.capture_radius:
        return NO_SHOT
    cov = np.asarray(getattr(estimate, "covariance", estimate), dtype=float)
    p_hit = spec.hit_probability(float(np.trace(cov)))
    return CAPTURED if rng.random() < p_hit else MISSED
