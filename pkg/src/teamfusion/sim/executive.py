"""Team executive: integrates member readings and designates a common target."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from ..fusion import CommonFrameObservation, fuse_all, partition_coalitions
from ..pools import LinearPool


@dataclass(frozen=True)
class Integration:
    """Executive's view of one evader for one step."""

    evader_id: str
    estimate: CommonFrameObservation | None
    used: tuple[str, ...] = ()       # observers whose readings were fused
    excluded: tuple[str, ...] = ()   # observers outside the fused coalition
    coalitions: tuple[tuple[str, ...], ...] = ()
    prior: CommonFrameObservation | None = None


def executive_integrate(
    readings: Mapping[str, Sequence[tuple[str, CommonFrameObservation]]],
    priors: Mapping[str, CommonFrameObservation] | None = None,
) -> dict[str, Integration]:
    """Fuse each evader's readings from the largest agreeing coalition.

    ``readings`` maps evader id to ``(observer_id, observation)`` pairs in
    the common frame. Evaders known only through ``priors`` get an entry
    with no estimate for this step. Among equally large coalitions the one
    with the lowest reading indices wins.
    """
    priors = priors or {}
    out: dict[str, Integration] = {}
    for eid in sorted(set(readings) | set(priors)):
        obs = list(readings.get(eid, ()))
        if not obs:
            out[eid] = Integration(eid, None, prior=priors.get(eid))
            continue
        coalitions = partition_coalitions([o for _, o in obs])
        chosen = coalitions[0].members
        fused = fuse_all([obs[k][1] for k in chosen])
        out[eid] = Integration(
            eid,
            fused,
            used=tuple(obs[k][0] for k in chosen),
            excluded=tuple(obs[k][0] for k in range(len(obs)) if k not in chosen),
            coalitions=tuple(tuple(obs[k][0] for k in c.members) for c in coalitions),
            prior=priors.get(eid),
        )
    return out


def closeness(distance: float, scale: float) -> float:
    """Member utility for chasing an evader at ``distance``; decreasing in distance."""
    return math.exp(-distance / scale)


def designate_target(
    members: Mapping[str, tuple[float, float]],
    tracks: Mapping[str, CommonFrameObservation],
    scale: float,
) -> tuple[str | None, float]:
    """Evader maximising the equal-weight linear pool of member closeness utilities.

    Returns ``(evader_id, team_utility)``; ``(None, 0.0)`` with no members or tracks.
    """
    if not members or not tracks:
        return None, 0.0
    ids = sorted(members)
    weights = [1.0 / len(ids)] * len(ids)
    best, best_val = None, -math.inf
    for eid in sorted(tracks):
        ex, ey = tracks[eid].position
        values = [closeness(math.hypot(ex - members[m][0], ey - members[m][1]), scale)
                  for m in ids]
        val = LinearPool([None] * len(ids), weights).combine(values)
        if val > best_val:
            best, best_val = eid, val
    return best, best_val
