"""Finite team decision problems solved by exhaustive enumeration.

A :class:`DiscreteTeam` has a finite state space with a prior, ``n``
members indexed in decision-precedence order, and per-member information
structures. A static structure for member ``i`` is an array of shape
``(S, X_i)``; a dynamic one also conditions on the actions of the members
that decide before ``i`` and has shape ``(S, A_0, ..., A_{i-1}, X_i)``.
Member utilities are stored in one array of shape ``(n, A_0, ..., A_{n-1}, S)``.

Everything here is brute force on purpose: every quantity is an exact
finite sum, so results can be checked by hand.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Callable, Iterator, Sequence

import numpy as np

from . import kernels

DEFAULT_BUDGET = 10**6


class EnumerationBudgetError(RuntimeError):
    pass


def _mean_pool(u: np.ndarray) -> float:
    return float(np.mean(u))


@dataclass(frozen=True)
class DiscreteTeam:
    prior: np.ndarray
    info: tuple[np.ndarray, ...]
    utilities: np.ndarray
    team_utility: Callable[[np.ndarray], float] = _mean_pool

    def __post_init__(self):
        prior = np.asarray(self.prior, dtype=float)
        utilities = np.asarray(self.utilities, dtype=float)
        info = tuple(np.asarray(e, dtype=float) for e in self.info)
        n = len(info)
        if abs(prior.sum() - 1.0) > 1e-12 or np.any(prior < 0):
            raise ValueError("prior must be a probability vector")
        if utilities.ndim != n + 2 or utilities.shape[0] != n:
            raise ValueError(f"utilities must have shape (n, A_0..A_{n - 1}, S) with n={n}")
        if utilities.shape[-1] != prior.size:
            raise ValueError("utilities state axis does not match the prior")
        actions = utilities.shape[1:-1]
        for i, eta in enumerate(info):
            if eta.shape[0] != prior.size:
                raise ValueError(f"info[{i}] state axis does not match the prior")
            if eta.ndim == 2:
                pass
            elif eta.ndim == 2 + i and eta.shape[1:-1] == actions[:i]:
                pass
            else:
                # anything else would let member i see actions it cannot know yet
                raise ValueError(
                    f"info[{i}] has shape {eta.shape}; expected (S, X) or "
                    f"(S, {', '.join(map(str, actions[:i]))}, X)"
                )
            if np.any(eta < 0) or not np.allclose(eta.sum(axis=-1), 1.0, rtol=0, atol=1e-12):
                raise ValueError(f"info[{i}] rows must be probability vectors")
        object.__setattr__(self, "prior", prior)
        object.__setattr__(self, "utilities", utilities)
        object.__setattr__(self, "info", info)

    @property
    def n_members(self) -> int:
        return len(self.info)

    @property
    def n_states(self) -> int:
        return self.prior.size

    @property
    def n_actions(self) -> tuple[int, ...]:
        return self.utilities.shape[1:-1]

    @property
    def n_observations(self) -> tuple[int, ...]:
        return tuple(eta.shape[-1] for eta in self.info)

    def is_dynamic(self, member: int) -> bool:
        return self.info[member].ndim > 2

    def observation_distribution(self, member: int, state: int,
                                 earlier_actions: tuple[int, ...]) -> np.ndarray:
        """Distribution of member's observation given the state and earlier actions."""
        assert len(earlier_actions) == member, "member may only see earlier actions"
        eta = self.info[member]
        if eta.ndim == 2:
            return eta[state]
        return eta[(state, *earlier_actions)]

    def rule_space(self, member: int) -> Iterator[tuple[int, ...]]:
        """All deterministic rules of ``member`` as observation -> action tuples."""
        return itertools.product(range(self.n_actions[member]),
                                 repeat=self.n_observations[member])

    def profile_count(self) -> int:
        return math.prod(a ** x for a, x in zip(self.n_actions, self.n_observations))

    def with_team_utility(self, team_utility) -> DiscreteTeam:
        return replace(self, team_utility=team_utility)


@dataclass(frozen=True)
class DecisionProfile:
    """Per-member decision rules, or a joint mixture of deterministic profiles.

    A deterministic rule is a tuple mapping observation index to action
    index. A randomized rule is an array of shape ``(X_i, A_i)`` whose rows
    are action distributions. A jointly randomized profile has no rules of
    its own and carries ``mixture``: pairs of ``(weight, profile)``.
    """

    rules: tuple = ()
    mixture: tuple = ()

    @property
    def jointly_randomized(self) -> bool:
        return bool(self.mixture)

    @property
    def deterministic(self) -> bool:
        return not self.mixture and all(isinstance(r, tuple) for r in self.rules)

    def replace_rule(self, member: int, rule) -> DecisionProfile:
        rules = list(self.rules)
        rules[member] = rule
        return DecisionProfile(tuple(rules))

    @classmethod
    def of(cls, *rules) -> DecisionProfile:
        return cls(tuple(r if isinstance(r, np.ndarray) else tuple(r) for r in rules))

    @classmethod
    def joint(cls, profiles: Sequence[DecisionProfile], weights) -> DecisionProfile:
        w = [float(x) for x in weights]
        if len(w) != len(profiles) or any(x < 0 for x in w) or abs(math.fsum(w) - 1.0) > 1e-12:
            raise ValueError("joint randomization weights must be a probability vector")
        return cls((), tuple(zip(w, profiles)))


def _check_profile(team: DiscreteTeam, profile: DecisionProfile) -> None:
    if len(profile.rules) != team.n_members:
        raise ValueError(f"profile has {len(profile.rules)} rules for {team.n_members} members")
    for i, rule in enumerate(profile.rules):
        if isinstance(rule, tuple):
            if len(rule) != team.n_observations[i]:
                raise ValueError(f"rule {i} covers {len(rule)} observations, "
                                 f"member has {team.n_observations[i]}")
        else:
            r = np.asarray(rule)
            if r.shape != (team.n_observations[i], team.n_actions[i]):
                raise ValueError(f"randomized rule {i} has shape {r.shape}")
            if not np.allclose(r.sum(axis=1), 1.0, rtol=0, atol=1e-12):
                raise ValueError(f"randomized rule {i} rows must sum to 1")


def outcome_distribution(team: DiscreteTeam, profile: DecisionProfile) -> dict:
    """Exact joint distribution over ``(actions, state)`` induced by a profile."""
    out: dict = {}
    if profile.jointly_randomized:
        for w, sub in profile.mixture:
            for key, p in outcome_distribution(team, sub).items():
                out[key] = out.get(key, 0.0) + w * p
        return out

    _check_profile(team, profile)
    n = team.n_members

    def walk(state, actions, prob):
        i = len(actions)
        if i == n:
            key = (actions, state)
            out[key] = out.get(key, 0.0) + prob
            return
        eta = team.observation_distribution(i, state, actions)
        rule = profile.rules[i]
        for x, px in enumerate(eta):
            if px == 0.0:
                continue
            if isinstance(rule, tuple):
                walk(state, actions + (rule[x],), prob * px)
            else:
                for a, pa in enumerate(rule[x]):
                    if pa != 0.0:
                        walk(state, actions + (a,), prob * px * pa)

    for s, ps in enumerate(team.prior):
        if ps != 0.0:
            walk(s, (), ps)
    return out


def payoff_vector(team: DiscreteTeam, profile: DecisionProfile) -> np.ndarray:
    """Expected utility of every member under ``profile``."""
    dist = outcome_distribution(team, profile)
    return np.array([
        math.fsum(p * team.utilities[(i, *acts, s)] for (acts, s), p in dist.items())
        for i in range(team.n_members)
    ])


def expected_payoff(team: DiscreteTeam, profile: DecisionProfile, member: int) -> float:
    return float(payoff_vector(team, profile)[member])


def team_payoff(team: DiscreteTeam, profile: DecisionProfile) -> float:
    """Expectation of the team utility ``L(u_1, ..., u_n)`` applied per outcome."""
    dist = outcome_distribution(team, profile)
    return math.fsum(
        p * team.team_utility(team.utilities[(slice(None), *acts, s)])
        for (acts, s), p in dist.items()
    )


def deterministic_profiles(team: DiscreteTeam, budget: int = DEFAULT_BUDGET) -> list[DecisionProfile]:
    count = team.profile_count()
    if count > budget:
        raise EnumerationBudgetError(f"{count} deterministic profiles exceed budget {budget}")
    spaces = [list(team.rule_space(i)) for i in range(team.n_members)]
    return [DecisionProfile(rules) for rules in itertools.product(*spaces)]


def payoff_table(team: DiscreteTeam, profiles: Sequence[DecisionProfile]) -> np.ndarray:
    """Member payoff vectors for each profile, shape ``(len(profiles), n)``."""
    return np.array([payoff_vector(team, p) for p in profiles])


def pareto_set(team: DiscreteTeam, budget: int = DEFAULT_BUDGET,
               rtol: float = 1e-12) -> list[DecisionProfile]:
    """Deterministic profiles that no other profile weakly dominates.

    Payoffs closer than ``rtol`` (relative to the largest payoff) count as
    equal, so summation round-off cannot hide or invent a domination.
    """
    profiles = deterministic_profiles(team, budget)
    table = np.ascontiguousarray(payoff_table(team, profiles))
    tol = rtol * max(1.0, float(np.max(np.abs(table))))
    keep = kernels.pareto_mask(table, tol)
    return [p for p, k in zip(profiles, keep) if k]


def optimal_profiles(team: DiscreteTeam, budget: int = DEFAULT_BUDGET, tol: float = 1e-12):
    """Deterministic profiles attaining the maximal team payoff."""
    profiles = deterministic_profiles(team, budget)
    values = np.array([team_payoff(team, p) for p in profiles])
    best = values.max()
    return [p for p, v in zip(profiles, values) if v >= best - tol * max(1.0, abs(best))]


def best_response(team: DiscreteTeam, profile: DecisionProfile, member: int,
                  objective: Callable[[DecisionProfile], float]):
    """Best deterministic rule for ``member`` holding the others fixed.

    Ties go to the rule enumerated first (lowest action indices).
    """
    best_rule, best_val = None, -math.inf
    for rule in team.rule_space(member):
        val = objective(profile.replace_rule(member, rule))
        if val > best_val:
            best_rule, best_val = rule, val
    return best_rule, best_val


def person_by_person_check(team: DiscreteTeam, profile: DecisionProfile,
                           rtol: float = 1e-12) -> bool:
    """True iff no single member can raise the team payoff by changing its rule alone."""
    if profile.jointly_randomized:
        raise ValueError("person-by-person optimality is defined for per-member rules")
    base = team_payoff(team, profile)
    slack = rtol * max(1.0, abs(base))
    for i in range(team.n_members):
        for rule in team.rule_space(i):
            if team_payoff(team, profile.replace_rule(i, rule)) > base + slack:
                return False
    return True


@dataclass(frozen=True)
class TeamClassification:
    kind: str  # "altruistic" or "antagonistic"
    cooperates: tuple[bool, ...]
    security_levels: tuple[float, ...]
    cooperative_payoffs: tuple[float, ...]


def best_personal_profiles(team: DiscreteTeam, cooperative: DecisionProfile) -> list[DecisionProfile]:
    """For each member, the cooperative profile with that member's rule
    swapped for its best rule under its own utility."""
    out = []
    for i in range(team.n_members):
        rule, _ = best_response(team, cooperative, i,
                                lambda p, i=i: expected_payoff(team, p, i))
        out.append(cooperative.replace_rule(i, rule))
    return out


def classify_membership(team: DiscreteTeam, cooperative_profile: DecisionProfile,
                        personal_profiles: Sequence[DecisionProfile] | None = None,
                        ) -> TeamClassification:
    """Decide who cooperates: member i joins iff its cooperative payoff
    reaches its security level (its payoff under its personal profile)."""
    if personal_profiles is None:
        personal_profiles = best_personal_profiles(team, cooperative_profile)
    coop = payoff_vector(team, cooperative_profile)
    security = tuple(expected_payoff(team, p, i) for i, p in enumerate(personal_profiles))
    cooperates = tuple(bool(c >= s) for c, s in zip(coop, security))
    kind = "altruistic" if all(cooperates) else "antagonistic"
    return TeamClassification(kind, cooperates, security, tuple(float(c) for c in coop))


def convexify_by_joint_randomization(team: DiscreteTeam, profiles: Sequence[DecisionProfile],
                                     weights) -> DecisionProfile:
    for p in profiles:
        if not p.jointly_randomized:
            _check_profile(team, p)
    return DecisionProfile.joint(profiles, weights)
