"""Rate-profile design by simulated annealing.

Cost of a profile is the union bound of its approximate weight
distribution at a fixed SNR.  Proposals swap one information index for
one frozen index; accepted uphill moves follow the exp(-delta/T) rule
with the temperature cooled geometrically per acceptance.

RNG contract: a seeded numpy PCG64 generator; per proposal the draws
are (1) removed-index choice, (2) added-index choice, then (3) one
uniform(0,1) only when the acceptance test is reached.  Traces are
therefore reproducible from the seed alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import SnrPoint, union_bound
from .pac_core import CodeSpec, rm_score
from .wef import approx_wef, counts_from_pmf

__all__ = ["SAConfig", "SAResult", "NoMoveError", "cost", "perturb", "sa_design"]


class NoMoveError(RuntimeError):
    """No eligible swap exists for the requested perturbation space."""


@dataclass(frozen=True)
class SAConfig:
    t_max: float
    t_min: float
    a: float
    snr: SnrPoint
    n_th: int = 32
    mode: str = "improved"
    search_space: str = "free"
    seed: int = 0
    start_profile: tuple[int, ...] = ()
    max_proposals: int = 100_000

    def __post_init__(self):
        if not 0 < self.t_min < self.t_max:
            raise ValueError("need 0 < t_min < t_max")
        if not 0 < self.a < 1:
            raise ValueError("cooling factor must be in (0, 1)")
        if self.search_space not in ("free", "rm_constrained"):
            raise ValueError(f"unknown search space {self.search_space!r}")
        object.__setattr__(self, "start_profile", tuple(sorted(self.start_profile)))


@dataclass(frozen=True)
class SAResult:
    best_profile: tuple[int, ...]
    best_cost: float
    min_ever_profile: tuple[int, ...]
    min_ever_cost: float
    start_cost: float
    trace: tuple[tuple[int, float, float], ...]  # (i, accepted cost, temperature)
    acceptances: int
    proposals: int


def cost(spec: CodeSpec, snr: SnrPoint, n_th: int = 32, mode: str = "improved") -> float:
    """Union bound of the approximate WEF at the given SNR; deterministic."""
    if spec.K == 0:
        return 0.0
    pmf = approx_wef(spec, n_th=n_th, mode=mode)
    return union_bound(counts_from_pmf(pmf, spec.K), snr)


def perturb(profile, rng: np.random.Generator, space: str, N: int) -> tuple[int, ...]:
    """Swap one information index for one frozen index, uniformly.

    In the rm_constrained space both indices must carry the boundary RM
    score (the lowest score present in the profile).
    """
    info = sorted(int(i) for i in profile)
    if not 0 < len(info) < N:
        raise NoMoveError(f"no swap possible with K={len(info)}, N={N}")
    frozen = sorted(set(range(N)) - set(info))
    if space == "free":
        removable, addable = info, frozen
    elif space == "rm_constrained":
        boundary = min(rm_score(i) for i in info)
        removable = [i for i in info if rm_score(i) == boundary]
        addable = [i for i in frozen if rm_score(i) == boundary]
        if not removable or not addable:
            raise NoMoveError(
                f"no frozen position shares the boundary RM score {boundary}"
            )
    else:
        raise ValueError(f"unknown search space {space!r}")
    out = int(removable[rng.integers(len(removable))])
    inc = int(addable[rng.integers(len(addable))])
    result = set(info)
    result.remove(out)
    result.add(inc)
    return tuple(sorted(result))


def sa_design(cfg: SAConfig, spec_template: CodeSpec, cost_fn=None) -> SAResult:
    """Anneal the rate profile of spec_template's code.

    The loop runs until the temperature drops below t_min or the
    proposal budget is exhausted (rejections leave the temperature
    unchanged, so a budget is needed to guarantee termination).  The
    current state is always the last accepted profile.
    """
    n = spec_template.N
    gen = spec_template.gen
    if cost_fn is None:
        def cost_fn(info):
            return cost(CodeSpec.make(n, info, gen), cfg.snr, cfg.n_th, cfg.mode)

    rng = np.random.default_rng(cfg.seed)
    profile = cfg.start_profile or spec_template.info_set
    e_current = cost_fn(profile)
    start_cost = e_current

    # the floor of 1 means profiles costing more are never recorded as
    # best; the aggregate result still falls back to the start profile
    alg_best_cost = 1.0
    alg_best_profile: tuple[int, ...] | None = None

    min_ever_profile, min_ever_cost = profile, e_current
    trace: list[tuple[int, float, float]] = []
    i = 1
    temp = cfg.t_max
    acceptances = 0
    proposals = 0

    while temp > cfg.t_min and proposals < cfg.max_proposals:
        candidate = perturb(profile, rng, cfg.search_space, n)
        e_new = cost_fn(candidate)
        proposals += 1
        if e_new < min_ever_cost:
            min_ever_profile, min_ever_cost = candidate, e_new
        delta = e_new - e_current
        if delta < 0:
            i += 1
            profile, e_current = candidate, e_new
            if e_new < alg_best_cost:
                alg_best_profile, alg_best_cost = candidate, e_new
            temp = cfg.t_max * cfg.a**i
            acceptances += 1
            trace.append((i, e_new, temp))
        elif math.exp(-delta / temp) > rng.random():
            i += 1
            profile, e_current = candidate, e_new
            temp = cfg.t_max * cfg.a**i
            acceptances += 1
            trace.append((i, e_new, temp))

    if alg_best_profile is None or alg_best_cost > start_cost:
        best_profile, best_cost = (cfg.start_profile or spec_template.info_set), start_cost
    else:
        best_profile, best_cost = alg_best_profile, alg_best_cost

    return SAResult(
        best_profile=best_profile,
        best_cost=best_cost,
        min_ever_profile=min_ever_profile,
        min_ever_cost=min_ever_cost,
        start_cost=start_cost,
        trace=tuple(trace),
        acceptances=acceptances,
        proposals=proposals,
    )
