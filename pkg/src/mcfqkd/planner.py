"""Core/wavelength allocation under a secret key rate floor.

Every data channel carries the same capacity, so the goal is to switch on as
many candidate slots as possible while the quantum channel still reaches
``min_key_rate_bps``.

Why sorting works: each candidate adds a fixed, independent amount to the
background yield Y0, and the key rate never increases with Y0. The rate
floor therefore becomes a ceiling on Y0 (the noise budget), and the problem
is "pick the most items whose sizes sum to at most the budget". For any
feasible set of k items, the k smallest items have a sum no larger, so they
are feasible too; taking the smallest items first reaches the maximum k.
The final set is re-checked with the exact key rate, which absorbs any
tolerance left by the budget bisection.
"""

import math
from dataclasses import dataclass, field

from .classical import ClassicalFeasibility, channel_feasible
from .errors import NoBudgetError, SaturationError
from .fiber import N_CORES
from .leakage import DataChannel, leaked_power_at_detector, per_gate_probability
from .qkd import DEFAULT_MU_INTERVAL, best_key_rate, key_rate

BUDGET_RTOL = 1e-6


@dataclass(frozen=True)
class PlanningProblem:
    link: object  # CoexistenceLink; its allocation fixes the quantum slot
    length_km: float
    candidates: tuple
    min_key_rate_bps: float = 0.0
    rules: ClassicalFeasibility = field(default_factory=ClassicalFeasibility)

    def __post_init__(self):
        if not self.length_km > 0:
            raise ValueError(f"length must be > 0, got {self.length_km}")
        if not self.min_key_rate_bps >= 0:
            raise ValueError("min_key_rate_bps must be >= 0")
        cands = tuple(self.candidates)
        qslot = self.link.allocation.quantum_slot
        seen = set()
        for i, ch in enumerate(cands):
            if ch.slot == qslot:
                raise ValueError(f"candidates[{i}] is the quantum slot {qslot}")
            if ch.slot in seen:
                raise ValueError(f"candidates[{i}] duplicates slot {ch.slot}")
            seen.add(ch.slot)
            ok, reason = channel_feasible(ch, self.rules)
            if not ok:
                raise ValueError(f"candidates[{i}] infeasible: {reason}")
        object.__setattr__(self, "candidates", cands)


@dataclass(frozen=True)
class PlanResult:
    selected: tuple
    achieved_key_rate_bps: float
    key: object  # KeyRateResult
    noise: object  # NoiseBreakdown
    noise_budget_per_gate: float
    ranking: tuple

    @property
    def budget_utilization(self):
        """Fraction of the leakage headroom (budget minus dark counts) in use."""
        headroom = self.noise_budget_per_gate - self.noise.dark_prob
        if headroom <= 0:
            return 0.0
        return (self.noise.total_per_gate_prob - self.noise.dark_prob) / headroom


def grid_candidates(wavelengths_nm, launch_dbm, quantum_slot, cores=range(N_CORES)):
    return tuple(
        DataChannel(core, wl, launch_dbm)
        for core in cores for wl in wavelengths_nm
        if (core, wl) != tuple(quantum_slot)
    )


def _rate(qkd, eta, Y0, optimize_mu, mu_interval):
    if optimize_mu:
        return best_key_rate(qkd, eta, Y0, mu_interval)
    return key_rate(qkd, eta, Y0)


def _meets(result, min_rate_bps):
    return result.R_per_gate > 0 and result.R_bps >= min_rate_bps


def noise_budget(qkd, eta, min_rate_bps, optimize_mu=False, mu_interval=DEFAULT_MU_INTERVAL,
                 rtol=BUDGET_RTOL):
    """Largest background yield Y0 at which the key rate still reaches ``min_rate_bps``.

    A zero floor means "any positive key", i.e. the budget is the zero crossing.
    """
    lo = qkd.detector.dark_count_prob_per_gate
    if not _meets(_rate(qkd, eta, lo, optimize_mu, mu_interval), min_rate_bps):
        raise NoBudgetError(
            f"{min_rate_bps:g} bps is out of reach even with dark counts only"
        )
    hi = 0.5
    while _meets(_rate(qkd, eta, hi, optimize_mu, mu_interval), min_rate_bps):
        lo, hi = hi, (hi + 1.0) / 2.0
        if 1.0 - hi < 1e-15:
            return lo
    while hi - lo > rtol * max(lo, 1e-300):
        mid = (lo + hi) / 2.0
        if _meets(_rate(qkd, eta, mid, optimize_mu, mu_interval), min_rate_bps):
            lo = mid
        else:
            hi = mid
    return lo


def _contribution(ch, link, length_km):
    alloc = link.allocation
    p = leaked_power_at_detector(
        ch, alloc.quantum_core, alloc.quantum_wavelength_nm, link.fiber, link.filter,
        length_km, link.extra_path_loss_db,
    )
    return per_gate_probability(p, ch.wavelength_nm, link.detector)


def rank_slots(problem):
    """Candidates with their per-gate leak probability, in selection order."""
    ranked = [(ch, _contribution(ch, problem.link, problem.length_km)) for ch in problem.candidates]
    ranked.sort(key=lambda item: (item[1], item[0].core, item[0].wavelength_nm))
    return tuple(ranked)


def plan_allocation(problem):
    link = problem.link
    ranking = rank_slots(problem)
    eta = link.transmittance(problem.length_km)
    budget = noise_budget(
        link.qkd, eta, problem.min_key_rate_bps, link.optimize_mu, link.mu_interval,
    )

    dark = link.detector.dark_count_prob_per_gate
    k = 0
    running = [dark]
    for _, prob in ranking:
        running.append(prob)
        if math.fsum(running) > budget:
            break
        k += 1

    def evaluate(n):
        alloc = link.allocation.with_channels(ch for ch, _ in ranking[:n])
        noise = link.noise(problem.length_km, alloc)
        return link.rate_for_background(eta, noise.total_per_gate_prob), noise

    # exact re-check against the key rate, both directions
    key, noise = evaluate(k)
    while k > 0 and not _meets(key, problem.min_key_rate_bps):
        k -= 1
        key, noise = evaluate(k)
    while k < len(ranking):
        try:
            nxt_key, nxt_noise = evaluate(k + 1)
        except SaturationError:
            break
        if not _meets(nxt_key, problem.min_key_rate_bps):
            break
        k, key, noise = k + 1, nxt_key, nxt_noise

    return PlanResult(
        selected=tuple(ch for ch, _ in ranking[:k]),
        achieved_key_rate_bps=key.R_bps,
        key=key,
        noise=noise,
        noise_budget_per_gate=budget,
        ranking=ranking,
    )
