"""UE-BS association under unique-association and per-BS quota constraints.

Two schemes: max-SINR with dropping (each UE picks the BS with the best
wideband SINR proxy; over-subscribed BSs keep their best UEs and drop the
rest) and worst-connection swapping (WCS), a load-balancing local search
that serves every UE and iteratively improves a network utility.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

DROPPED = -1


class InfeasibleAssociationError(ValueError):
    """Quotas cannot accommodate the UE population."""


@dataclass(frozen=True)
class ActivationVector:
    """Assignment state: beta[k] = serving BS of UE k (DROPPED if none).

    activation_sets[j] is Q_j, the set of UEs served by BS j. The sets are
    stored as data rather than derived on access so that deliberately
    inconsistent states can be constructed and fed to validate_association.
    """

    beta: tuple
    activation_sets: tuple
    quotas: tuple

    @classmethod
    def from_beta(cls, beta: Sequence[int], quotas: Sequence[int]) -> "ActivationVector":
        beta = tuple(int(b) for b in beta)
        quotas = tuple(int(q) for q in quotas)
        sets = tuple(frozenset(k for k, b in enumerate(beta) if b == j)
                     for j in range(len(quotas)))
        return cls(beta=beta, activation_sets=sets, quotas=quotas)

    @property
    def n_ue(self) -> int:
        return len(self.beta)

    @property
    def n_bs(self) -> int:
        return len(self.quotas)

    def served(self) -> list:
        return [k for k, b in enumerate(self.beta) if b != DROPPED]

    def load(self, bs: int) -> int:
        """Number of UEs served by BS bs (|Q_bs|)."""
        return len(self.activation_sets[bs])


@dataclass(frozen=True)
class AssociationOutcome:
    activation: ActivationVector
    dropped: frozenset
    utility: float      # nan when the scheme does not evaluate rates
    iterations: int = 0


def network_utility(rates, kind: str = "sum", eps: float = 1e-12) -> float:
    """Network utility of a per-UE rate vector (dropped UEs contribute 0).

    kind "sum" is the sum spectral efficiency; "log" is the
    proportional-fairness surrogate sum of ln(rate + eps).
    """
    rates = np.asarray(rates, dtype=float)
    if np.any(rates < 0):
        raise ValueError("rates must be non-negative")
    if kind == "sum":
        return float(rates.sum())
    if kind == "log":
        return float(np.log(rates + eps).sum())
    raise ValueError(f"unknown utility kind {kind!r}")


def sinr_proxy(channels: Mapping, powers: Sequence[float], noise_power: float,
               n_ue: int | None = None) -> np.ndarray:
    """Wideband pre-beamforming SINR proxy, shape (K, J).

    proxy[k, j] = P_j*||H_kj||_F^2 / (sum_{i != j} P_i*||H_ki||_F^2
    + N_k*sigma^2), an RSRP-style measurement that needs no knowledge of
    loads or beamformers. sigma^2 is the per-antenna noise power.
    """
    n_bs = len(powers)
    if n_ue is None:
        n_ue = max(k for k, _ in channels) + 1
    gains = np.empty((n_ue, n_bs))
    n_rx = None
    for k in range(n_ue):
        for j in range(n_bs):
            if (k, j) not in channels:
                raise ValueError(f"missing channel for link (ue={k}, bs={j})")
            h = channels[(k, j)].matrix
            n_rx = h.shape[0]
            gains[k, j] = np.linalg.norm(h) ** 2
    received = gains * np.asarray(powers, dtype=float)
    total = received.sum(axis=1, keepdims=True)
    return received / (total - received + n_rx * noise_power)


def max_sinr_associate(channels: Mapping, powers: Sequence[float],
                       quotas: Sequence[int], noise_power: float) -> AssociationOutcome:
    """Each UE picks its best proxy-SINR BS; over-quota BSs drop the excess.

    An over-subscribed BS retains the quota_j UEs with the highest proxy
    toward it; the remainder are DROPPED, not reassigned. Ties break
    toward the lower index. The returned utility is nan (this scheme does
    not evaluate rates).
    """
    quotas = [int(q) for q in quotas]
    if any(q < 0 for q in quotas):
        raise ValueError("quotas must be non-negative")
    proxy = sinr_proxy(channels, powers, noise_power)
    n_ue = proxy.shape[0]
    choice = np.argmax(proxy, axis=1)  # ties resolve to the lowest BS index
    beta = np.full(n_ue, DROPPED, dtype=int)
    for j, quota in enumerate(quotas):
        contenders = np.flatnonzero(choice == j)
        keep = sorted(contenders, key=lambda k: (-proxy[k, j], k))[:quota]
        beta[keep] = j
    activation = ActivationVector.from_beta(beta, quotas)
    dropped = frozenset(int(k) for k in np.flatnonzero(beta == DROPPED))
    return AssociationOutcome(activation=activation, dropped=dropped,
                              utility=math.nan, iterations=0)


def _greedy_full_assignment(proxy: np.ndarray, quotas: Sequence[int]) -> np.ndarray:
    """Quota-respecting assignment of every UE by descending proxy."""
    n_ue, n_bs = proxy.shape
    order = sorted(((k, j) for k in range(n_ue) for j in range(n_bs)),
                   key=lambda kj: (-proxy[kj], kj[0], kj[1]))
    beta = np.full(n_ue, DROPPED, dtype=int)
    load = [0] * n_bs
    for k, j in order:
        if beta[k] == DROPPED and load[j] < quotas[j]:
            beta[k] = j
            load[j] += 1
    return beta


def wcs_associate(channels: Mapping, powers: Sequence[float], quotas: Sequence[int],
                  evaluator: Callable[[np.ndarray], np.ndarray], noise_power: float,
                  max_iterations: int = 200,
                  utility_fn: Callable[[np.ndarray], float] = network_utility,
                  rng=None, utility_trace: list | None = None) -> AssociationOutcome:
    """Worst-connection-swapping association: serve everyone, then improve.

    Reconstruction of the WCS load-balancing scheme from its one-line
    description: start from a greedy quota-respecting full assignment,
    then repeatedly take the worst-rate UE not yet marked exhausted and
    try (a) reassigning it to a BS with spare quota and (b) swapping it
    with a UE on a different BS. Every candidate is scored by a full
    re-evaluation through `evaluator` (per-UE rates for the candidate
    assignment, so the interference structure follows the move). The best
    strictly improving candidate is accepted and the exhausted set is
    cleared; if none improves, the UE is marked exhausted. Terminates when
    all UEs are exhausted or after max_iterations accepted moves.

    The search is deterministic; `rng` is accepted for signature
    compatibility and unused. When utility_trace is a list, the initial
    utility and the utility after each accepted move are appended to it.
    Raises InfeasibleAssociationError when the quotas cannot serve all
    UEs.
    """
    quotas = [int(q) for q in quotas]
    proxy = sinr_proxy(channels, powers, noise_power)
    n_ue, n_bs = proxy.shape
    if sum(quotas) < n_ue:
        raise InfeasibleAssociationError(
            f"quota total {sum(quotas)} cannot serve {n_ue} UEs")
    beta = _greedy_full_assignment(proxy, quotas)
    rates = np.asarray(evaluator(beta), dtype=float)
    utility = utility_fn(rates)
    if utility_trace is not None:
        utility_trace.append(utility)
    load = np.bincount(beta, minlength=n_bs)
    exhausted: set = set()
    accepted = 0
    while accepted < max_iterations:
        active = [k for k in range(n_ue) if k not in exhausted]
        if not active:
            break
        worst = min(active, key=lambda k: (rates[k], k))
        serving = beta[worst]
        best = None  # (utility, beta, rates)
        for j in range(n_bs):
            if j == serving or load[j] >= quotas[j]:
                continue
            cand = beta.copy()
            cand[worst] = j
            cand_rates = np.asarray(evaluator(cand), dtype=float)
            cand_utility = utility_fn(cand_rates)
            if cand_utility > utility and (best is None or cand_utility > best[0]):
                best = (cand_utility, cand, cand_rates)
        for other in range(n_ue):
            if beta[other] == serving:
                continue
            cand = beta.copy()
            cand[worst], cand[other] = cand[other], cand[worst]
            cand_rates = np.asarray(evaluator(cand), dtype=float)
            cand_utility = utility_fn(cand_rates)
            if cand_utility > utility and (best is None or cand_utility > best[0]):
                best = (cand_utility, cand, cand_rates)
        if best is None:
            exhausted.add(worst)
            continue
        utility, beta, rates = best
        if utility_trace is not None:
            utility_trace.append(utility)
        load = np.bincount(beta, minlength=n_bs)
        exhausted.clear()
        accepted += 1
    activation = ActivationVector.from_beta(beta, quotas)
    return AssociationOutcome(activation=activation, dropped=frozenset(),
                              utility=float(utility), iterations=accepted)


def validate_association(outcome, quotas: Sequence[int] | None = None, *,
                         n_streams: int | None = None,
                         bs_antennas: Sequence[int] | None = None) -> bool:
    """True iff the activation state satisfies every association invariant.

    Checks pairwise-disjoint activation sets, quota compliance, agreement
    between beta and the sets, and (for an AssociationOutcome) that the
    dropped set and the served sets partition the UE population. When
    n_streams and bs_antennas are given, also checks stream feasibility
    n_streams*|Q_j| <= M_j.
    """
    activation = getattr(outcome, "activation", outcome)
    quotas = activation.quotas if quotas is None else tuple(int(q) for q in quotas)
    sets = activation.activation_sets
    if len(sets) != len(quotas):
        return False
    seen: set = set()
    for j, members in enumerate(sets):
        if len(members) > quotas[j]:
            return False
        if seen & members:
            return False
        seen |= members
        for k in members:
            if not (0 <= k < activation.n_ue) or activation.beta[k] != j:
                return False
    for k, b in enumerate(activation.beta):
        if b != DROPPED and (not 0 <= b < len(sets) or k not in sets[b]):
            return False
    if n_streams is not None and bs_antennas is not None:
        for j, members in enumerate(sets):
            if n_streams * len(members) > bs_antennas[j]:
                return False
    if hasattr(outcome, "dropped"):
        dropped = set(outcome.dropped)
        if dropped & seen:
            return False
        if dropped | seen != set(range(activation.n_ue)):
            return False
    return True
