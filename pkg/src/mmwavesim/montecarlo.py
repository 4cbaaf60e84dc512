"""Monte Carlo campaign driver: drops, per-drop evaluation, aggregation.

One drop is one time slot's CSI: fixed BS grid, fresh uniform UE
positions, fresh channel realizations, association, beamforming, and
metric evaluation. Drops are pure functions of (config, drop index), so
campaigns are reproducible and may run drops in parallel without
changing results.
"""

from __future__ import annotations

import functools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .association import (DROPPED, AssociationOutcome, max_sinr_associate,
                          network_utility, wcs_associate)
from .channel import (ArrayGeometry, PropagationParams, SPEED_OF_LIGHT,
                      assemble_channel, import_channels, path_loss_db,
                      sample_cluster_set, sample_link_state)
from .linkmetrics import (DropEvaluator, InterferenceModel, dbm_to_watts,
                          noise_power_watts)
from .topology import (DEFAULT_BS_HEIGHT, DEFAULT_UE_HEIGHT, NetworkLayout,
                       deploy_grid_bs, deploy_uniform_ues, link_distances)

# purpose codes for per-drop substream derivation
_PURPOSE_PLACEMENT = 0
_PURPOSE_LINK_STATE = 1
_PURPOSE_SHADOWING = 2
_PURPOSE_CLUSTERS = 3
_PURPOSE_BORESIGHT = 4

_SCHEMES = ("max-sinr", "wcs")
_MODELS = {"oim": (InterferenceModel.OIM,),
           "bim": (InterferenceModel.BIM,),
           "both": (InterferenceModel.OIM, InterferenceModel.BIM)}


@dataclass(frozen=True)
class SimulationConfig:
    """Resolved campaign configuration; defaults are the reference scenario
    (4 BSs on a 2x2 grid in a 300 m square, 16 UEs, 28 GHz, 1 GHz band,
    30 dBm per BS, 8x8 BS panels, 4x1 UE panels, 4 streams, quota 4)."""

    area_side: float = 300.0
    grid_rows: int = 2
    grid_cols: int = 2
    n_ue: int = 16
    quota: int = 4
    bs_rows: int = 8
    bs_cols: int = 8
    ue_rows: int = 4
    ue_cols: int = 1
    n_streams: int = 4
    frequency_hz: float = 28e9
    bandwidth_hz: float = 1e9
    bs_power_dbm: float = 30.0
    noise_density_dbm_hz: float = -174.0
    n_clusters: int = 4
    n_subpaths: int = 7
    subpath_phase: bool = True
    channel_source: str = "acm"
    channel_file: str | None = None
    interference: str = "both"
    power_norm: str = "paper"
    oim_literal: bool = False
    association_scheme: str = "max-sinr"
    utility: str = "sum"
    max_iterations: int = 200
    drops: int = 500
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        positive_counts = ("grid_rows", "grid_cols", "n_ue", "bs_rows", "bs_cols",
                           "ue_rows", "ue_cols", "n_streams", "n_clusters",
                           "n_subpaths", "max_iterations", "drops", "workers")
        for name in positive_counts:
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.quota < 0:
            raise ValueError("quota must be >= 0")
        for name in ("area_side", "frequency_hz", "bandwidth_hz"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.n_streams > min(self.ue_rows * self.ue_cols, self.bs_rows * self.bs_cols):
            raise ValueError("n_streams cannot exceed either array size")
        if self.interference not in _MODELS:
            raise ValueError(f"interference must be one of {sorted(_MODELS)}")
        if self.association_scheme not in _SCHEMES:
            raise ValueError(f"association_scheme must be one of {_SCHEMES}")
        if self.utility not in ("sum", "log"):
            raise ValueError("utility must be 'sum' or 'log'")
        if self.power_norm not in ("paper", "per_stream"):
            raise ValueError("power_norm must be 'paper' or 'per_stream'")
        if self.channel_source not in ("acm", "import"):
            raise ValueError("channel_source must be 'acm' or 'import'")
        if self.channel_source == "import" and not self.channel_file:
            raise ValueError("channel_source 'import' requires channel_file")
        if self.association_scheme == "wcs" and self.n_bs * self.quota < self.n_ue:
            raise ValueError(
                f"wcs needs total quota >= n_ue ({self.n_bs * self.quota} < {self.n_ue})")

    @property
    def n_bs(self) -> int:
        return self.grid_rows * self.grid_cols

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.frequency_hz

    @property
    def quotas(self) -> tuple:
        return (self.quota,) * self.n_bs

    @property
    def bs_power_watts(self) -> float:
        return dbm_to_watts(self.bs_power_dbm)

    @property
    def noise_power_watts(self) -> float:
        return noise_power_watts(self.noise_density_dbm_hz, self.bandwidth_hz)

    @property
    def models(self) -> tuple:
        return _MODELS[self.interference]

    def propagation(self) -> PropagationParams:
        return PropagationParams(wavelength_m=self.wavelength_m)

    def bs_geometry(self) -> ArrayGeometry:
        return ArrayGeometry(self.bs_rows, self.bs_cols, self.wavelength_m)

    def ue_geometry(self) -> ArrayGeometry:
        return ArrayGeometry(self.ue_rows, self.ue_cols, self.wavelength_m)


@dataclass(frozen=True)
class ModelResult:
    """Per-drop outcome for one interference model."""

    model: InterferenceModel
    outcome: AssociationOutcome
    rates: np.ndarray           # (K,), dropped UEs at 0
    inp_power_dbw: np.ndarray   # (K,), nan for dropped UEs
    utility: float              # realized utility of `rates`


@dataclass(frozen=True)
class DropResult:
    drop_index: int
    ue_positions: np.ndarray
    results: tuple

    @property
    def n_dropped(self) -> int:
        return len(self.results[0].outcome.dropped)


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Right-continuous empirical CDF plus a density histogram of samples."""

    values: np.ndarray       # sorted
    cum_prob: np.ndarray     # i/n at values[i-1]
    bin_edges: np.ndarray
    densities: np.ndarray

    @property
    def n_samples(self) -> int:
        return self.values.size

    def cdf(self, x: float) -> float:
        return float(np.searchsorted(self.values, x, side="right")) / self.n_samples

    def quantile(self, p: float) -> float:
        """Smallest sample value v with cdf(v) >= p."""
        if not 0.0 <= p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        idx = max(int(np.ceil(p * self.n_samples)) - 1, 0)
        return float(self.values[idx])


def empirical_cdf(samples, bins: int = 50) -> EmpiricalDistribution:
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size == 0:
        raise ValueError("need at least one sample")
    if not np.all(np.isfinite(samples)):
        raise ValueError("samples must be finite")
    values = np.sort(samples)
    cum = np.arange(1, values.size + 1, dtype=float) / values.size
    densities, edges = np.histogram(values, bins=bins, density=True)
    return EmpiricalDistribution(values=values, cum_prob=cum,
                                 bin_edges=edges, densities=densities)


def _rng(config: SimulationConfig, drop_index: int, purpose: int, *entity) -> np.random.Generator:
    seq = np.random.SeedSequence((config.seed, drop_index, purpose) + entity)
    return np.random.default_rng(seq)


@functools.lru_cache(maxsize=4)
def _cached_import(path: str, n_ue: int, n_bs: int, n_rx: int, n_tx: int):
    return import_channels(path, n_ue, n_bs, n_rx, n_tx)


def synthesize_channels(config: SimulationConfig, layout: NetworkLayout,
                        drop_index: int) -> dict:
    """All K x J channel realizations for one drop.

    Every stochastic ingredient (link state, shadowing, cluster geometry,
    UE panel boresight) draws from its own substream keyed by (seed, drop,
    purpose, entity), so changing one model switch leaves the rest of the
    randomness untouched.
    """
    params = config.propagation()
    bs_geom = config.bs_geometry()
    ue_geom = config.ue_geometry()
    distances = link_distances(layout)
    boresights = [
        _rng(config, drop_index, _PURPOSE_BORESIGHT, k).uniform(0.0, 2.0 * np.pi)
        for k in range(config.n_ue)
    ]
    channels = {}
    for k in range(config.n_ue):
        for j in range(config.n_bs):
            d = distances[k, j]
            state = sample_link_state(d, _rng(config, drop_index, _PURPOSE_LINK_STATE, k, j),
                                      params)
            pl = path_loss_db(d, state, _rng(config, drop_index, _PURPOSE_SHADOWING, k, j),
                              params)
            clusters = sample_cluster_set(config.n_clusters, config.n_subpaths,
                                          _rng(config, drop_index, _PURPOSE_CLUSTERS, k, j),
                                          subpath_phase=config.subpath_phase)
            channels[(k, j)] = assemble_channel(clusters, bs_geom, ue_geom, pl, state,
                                                ue_boresight=boresights[k])
    return channels


def run_drop(config: SimulationConfig, drop_index: int) -> DropResult:
    """Evaluate one drop; deterministic in (config, drop_index)."""
    bs_positions = deploy_grid_bs(config.area_side, config.grid_rows, config.grid_cols,
                                  height=DEFAULT_BS_HEIGHT)
    ue_positions = deploy_uniform_ues(config.area_side, config.n_ue,
                                      _rng(config, drop_index, _PURPOSE_PLACEMENT),
                                      height=DEFAULT_UE_HEIGHT)
    layout = NetworkLayout(area_side=config.area_side, bs_positions=bs_positions,
                           ue_positions=ue_positions)
    if config.channel_source == "import":
        channels = _cached_import(str(config.channel_file), config.n_ue, config.n_bs,
                                  config.ue_rows * config.ue_cols,
                                  config.bs_rows * config.bs_cols)
    else:
        channels = synthesize_channels(config, layout, drop_index)
    powers = [config.bs_power_watts] * config.n_bs
    sigma2 = config.noise_power_watts
    evaluator = DropEvaluator(channels, powers, sigma2, config.n_streams,
                              power_norm=config.power_norm, literal=config.oim_literal)

    def utility_fn(rates):
        return network_utility(rates, kind=config.utility)

    results = []
    if config.association_scheme == "max-sinr":
        outcome = max_sinr_associate(channels, powers, config.quotas, sigma2)
        for model in config.models:
            rates, inp = evaluator.metrics(outcome.activation.beta, model)
            results.append(ModelResult(model=model, outcome=outcome, rates=rates,
                                       inp_power_dbw=inp, utility=utility_fn(rates)))
    else:
        # WCS couples association to the interference model through its
        # rate oracle, so each configured model gets its own search
        for model in config.models:
            outcome = wcs_associate(channels, powers, config.quotas,
                                    evaluator.evaluator(model), sigma2,
                                    max_iterations=config.max_iterations,
                                    utility_fn=utility_fn)
            rates, inp = evaluator.metrics(outcome.activation.beta, model)
            results.append(ModelResult(model=model, outcome=outcome, rates=rates,
                                       inp_power_dbw=inp, utility=utility_fn(rates)))
    return DropResult(drop_index=drop_index, ue_positions=ue_positions,
                      results=tuple(results))


@dataclass(frozen=True)
class CampaignResult:
    config: SimulationConfig
    drops: tuple
    distributions: dict = field(compare=False)

    def model_result(self, drop: DropResult, model: InterferenceModel) -> ModelResult:
        for res in drop.results:
            if res.model is model:
                return res
        raise KeyError(model)


def _aggregate(config: SimulationConfig, drops: Sequence[DropResult]) -> dict:
    distributions = {}
    for model in config.models:
        rates = []
        inp = []
        for drop in drops:
            res = next(r for r in drop.results if r.model is model)
            rates.append(res.rates)
            inp.append(res.inp_power_dbw[~np.isnan(res.inp_power_dbw)])
        distributions[("rate", model.value)] = empirical_cdf(np.concatenate(rates))
        distributions[("inp", model.value)] = empirical_cdf(np.concatenate(inp))
    counts = [drop.n_dropped for drop in drops]
    distributions[("dropped", None)] = empirical_cdf(counts)
    return distributions


def run_campaign(config: SimulationConfig, drop_range=None) -> CampaignResult:
    """Run all drops and aggregate the empirical distributions.

    Rate samples pool every UE of every drop (dropped UEs contribute rate
    0); interference-power samples pool served UEs only; the dropped-UE
    distribution has one count per drop. drop_range optionally restricts
    execution to a subrange of drop indices (same substreams as the full
    campaign, used for split/merge runs).
    """
    indices = range(config.drops) if drop_range is None else list(drop_range)
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            drops = tuple(pool.map(functools.partial(run_drop, config), indices,
                                   chunksize=8))
    else:
        drops = tuple(run_drop(config, i) for i in indices)
    return CampaignResult(config=config, drops=drops,
                          distributions=_aggregate(config, drops))


def merge_campaigns(parts: Sequence[CampaignResult]) -> CampaignResult:
    """Combine split campaigns (same config, disjoint drop ranges)."""
    if not parts:
        raise ValueError("nothing to merge")
    base = parts[0].config
    drops = tuple(sorted((d for part in parts for d in part.drops),
                         key=lambda d: d.drop_index))
    return CampaignResult(config=base, drops=drops,
                          distributions=_aggregate(base, drops))
