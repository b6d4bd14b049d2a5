"""Configuration-driven Monte Carlo experiment runner.

Configs are plain mappings (typically loaded from YAML); every field has a
default, so the empty mapping runs the reference preset: a 256-antenna
30 GHz array, 4 users with 6 paths each, 4 subcarriers, half-rate pilots,
10 dB SNR, and 10 distances spanning 0.05 to 1.2 times the Rayleigh
distance. See ExperimentConfig.from_dict for the schema.

Outputs are CSV rows ``x,method,mean_db,stderr_db,trials`` where x is a
distance in meters or an SNR in dB and mean_db is a mean NMSE in dB (or a
spectral efficiency in bits/s/Hz for the SE sweep). Runs are byte-for-byte
deterministic in (config, seed).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .channel import (
    ArrayConfig,
    ClusterSpec,
    PathParam,
    SubcarrierGrid,
    rayleigh_distance,
    synthesize_channel,
    synthesize_matrix_channel,
)
from .dictionaries import (
    DEFAULT_POLAR_BETA,
    DEFAULT_POLAR_R_MIN,
    BlockPartition,
    build_angular_dictionary,
    build_polar_dictionary,
)
from .errors import ConfigurationError
from .partition import complete_bdcs
from .precoding import MatrixChannel, block_sparse_precoding, optimal_precoder, spectral_efficiency
from .recovery import RecoveryConfig, SideInformation, bsomp, ls_estimate, nmse
from .sensing import make_pilot_matrix, measurement_matrix, observe

VALID_METHODS = ("ls", "somp_polar", "bsomp_angular", "bsomp_polar", "complete_bdcs")

DEFAULT_RAYLEIGH_FRACS = (0.05, 0.07, 0.1, 0.15, 0.25, 0.4, 0.6, 0.8, 1.0, 1.2)


@dataclass(frozen=True)
class ChannelSettings:
    num_users: int = 4
    paths_per_user: int = 6
    angle_spread: float = 0.05
    distance_spread_frac: float = 0.1
    power_decay_rate: float = 0.5
    angle_range: tuple = (-0.866, 0.866)  # 120 degree sector


@dataclass(frozen=True)
class DictionarySettings:
    oversampling: int = 1
    block_length: int = 4
    beta: float = DEFAULT_POLAR_BETA
    r_min: float = DEFAULT_POLAR_R_MIN


@dataclass(frozen=True)
class RecoverySettings:
    max_blocks: int = 4
    residual_tolerance: Optional[float] = 0.0  # None: sqrt(1/(1+snr)) per SNR point


@dataclass(frozen=True)
class SideInfoSettings:
    temporal_gain: float = 0.0
    temporal_width: float = 1.0
    decay_floor: Optional[float] = None


@dataclass(frozen=True)
class PrecodingSettings:
    num_rx_antennas: int = 4
    num_streams: int = 2
    num_rf_chains: int = 4


@dataclass(frozen=True)
class PartitionSettings:
    eta: float = 0.95
    trials: int = 64


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a sweep needs; see from_dict for the file schema."""

    array: ArrayConfig = field(default_factory=lambda: ArrayConfig(256, 30e9))
    subcarrier_count: int = 4
    subcarrier_spacing: float = 240e3
    channel: ChannelSettings = field(default_factory=ChannelSettings)
    pilot_fraction: float = 0.5
    snr_db: tuple = (10.0,)
    distances: tuple = ()  # filled from rayleigh fractions when empty
    rayleigh_fracs: tuple = DEFAULT_RAYLEIGH_FRACS
    methods: tuple = VALID_METHODS
    trials: int = 100
    seed: int = 20260501
    dictionary: DictionarySettings = field(default_factory=DictionarySettings)
    recovery: RecoverySettings = field(default_factory=RecoverySettings)
    side_information: SideInfoSettings = field(default_factory=SideInfoSettings)
    precoding: PrecodingSettings = field(default_factory=PrecodingSettings)
    output: Optional[str] = None

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigurationError("trials must be at least 1")
        if len(self.methods) == 0:
            raise ConfigurationError("methods must not be empty")
        for m in self.methods:
            if m not in VALID_METHODS:
                raise ConfigurationError(
                    f"unknown method {m!r}; valid methods: {', '.join(VALID_METHODS)}"
                )
        if len(self.snr_db) and not all(np.isfinite(s) or np.isposinf(s) for s in self.snr_db):
            raise ConfigurationError("snr_db entries must be finite or +inf")

    @property
    def distance_grid(self) -> tuple:
        if self.distances:
            grid = tuple(float(r) for r in self.distances)
        else:
            rd = rayleigh_distance(self.array)
            grid = tuple(f * rd for f in self.rayleigh_fracs)
        if any(r <= 0 or np.isinf(r) for r in grid):
            raise ConfigurationError("distances must lie in (0, inf)")
        return grid

    @property
    def pilot_count(self) -> int:
        return max(1, round(self.pilot_fraction * self.array.num_antennas))

    @classmethod
    def from_dict(cls, raw: Optional[dict]) -> "ExperimentConfig":
        """Build a config from a nested mapping (the YAML schema).

        Sections and keys, all optional:
          array:      num_antennas, carrier_freq_hz, element_spacing_m
          subcarriers: count, spacing_hz
          channel:    num_users, paths_per_user, angle_spread,
                      distance_spread_frac, power_decay_rate, angle_range
          pilot:      fraction
          snr_db:     list of dB values
          distances:  explicit list of meters   (overrides rayleigh_fracs)
          rayleigh_fracs: list of fractions of the Rayleigh distance
          methods:    subset of ls|somp_polar|bsomp_angular|bsomp_polar|complete_bdcs
          trials, seed, output
          dictionary: oversampling, block_length, beta, r_min_m
          recovery:   max_blocks, residual_tolerance (null = SNR-matched)
          side_information: temporal_gain, temporal_width, decay_floor
          precoding:  num_rx_antennas, num_streams, num_rf_chains
          partition:  eta, trials
        """
        raw = dict(raw or {})
        arr = dict(raw.get("array") or {})
        sub = dict(raw.get("subcarriers") or {})
        array = ArrayConfig(
            int(arr.get("num_antennas", 256)),
            float(arr.get("carrier_freq_hz", 30e9)),
            arr.get("element_spacing_m"),
        )
        chan = dict(raw.get("channel") or {})
        channel = ChannelSettings(
            num_users=int(chan.get("num_users", 4)),
            paths_per_user=int(chan.get("paths_per_user", 6)),
            angle_spread=float(chan.get("angle_spread", 0.05)),
            distance_spread_frac=float(chan.get("distance_spread_frac", 0.1)),
            power_decay_rate=float(chan.get("power_decay_rate", 0.5)),
            angle_range=tuple(chan.get("angle_range", (-0.866, 0.866))),
        )
        dic = dict(raw.get("dictionary") or {})
        dictionary = DictionarySettings(
            oversampling=int(dic.get("oversampling", 1)),
            block_length=int(dic.get("block_length", 4)),
            beta=float(dic.get("beta", DEFAULT_POLAR_BETA)),
            r_min=float(dic.get("r_min_m", DEFAULT_POLAR_R_MIN)),
        )
        rec = dict(raw.get("recovery") or {})
        tol = rec.get("residual_tolerance", 0.0)
        recovery = RecoverySettings(
            max_blocks=int(rec.get("max_blocks", 4)),
            residual_tolerance=None if tol is None else float(tol),
        )
        si = dict(raw.get("side_information") or {})
        decay = si.get("decay_floor", None)
        side_information = SideInfoSettings(
            temporal_gain=float(si.get("temporal_gain", 0.0)),
            temporal_width=float(si.get("temporal_width", 1.0)),
            decay_floor=None if decay is None else float(decay),
        )
        pre = dict(raw.get("precoding") or {})
        precoding = PrecodingSettings(
            num_rx_antennas=int(pre.get("num_rx_antennas", 4)),
            num_streams=int(pre.get("num_streams", 2)),
            num_rf_chains=int(pre.get("num_rf_chains", 4)),
        )
        snr = raw.get("snr_db", (10.0,))
        if isinstance(snr, (int, float)):
            snr = (snr,)
        return cls(
            array=array,
            subcarrier_count=int(sub.get("count", 4)),
            subcarrier_spacing=float(sub.get("spacing_hz", 240e3)),
            channel=channel,
            pilot_fraction=float(dict(raw.get("pilot") or {}).get("fraction", 0.5)),
            snr_db=tuple(float(s) for s in snr),
            distances=tuple(float(r) for r in raw.get("distances", ())),
            rayleigh_fracs=tuple(float(f) for f in raw.get("rayleigh_fracs", DEFAULT_RAYLEIGH_FRACS)),
            methods=tuple(raw.get("methods", VALID_METHODS)),
            trials=int(raw.get("trials", 100)),
            seed=int(raw.get("seed", 20260501)),
            dictionary=dictionary,
            recovery=recovery,
            side_information=side_information,
            precoding=precoding,
            output=raw.get("output"),
        )

    def partition_settings(self, raw: Optional[dict] = None) -> PartitionSettings:
        part = dict(raw or {})
        return PartitionSettings(
            eta=float(part.get("eta", 0.95)), trials=int(part.get("trials", 64))
        )


@dataclass(frozen=True)
class CurvePoint:
    """One aggregated cell of a sweep: x is meters or dB depending on the run."""

    x: float
    method: str
    mean_db: float
    stderr_db: float
    trials: int


def write_curve_csv(points: Sequence[CurvePoint], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "method", "mean_db", "stderr_db", "trials"])
        for p in points:
            writer.writerow(
                [f"{p.x:.10g}", p.method, f"{p.mean_db:.6f}", f"{p.stderr_db:.6f}", p.trials]
            )


def _child_seed(*keys: int) -> int:
    return int(np.random.SeedSequence(tuple(int(k) for k in keys)).generate_state(1)[0])


class _Workbench:
    """Per-config context: pilot, dictionaries, and measurement matrices,
    built once and shared across every trial."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.array = cfg.array
        self.grid = SubcarrierGrid(cfg.subcarrier_count, cfg.array.carrier_freq, cfg.subcarrier_spacing)
        self.pilot = make_pilot_matrix(cfg.pilot_count, cfg.array.num_antennas, _child_seed(cfg.seed, 0))
        self.angular = build_angular_dictionary(
            cfg.array, cfg.dictionary.oversampling, cfg.dictionary.block_length
        )
        self.polar = build_polar_dictionary(
            cfg.array, cfg.dictionary.beta, cfg.dictionary.r_min, cfg.dictionary.block_length
        )
        self.mm_angular = measurement_matrix(self.pilot, self.angular)
        self.mm_polar = measurement_matrix(self.pilot, self.polar)
        self.polar_atom_partition = BlockPartition.uniform(self.polar.num_atoms, 1)
        si = cfg.side_information
        if si.temporal_gain > 0 or si.decay_floor is not None:
            self.si = SideInformation((), si.temporal_gain, si.temporal_width, si.decay_floor)
        else:
            self.si = None

    def residual_tolerance(self, snr_db: float) -> float:
        tol = self.cfg.recovery.residual_tolerance
        if tol is not None:
            return tol
        if np.isinf(snr_db):
            return 0.0
        # stop near the expected noise floor of the relative residual
        rho = 10.0 ** (snr_db / 10.0)
        return float(np.sqrt(1.0 / (1.0 + rho)))

    def draw_channel(self, distance: float, d_idx: int, trial: int, user: int):
        cfg = self.cfg
        rng = np.random.default_rng(_child_seed(cfg.seed, 1, d_idx, trial, user))
        angle = rng.uniform(*cfg.channel.angle_range)
        cluster = ClusterSpec(
            center_angle=float(angle),
            center_distance=distance,
            angle_spread=cfg.channel.angle_spread,
            distance_spread=cfg.channel.distance_spread_frac * distance,
            subpath_count=cfg.channel.paths_per_user,
            power_decay_rate=cfg.channel.power_decay_rate,
        )
        return synthesize_channel(
            self.array, [cluster], self.grid, _child_seed(cfg.seed, 2, d_idx, trial, user)
        )

    def estimate(self, method: str, obs, snr_db: float) -> np.ndarray:
        tol = self.residual_tolerance(snr_db)
        blocks = self.cfg.recovery.max_blocks
        if method == "ls":
            return ls_estimate(self.pilot, obs)
        if method == "somp_polar":
            cfg = RecoveryConfig(
                blocks * self.cfg.dictionary.block_length, tol, self.polar_atom_partition
            )
            return bsomp(self.mm_polar, obs, cfg, self.si).reconstructed_channels
        if method == "bsomp_angular":
            return bsomp(self.mm_angular, obs, RecoveryConfig(blocks, tol), self.si).reconstructed_channels
        if method == "bsomp_polar":
            return bsomp(self.mm_polar, obs, RecoveryConfig(blocks, tol), self.si).reconstructed_channels
        if method == "complete_bdcs":
            result = complete_bdcs(
                obs,
                self.mm_angular,
                self.mm_polar,
                RecoveryConfig(blocks, tol),
                routing="by_residual",
                si=self.si,
            )
            return result.reconstructed_channels
        raise ConfigurationError(f"unknown method {method!r}")


def _sweep(cfg: ExperimentConfig, xs, make_obs, out_path) -> list:
    """Shared aggregation loop: per x and method, mean/stderr of per-trial NMSE
    in dB (each trial averages its users)."""
    bench = _Workbench(cfg)
    points: list = []
    for x_idx, x in enumerate(xs):
        samples = {m: np.empty(cfg.trials) for m in cfg.methods}
        for trial in range(cfg.trials):
            per_user = {m: [] for m in cfg.methods}
            for user in range(cfg.channel.num_users):
                channel, obs, snr_db = make_obs(bench, x_idx, x, trial, user)
                truth = channel.per_subcarrier_channels
                for m in cfg.methods:
                    per_user[m].append(nmse(bench.estimate(m, obs, snr_db), truth))
            for m in cfg.methods:
                samples[m][trial] = float(np.mean(per_user[m]))
        for m in cfg.methods:
            vals = samples[m]
            stderr = float(vals.std(ddof=1) / np.sqrt(cfg.trials)) if cfg.trials > 1 else 0.0
            points.append(CurvePoint(float(x), m, float(vals.mean()), stderr, cfg.trials))
    if out_path:
        write_curve_csv(points, out_path)
    return points


def run_nmse_vs_distance(cfg: ExperimentConfig, out_path: Optional[str] = None) -> list:
    """NMSE of every configured method across the distance grid, at the first
    configured SNR. Writes CSV when a path is given (argument or config)."""
    snr_db = cfg.snr_db[0] if cfg.snr_db else 10.0

    def make_obs(bench, d_idx, distance, trial, user):
        channel = bench.draw_channel(distance, d_idx, trial, user)
        obs = observe(
            bench.pilot, channel, snr_db, _child_seed(cfg.seed, 3, d_idx, trial, user)
        )
        return channel, obs, snr_db

    return _sweep(cfg, cfg.distance_grid, make_obs, out_path or cfg.output)


def run_nmse_vs_snr(cfg: ExperimentConfig, out_path: Optional[str] = None) -> list:
    """NMSE versus SNR at the first configured distance."""
    if len(cfg.snr_db) == 0:
        raise ConfigurationError("snr_db must not be empty for an SNR sweep")
    distance = cfg.distance_grid[0]

    def make_obs(bench, s_idx, snr_db, trial, user):
        channel = bench.draw_channel(distance, s_idx, trial, user)
        obs = observe(
            bench.pilot, channel, snr_db, _child_seed(cfg.seed, 3, s_idx, trial, user)
        )
        return channel, obs, snr_db

    return _sweep(cfg, cfg.snr_db, make_obs, out_path or cfg.output)


def run_se_vs_snr(cfg: ExperimentConfig, out_path: Optional[str] = None) -> list:
    """Spectral efficiency of the SVD precoder and its hybrid approximations
    (angular and polar dictionaries) versus SNR, single link at the first
    configured distance. mean_db carries bits/s/Hz here."""
    if len(cfg.snr_db) == 0:
        raise ConfigurationError("snr_db must not be empty for an SNR sweep")
    pre = cfg.precoding
    distance = cfg.distance_grid[0]
    bench = _Workbench(cfg)
    rx_array = ArrayConfig(pre.num_rx_antennas, cfg.array.carrier_freq)

    labels = ("optimal", "hybrid_angular", "hybrid_polar")
    points: list = []
    for s_idx, snr_db in enumerate(cfg.snr_db):
        values = {name: np.empty(cfg.trials) for name in labels}
        for trial in range(cfg.trials):
            rng = np.random.default_rng(_child_seed(cfg.seed, 4, s_idx, trial))
            paths = []
            rx_angles = []
            for _ in range(cfg.channel.paths_per_user):
                r = distance * (1.0 + cfg.channel.distance_spread_frac * rng.uniform(-1, 1))
                gain = (rng.standard_normal() + 1j * rng.standard_normal()) / np.sqrt(2)
                paths.append(PathParam(float(rng.uniform(*cfg.channel.angle_range)), float(r), complex(gain)))
                rx_angles.append(float(rng.uniform(-1, 1)))
            channel = MatrixChannel(
                synthesize_matrix_channel(cfg.array, rx_array, paths, rx_angles)
            )
            f_opt = optimal_precoder(channel, pre.num_streams)
            values["optimal"][trial] = spectral_efficiency(channel, f_opt, snr_db, "optimal").spectral_efficiency
            for name, dictionary in (("hybrid_angular", bench.angular), ("hybrid_polar", bench.polar)):
                pair = block_sparse_precoding(f_opt, dictionary, pre.num_rf_chains)
                values[name][trial] = spectral_efficiency(channel, pair, snr_db, name).spectral_efficiency
        for name in labels:
            vals = values[name]
            stderr = float(vals.std(ddof=1) / np.sqrt(cfg.trials)) if cfg.trials > 1 else 0.0
            points.append(CurvePoint(float(snr_db), name, float(vals.mean()), stderr, cfg.trials))
    if out_path or cfg.output:
        write_curve_csv(points, out_path or cfg.output)
    return points
