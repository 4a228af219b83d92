"""GEMM-to-architecture mapping and behavioral simulation.

An M x N x Q GEMM is tiled into ceil(M/K) x ceil(Q/K) result blocks.  Each
block is a length-N reduction of K x K vector outer products, split across
the C cores of a tile (P = ceil(N/C) cycles) with three accumulation levels:
parallel photocurrent summation over the C cores, capacitive integration
over T timesteps, and digital summation of the per-epoch readouts.  Blocks
round-robin over the R tiles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .catalog import CatalogVariant, DeviceKind
from .engine import EngineConfig, size_capacitor
from .quantize import (
    NoiseModel,
    adc_sample,
    adc_value,
    fake_quantize,
    inject_noise,
    minmax_params,
)

__all__ = [
    "ArchConfig",
    "GemmWorkload",
    "Schedule",
    "SimStats",
    "MODES",
    "plan",
    "cycle_count",
    "simulate_gemm",
    "engine_config_for",
]

MODES = ("ideal", "quantized", "quantized+noise", "quantized+noise+adc")


@dataclass(frozen=True)
class ArchConfig:
    """Architecture shape: R tiles x C cores x (K x K) engines."""

    r_tiles: int = 6
    c_cores: int = 6
    k: int = 32
    clock_hz: float = 5e9
    t_int: int = 60
    t_rst: int = 2
    bits_in: int = 6
    bits_out: int = 6
    share_y_modulators: bool = False
    share_readout: bool = True
    pipelined_readout: bool = True

    def __post_init__(self):
        if min(self.r_tiles, self.c_cores, self.k) < 1:
            raise ValueError("r_tiles, c_cores, k must all be >= 1")
        if self.t_int < 1 or self.t_rst < 0:
            raise ValueError("t_int must be >= 1 and t_rst >= 0")
        if self.clock_hz <= 0:
            raise ValueError("clock_hz must be > 0")

    @classmethod
    def from_dict(cls, d: dict) -> "ArchConfig":
        return cls(**d)

    def to_dict(self) -> dict:
        return {
            "r_tiles": self.r_tiles,
            "c_cores": self.c_cores,
            "k": self.k,
            "clock_hz": self.clock_hz,
            "t_int": self.t_int,
            "t_rst": self.t_rst,
            "bits_in": self.bits_in,
            "bits_out": self.bits_out,
            "share_y_modulators": self.share_y_modulators,
            "share_readout": self.share_readout,
            "pipelined_readout": self.pipelined_readout,
        }


@dataclass(frozen=True)
class GemmWorkload:
    """An M x N x Q matrix product with operands pre-normalized to [-1, 1]."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        if self.x.ndim != 2 or self.y.ndim != 2:
            raise ValueError("operands must be 2-D matrices")
        if self.x.shape[1] != self.y.shape[0]:
            raise ValueError(
                f"inner dimensions disagree: {self.x.shape} x {self.y.shape}"
            )
        if np.abs(self.x).max(initial=0.0) > 1.0 or np.abs(self.y).max(initial=0.0) > 1.0:
            raise ValueError("operands must be pre-normalized to [-1, 1]")

    @property
    def m(self) -> int:
        return self.x.shape[0]

    @property
    def n(self) -> int:
        return self.x.shape[1]

    @property
    def q(self) -> int:
        return self.y.shape[1]

    @classmethod
    def random(cls, m: int, n: int, q: int, seed: int = 0, distribution: str = "uniform") -> "GemmWorkload":
        rng = np.random.default_rng(seed)
        if distribution == "uniform":
            x = rng.uniform(-1, 1, size=(m, n))
            y = rng.uniform(-1, 1, size=(n, q))
        elif distribution == "normal":
            x = np.clip(rng.standard_normal((m, n)) / 3.0, -1, 1)
            y = np.clip(rng.standard_normal((n, q)) / 3.0, -1, 1)
        else:
            raise ValueError(f"unknown distribution {distribution!r}")
        return cls(x, y)


@dataclass(frozen=True)
class Schedule:
    """Static block-to-tile plan for one GEMM."""

    block_rows: int
    block_cols: int
    rounds: int
    p_cycles: int
    n_padded: int
    readouts_per_block: int
    assignments: tuple = field(repr=False, default=())

    @property
    def blocks(self) -> int:
        return self.block_rows * self.block_cols


@dataclass
class SimStats:
    """Run accounting emitted alongside the simulated result."""

    mode: str
    compute_cycles: int
    reset_cycles: int
    readouts: int
    saturation_events: int
    max_abs_current_a: float
    normalization_v: float
    alpha_x: float
    alpha_y: float
    schedule: Schedule

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "compute_cycles": self.compute_cycles,
            "reset_cycles": self.reset_cycles,
            "readouts": self.readouts,
            "saturation_events": self.saturation_events,
            "max_abs_current_a": self.max_abs_current_a,
            "normalization_v": self.normalization_v,
            "alpha_x": self.alpha_x,
            "alpha_y": self.alpha_y,
            "blocks": self.schedule.blocks,
            "rounds": self.schedule.rounds,
            "p_cycles": self.schedule.p_cycles,
        }


def plan(work: GemmWorkload, arch: ArchConfig) -> Schedule:
    """Tile the workload onto the architecture.

    Non-divisible dimensions are zero-padded to the next multiple of K
    (spatial) and C (reduction); padded rows and columns contribute exactly
    zero to the result.
    """
    br = math.ceil(work.m / arch.k)
    bc = math.ceil(work.q / arch.k)
    p = math.ceil(work.n / arch.c_cores)
    rounds = math.ceil(br * bc / arch.r_tiles)
    readouts_per_block = math.ceil(p / arch.t_int)
    assignments = tuple(
        ((a, b), (a * bc + b) % arch.r_tiles) for a in range(br) for b in range(bc)
    )
    return Schedule(
        block_rows=br,
        block_cols=bc,
        rounds=rounds,
        p_cycles=p,
        n_padded=p * arch.c_cores,
        readouts_per_block=readouts_per_block,
        assignments=assignments,
    )


def cycle_count(work: GemmWorkload, arch: ArchConfig) -> tuple[int, int, int]:
    """(compute_cycles, reset_cycles, readouts) for the planned schedule.

    For divisible shapes compute_cycles reduces to M*Q*N / (R*C*K^2).
    """
    sched = plan(work, arch)
    compute = sched.rounds * sched.p_cycles
    readouts = sched.blocks * sched.readouts_per_block
    reset = readouts * arch.t_rst
    return compute, reset, readouts


def engine_config_for(arch: ArchConfig, cat: CatalogVariant) -> EngineConfig:
    """Physical engine constants for this architecture and device catalog.

    Per-arm power follows the laser through the distribution loss chain; the
    integration capacitor is sized for the aggregated current of C cores so
    that full-scale operands integrate exactly to the rail.
    """
    from .costs import insertion_loss  # local import to avoid a cycle

    il = insertion_loss(arch.k, cat).total_db
    pd = cat.device(DeviceKind.PHOTODETECTOR)
    laser = cat.device(DeviceKind.LASER)
    er = cat.modulator().extinction_ratio_db
    dt = 1.0 / arch.clock_hz
    cfg = EngineConfig(
        p_arm_w=laser.power_w * 10.0 ** (-il / 10.0),
        responsivity_a_per_w=pd.responsivity_a_per_w,
        extinction_ratio_db=er,
        t_max=arch.t_int,
        t_rst=arch.t_rst,
        dt=dt,
    )
    c_int = size_capacitor(
        arch.c_cores * cfg.current_scale(), arch.t_int, arch.clock_hz, cfg.v_dd
    )
    return EngineConfig(
        p_arm_w=cfg.p_arm_w,
        responsivity_a_per_w=cfg.responsivity_a_per_w,
        extinction_ratio_db=er,
        v_dd=cfg.v_dd,
        c_int=c_int,
        t_max=arch.t_int,
        t_rst=arch.t_rst,
        dt=dt,
    )


def _pad_operands(x: np.ndarray, y: np.ndarray, work: GemmWorkload, arch: ArchConfig, sched: Schedule):
    mb, qb = sched.block_rows * arch.k, sched.block_cols * arch.k
    xp = np.zeros((mb, sched.n_padded))
    yp = np.zeros((sched.n_padded, qb))
    xp[: work.m, : work.n] = x
    yp[: work.n, : work.q] = y
    return xp, yp


def _sequential_clamp(currents: np.ndarray, scale: float, v_dd: float) -> tuple[np.ndarray, int]:
    """Clamped integration of a (..., P) current stack; returns (final v, events)."""
    v = np.zeros(currents.shape[:-1])
    events = 0
    for p in range(currents.shape[-1]):
        v = v + currents[..., p] * scale
        over = v > v_dd
        under = v < -v_dd
        events += int(over.sum() + under.sum())
        v = np.clip(v, -v_dd, v_dd)
    return v, events


def simulate_gemm(
    work: GemmWorkload,
    arch: ArchConfig,
    cat: CatalogVariant,
    nm: NoiseModel | None = None,
    mode: str = "ideal",
):
    """Run a GEMM through the behavioral engine model.

    Returns (z_hat, stats).  In ideal mode z_hat matches X @ Y to floating
    point (the end-to-end optical/electrical scale is inverted exactly);
    quantized modes apply b-bit fake quantization to both operands, noise
    modes add the multiplicative Gaussian perturbation after quantization,
    and the adc mode digitizes every integrator readout at bits_out.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; options: {MODES}")
    sched = plan(work, arch)
    cfg = engine_config_for(arch, cat)
    k, c, t_int = arch.k, arch.c_cores, arch.t_int

    x, y = work.x, work.y
    alpha_x = alpha_y = float("nan")
    if mode != "ideal":
        px = minmax_params(x, arch.bits_in)
        py = minmax_params(y, arch.bits_in)
        alpha_x, alpha_y = float(px.alpha[0]), float(py.alpha[0])
        x = fake_quantize(x, px)
        y = fake_quantize(y, py)
    if mode in ("quantized+noise", "quantized+noise+adc"):
        if nm is None:
            nm = NoiseModel()
        x = np.clip(inject_noise(x, nm, stream=0), -1.0, 1.0)
        y = np.clip(inject_noise(y, nm, stream=1), -1.0, 1.0)

    xp, yp = _pad_operands(x, y, work, arch, sched)

    # Reduction index n = (c-1)P + p: core axis first, cycle axis second.
    xr = xp.reshape(sched.block_rows, k, c, sched.p_cycles)
    yr = yp.reshape(c, sched.p_cycles, sched.block_cols, k)

    scale = cfg.current_scale()
    # Aggregated photocurrent per block, cycle, and engine: sum over cores.
    currents = scale * np.einsum("akcp,cpbl->abpkl", xr, yr)
    currents = np.moveaxis(currents, 2, -1)  # (br, bc, K, K, P)
    max_abs_current = float(np.abs(currents).max(initial=0.0))

    volt_scale = cfg.dt / cfg.c_int
    n_epochs = sched.readouts_per_block
    z_accum = np.zeros((sched.block_rows, sched.block_cols, k, k))
    saturation_events = 0
    for e in range(n_epochs):
        chunk = currents[..., e * t_int : (e + 1) * t_int]
        cum = np.cumsum(chunk, axis=-1) * volt_scale
        tol = cfg.v_dd * (1.0 + 1e-12)
        if np.abs(cum).max(initial=0.0) > tol:
            v, events = _sequential_clamp(chunk, volt_scale, cfg.v_dd)
            saturation_events += events
        else:
            v = cum[..., -1]
        if mode == "quantized+noise+adc":
            v = adc_value(adc_sample(v, cfg.v_dd, arch.bits_out), cfg.v_dd, arch.bits_out)
        z_accum += v

    norm = cfg.normalization()
    z_full = z_accum.transpose(0, 2, 1, 3).reshape(
        sched.block_rows * k, sched.block_cols * k
    ) / norm
    z_hat = z_full[: work.m, : work.q]

    if mode == "ideal" and saturation_events > 0:
        raise RuntimeError(
            "saturation in ideal mode: integrator under-provisioned for the "
            "aggregated current of C cores"
        )

    compute, reset_cycles, readouts = cycle_count(work, arch)
    stats = SimStats(
        mode=mode,
        compute_cycles=compute,
        reset_cycles=reset_cycles,
        readouts=readouts,
        saturation_events=saturation_events,
        max_abs_current_a=max_abs_current,
        normalization_v=norm,
        alpha_x=alpha_x,
        alpha_y=alpha_y,
        schedule=sched,
    )
    return z_hat, stats
