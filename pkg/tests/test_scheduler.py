"""GEMM tiling, cycle accounting, and behavioral simulation modes."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptcsim import (
    ArchConfig,
    GemmWorkload,
    NoiseModel,
    cycle_count,
    engine_config_for,
    load_builtin_catalog,
    plan,
    simulate_gemm,
)

CAT = load_builtin_catalog("custom-sl")
SMALL = ArchConfig(r_tiles=2, c_cores=3, k=4)


class TestWorkload:
    def test_dimension_properties(self):
        w = GemmWorkload.random(3, 5, 7, seed=0)
        assert (w.m, w.n, w.q) == (3, 5, 7)

    def test_inner_dim_mismatch_rejected(self):
        with pytest.raises(ValueError, match="inner dimensions"):
            GemmWorkload(np.zeros((2, 3)), np.zeros((4, 2)))

    def test_unnormalized_operands_rejected(self):
        with pytest.raises(ValueError, match="normalized"):
            GemmWorkload(np.full((2, 2), 1.5), np.zeros((2, 2)))

    def test_non_2d_rejected(self):
        with pytest.raises(ValueError, match="2-D"):
            GemmWorkload(np.zeros(3), np.zeros((3, 2)))

    def test_random_is_seeded_and_bounded(self):
        a = GemmWorkload.random(4, 4, 4, seed=3)
        b = GemmWorkload.random(4, 4, 4, seed=3)
        assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)
        assert np.abs(a.x).max() <= 1.0
        n = GemmWorkload.random(64, 64, 64, seed=0, distribution="normal")
        assert np.abs(n.x).max() <= 1.0


class TestPlan:
    def test_ceil_tiling(self):
        w = GemmWorkload.random(9, 7, 10, seed=0)
        s = plan(w, SMALL)
        assert (s.block_rows, s.block_cols) == (3, 3)
        assert s.p_cycles == 3  # ceil(7 / 3)
        assert s.n_padded == 9
        assert s.rounds == 5  # ceil(9 blocks / 2 tiles)
        assert s.readouts_per_block == 1

    def test_round_robin_assignment(self):
        w = GemmWorkload.random(8, 3, 8, seed=0)
        s = plan(w, SMALL)
        tiles = [t for _, t in s.assignments]
        assert tiles == [0, 1, 0, 1]

    def test_epoch_split_when_reduction_exceeds_window(self):
        arch = ArchConfig(r_tiles=1, c_cores=1, k=2, t_int=4)
        w = GemmWorkload.random(2, 10, 2, seed=0)
        s = plan(w, arch)
        assert s.p_cycles == 10
        assert s.readouts_per_block == 3  # ceil(10 / 4), last epoch partial


class TestCycleCount:
    def test_divisible_closed_form(self):
        w = GemmWorkload.random(8, 12, 16, seed=1)
        compute, reset, readouts = cycle_count(w, SMALL)
        assert compute == 8 * 12 * 16 // (2 * 3 * 16)
        assert readouts == (2 * 4) * 1
        assert reset == readouts * SMALL.t_rst

    def test_zero_reset_cost(self):
        arch = ArchConfig(r_tiles=2, c_cores=3, k=4, t_rst=0)
        w = GemmWorkload.random(8, 12, 16, seed=1)
        _, reset, _ = cycle_count(w, arch)
        assert reset == 0


class TestEngineConfigFor:
    def test_capacitor_sized_for_aggregated_current(self):
        cfg = engine_config_for(SMALL, CAT)
        # Full-scale products on all C cores for T steps land on the rail.
        i_max = SMALL.c_cores * cfg.current_scale()
        ramp = i_max * SMALL.t_int * cfg.dt / cfg.c_int
        assert ramp == pytest.approx(cfg.v_dd, rel=1e-12)

    def test_clock_sets_timestep(self):
        cfg = engine_config_for(SMALL, CAT)
        assert cfg.dt == pytest.approx(1.0 / SMALL.clock_hz)


class TestSimulateIdeal:
    @settings(max_examples=25, deadline=None)
    @given(
        st.integers(1, 20), st.integers(1, 20), st.integers(1, 20),
        st.integers(0, 10_000),
    )
    def test_oracle_equivalence_property(self, m, n, q, seed):
        w = GemmWorkload.random(m, n, q, seed=seed)
        z, stats = simulate_gemm(w, SMALL, CAT, mode="ideal")
        exact = w.x @ w.y
        assert np.linalg.norm(z - exact) <= 1e-6 * max(np.linalg.norm(exact), 1e-30)
        assert stats.saturation_events == 0

    def test_padding_neutrality(self):
        # A workload whose dims are far from multiples of K and C.
        w = GemmWorkload.random(5, 7, 9, seed=2)
        z, _ = simulate_gemm(w, SMALL, CAT, mode="ideal")
        assert z.shape == (5, 9)
        assert np.allclose(z, w.x @ w.y, rtol=0, atol=1e-12)

    def test_unknown_mode_rejected(self):
        w = GemmWorkload.random(2, 2, 2, seed=0)
        with pytest.raises(ValueError, match="unknown mode"):
            simulate_gemm(w, SMALL, CAT, mode="analog")


class TestSimulateQuantized:
    def test_quantized_error_bounded_by_step_sizes(self):
        w = GemmWorkload.random(16, 12, 16, seed=4)
        z, stats = simulate_gemm(w, SMALL, CAT, mode="quantized")
        exact = w.x @ w.y
        # Worst-case linearized quantization error per output element.
        bound = w.n * (stats.alpha_x + stats.alpha_y) / 2 * 1.5
        assert np.abs(z - exact).max() <= bound

    def test_noise_mode_is_seed_deterministic(self):
        w = GemmWorkload.random(8, 6, 8, seed=5)
        nm = NoiseModel(sigma=0.01, seed=42)
        z1, _ = simulate_gemm(w, SMALL, CAT, nm=nm, mode="quantized+noise")
        z2, _ = simulate_gemm(w, SMALL, CAT, nm=nm, mode="quantized+noise")
        assert np.array_equal(z1, z2)
        z3, _ = simulate_gemm(
            w, SMALL, CAT, nm=NoiseModel(sigma=0.01, seed=43), mode="quantized+noise"
        )
        assert not np.array_equal(z1, z3)

    def test_zero_noise_collapses_to_quantized(self):
        w = GemmWorkload.random(8, 6, 8, seed=6)
        zq, _ = simulate_gemm(w, SMALL, CAT, mode="quantized")
        zn, _ = simulate_gemm(
            w, SMALL, CAT, nm=NoiseModel(sigma=0.0), mode="quantized+noise"
        )
        assert np.allclose(zq, zn, rtol=0, atol=1e-15)

    def test_adc_mode_adds_bounded_readout_error(self):
        arch = ArchConfig(r_tiles=1, c_cores=2, k=4, bits_out=8)
        w = GemmWorkload.random(4, 8, 4, seed=7)
        za, stats = simulate_gemm(
            w, arch, CAT, nm=NoiseModel(sigma=0.0), mode="quantized+noise+adc"
        )
        zq, _ = simulate_gemm(w, arch, CAT, mode="quantized")
        # One readout per block: ADC error <= half an LSB of the full scale,
        # expressed in product units via the normalization.
        cfg = engine_config_for(arch, CAT)
        lsb_products = (cfg.v_dd / 2**7) / cfg.normalization()
        assert np.abs(za - zq).max() <= lsb_products / 2 + 1e-9

    def test_stats_account_cycles(self):
        w = GemmWorkload.random(8, 12, 16, seed=8)
        _, stats = simulate_gemm(w, SMALL, CAT, mode="ideal")
        compute, reset, readouts = cycle_count(w, SMALL)
        assert (stats.compute_cycles, stats.reset_cycles, stats.readouts) == (
            compute, reset, readouts,
        )
        d = stats.to_dict()
        assert d["mode"] == "ideal" and d["blocks"] == stats.schedule.blocks
