"""Release acceptance suite: one test per pinned criterion.

Each test prints a single PASS line with the measured values after its
assertions, so the -v log doubles as a sign-off checklist.  Tolerances are
pinned here and are not to be loosened without a ledger entry.
"""

import time
from dataclasses import replace

import numpy as np
import pytest

from ptcsim import (
    ArchConfig,
    DeviceSpec,
    EngineConfig,
    FieldPair,
    GemmWorkload,
    MlpConfig,
    NoiseModel,
    QuantizerParams,
    TinyMlp,
    area_estimate,
    balanced_detect,
    cycle_count,
    engine_transfer,
    evaluate,
    fake_quantize,
    inject_noise,
    load_builtin_catalog,
    make_blobs,
    metrics,
    min_laser_power,
    mzm_encode,
    power_estimate,
    quantize_grad_ste,
    robustness_table,
    simulate_gemm,
    size_capacitor,
    train,
)

CUSTOM = load_builtin_catalog("custom-sl")
FOUNDRY = load_builtin_catalog("foundry")
ARCH = ArchConfig()  # 6 x 6 tiles/cores, K=32, 5 GHz, T=60


def test_criterion_01_laser_power_anchor():
    pd = DeviceSpec(
        kind="photodetector",
        name="anchor_pd",
        power_w=0.0,
        area_um2=320.0,
        responsivity_a_per_w=1.0,
        sensitivity_dbm=-27.0,
        dark_current_a=20e-9,
    )
    p_mw = min_laser_power(20.0, pd, er_db=10.0, bits_out=6) * 1e3
    assert p_mw == pytest.approx(14.2, abs=0.05)
    print(f"\nPASS criterion 1: laser power anchor = {p_mw:.3f} mW (14.2 +- 0.05)")


def test_criterion_02_capacitor_anchor():
    c_ff = size_capacitor(110e-6, 60, 5e9, 0.24) * 1e15
    assert c_ff == 5500.0
    print(f"\nPASS criterion 2: integration capacitor anchor = {c_ff:.1f} fF (5500 exact)")


def test_criterion_03_peak_and_derated_speed():
    tops_peak, _, _ = metrics(ARCH, area_mm2=1.0, power_w=1.0, convention="peak")
    tops_der, _, _ = metrics(ARCH, area_mm2=1.0, power_w=1.0, convention="reset_derated")
    assert tops_peak == pytest.approx(368.64, abs=1e-9)
    assert tops_der == pytest.approx(356.75, abs=0.01)
    print(
        f"\nPASS criterion 3: peak speed = {tops_peak:.2f} TOPS (368.64), "
        f"reset-derated = {tops_der:.2f} TOPS (356.75 +- 0.01)"
    )


def test_criterion_04_headline_costs_custom_sl_with_memory():
    area = area_estimate(ARCH, CUSTOM, include_memory=True)
    power = power_estimate(ARCH, CUSTOM, include_memory=True)
    total_area = sum(area.values())
    total_power = sum(power.values())
    dac_share = power["dac"] / total_power
    tops, tpw, tpmm2 = metrics(ARCH, total_area, total_power, "peak")
    assert total_area == pytest.approx(321.0, rel=0.10)
    assert total_power == pytest.approx(17.5, rel=0.20)
    assert abs(dac_share - 0.76) <= 0.08
    assert 20.0 <= tpw <= 24.0
    assert 1.0 <= tpmm2 <= 1.3
    print(
        f"\nPASS criterion 4: area = {total_area:.1f} mm^2 (321 +- 10%), "
        f"power = {total_power:.2f} W (17.5 +- 20%), DAC share = {dac_share:.1%} "
        f"(76% +- 8 pts), {tpw:.2f} TOPS/W in [20, 24], "
        f"{tpmm2:.3f} TOPS/mm^2 in [1.0, 1.3]"
    )


def test_criterion_05_variant_ratios_memory_excluded():
    area_ratio = sum(area_estimate(ARCH, FOUNDRY).values()) / sum(
        area_estimate(ARCH, CUSTOM).values()
    )
    power_ratio = sum(power_estimate(ARCH, FOUNDRY).values()) / sum(
        power_estimate(ARCH, CUSTOM).values()
    )
    assert area_ratio == pytest.approx(6.8, rel=0.15)
    assert power_ratio == pytest.approx(9.1, rel=0.15)
    print(
        f"\nPASS criterion 5: foundry/custom area ratio = {area_ratio:.2f}x "
        f"(6.8x +- 15%), power ratio = {power_ratio:.2f}x (9.1x +- 15%)"
    )


def test_criterion_06_integration_window_sweep():
    p1 = power_estimate(replace(ARCH, t_int=1), CUSTOM)
    p60 = power_estimate(replace(ARCH, t_int=60), CUSTOM)
    total1, total60 = sum(p1.values()), sum(p60.values())
    share = (p60["adc"] + p60["tia"]) / total60
    assert share < 0.05
    assert total1 == pytest.approx(68.0, rel=0.20)
    assert total60 == pytest.approx(16.0, rel=0.20)
    print(
        f"\nPASS criterion 6: ADC+TIA share at T=60 = {share:.2%} (< 5%), "
        f"power {total1:.1f} W at T=1 (68 +- 20%) -> {total60:.1f} W at T=60 "
        f"(16 +- 20%)"
    )


def test_criterion_07_oracle_gemm_equivalence():
    shapes = [(1, 1, 2), (2, 3, 4), (3, 3, 8)]
    rng = np.random.default_rng(7)
    worst = 0.0
    n_cases = 0
    for r, c, k in shapes:
        arch = ArchConfig(r_tiles=r, c_cores=c, k=k)
        while n_cases < 100 * (shapes.index((r, c, k)) + 1) // len(shapes) + 1:
            m, n, q = (int(v) for v in rng.integers(1, 65, 3))
            work = GemmWorkload.random(m, n, q, seed=n_cases)
            z_hat, _ = simulate_gemm(work, arch, CUSTOM, mode="ideal")
            exact = work.x @ work.y
            err = np.linalg.norm(z_hat - exact) / max(np.linalg.norm(exact), 1e-30)
            worst = max(worst, err)
            n_cases += 1
    assert n_cases >= 100
    assert worst < 1e-6
    print(
        f"\nPASS criterion 7: {n_cases} random GEMMs, worst ideal-mode relative "
        f"Frobenius error = {worst:.2e} (< 1e-6)"
    )


def test_criterion_08_photocurrent_identity_and_energy_conservation():
    rng = np.random.default_rng(8)
    cfg = EngineConfig(p_arm_w=2e-3, responsivity_a_per_w=1.1)
    amp = np.sqrt(cfg.p_arm_w)
    scale = cfg.current_scale()
    worst_current = worst_energy = 0.0
    for x, y in rng.uniform(-1, 1, size=(10_000, 2)):
        fields = FieldPair(mzm_encode(x, amp), mzm_encode(y, amp))
        out_fields = engine_transfer(fields)
        out = balanced_detect(out_fields, cfg.responsivity_a_per_w)
        expected = scale * x * y
        denom = max(abs(expected), scale)
        worst_current = max(worst_current, abs(out.i_out - expected) / denom)
        p_in = abs(fields.e1) ** 2 + abs(fields.e2) ** 2
        p_out = abs(out_fields.e1) ** 2 + abs(out_fields.e2) ** 2
        worst_energy = max(
            worst_energy, abs(p_in - p_out) / max(p_in, cfg.p_arm_w)
        )
    assert worst_current < 1e-12
    assert worst_energy < 1e-12
    print(
        f"\nPASS criterion 8: 10^4 samples, photocurrent identity error = "
        f"{worst_current:.2e}, energy conservation error = {worst_energy:.2e} "
        f"(both < 1e-12)"
    )


def test_criterion_09_quantizer_properties():
    rng = np.random.default_rng(9)
    # Idempotence, exact.
    p = QuantizerParams(bits=6, alpha=np.array([0.03]), zero_point=np.array([0.0]))
    x = rng.uniform(-2, 2, size=256)
    once = fake_quantize(x, p)
    assert np.array_equal(fake_quantize(once, p), once)

    # grad_alpha vs central finite differences on 32-element tensors.
    worst_fd = 0.0
    for trial in range(20):
        alpha = 0.05 + 0.1 * rng.random()
        p = QuantizerParams(bits=4, alpha=np.array([alpha]), zero_point=np.array([0.0]))
        x = rng.uniform(-1.5, 1.5, size=32)
        # Keep samples away from rounding discontinuities so the finite
        # difference measures the smooth branch of the derivative.
        v = x / alpha
        mask = np.abs(v - np.round(v)) < 0.45
        x = np.where(mask, x, np.round(v) * alpha)
        upstream = rng.standard_normal(32)
        _, ga = quantize_grad_ste(upstream, x, p)
        h = 1e-6
        p_hi = QuantizerParams(bits=4, alpha=np.array([alpha + h]), zero_point=np.array([0.0]))
        p_lo = QuantizerParams(bits=4, alpha=np.array([alpha - h]), zero_point=np.array([0.0]))
        fd = (
            (upstream * fake_quantize(x, p_hi)).sum()
            - (upstream * fake_quantize(x, p_lo)).sum()
        ) / (2 * h)
        worst_fd = max(worst_fd, abs(ga[0] - fd) / max(abs(fd), 1e-12))
    assert worst_fd < 1e-4

    # Noise std within 1% of sigma * |x_q| over 1e6 samples.
    nm = NoiseModel(sigma=0.1, seed=3)
    x_q = np.full(1_000_000, 0.5)
    noisy = inject_noise(x_q, nm)
    measured = float((noisy - x_q).std())
    expected = 0.1 * 0.5
    assert abs(measured - expected) / expected < 0.01
    print(
        f"\nPASS criterion 9: idempotence exact, grad_alpha vs central FD rel "
        f"err = {worst_fd:.2e} (< 1e-4), noise std {measured:.5f} vs "
        f"{expected:.5f} within 1%"
    )


def test_criterion_10_cycle_count_formula():
    rng = np.random.default_rng(10)
    cases = 0
    while cases < 50:
        r = int(rng.integers(1, 5))
        c = int(rng.integers(1, 5))
        k = int(rng.choice([2, 4, 8]))
        arch = ArchConfig(r_tiles=r, c_cores=c, k=k)
        # Divisible dimensions: M, Q multiples of K with M*Q/K^2 a multiple
        # of R; N a multiple of C.
        m = k * r * int(rng.integers(1, 4))
        q = k * int(rng.integers(1, 4))
        n = c * int(rng.integers(1, 6))
        work = GemmWorkload.random(m, n, q, seed=cases)
        compute, _, _ = cycle_count(work, arch)
        assert compute == m * q * n // (r * c * k**2), (m, n, q, r, c, k)
        cases += 1
    print(
        f"\nPASS criterion 10: compute_cycles = MQN/(RCK^2) exact on {cases} "
        f"divisible cases"
    )


def test_criterion_11_scaling_exponents():
    ks = [8, 16, 32, 64]
    areas, powers = [], []
    for k in ks:
        arch = replace(ARCH, k=k)
        areas.append(sum(area_estimate(arch, CUSTOM).values()))
        powers.append(sum(power_estimate(arch, CUSTOM).values()))
    area_slope = np.polyfit(np.log(ks), np.log(areas), 1)[0]
    power_slope = np.polyfit(np.log(ks), np.log(powers), 1)[0]
    assert area_slope == pytest.approx(2.0, abs=0.2)
    assert power_slope == pytest.approx(1.0, abs=0.2)
    print(
        f"\nPASS criterion 11: log-log K in {{8..64}} area slope = "
        f"{area_slope:.2f} (2 +- 0.2), power slope = {power_slope:.2f} (1 +- 0.2)"
    )


def test_criterion_12_noise_aware_mlp_robustness():
    t0 = time.time()
    cfg = MlpConfig()  # noise-aware: train_sigma = 0.0031
    train_x, train_y = make_blobs(512, cfg.layer_sizes[0], cfg.layer_sizes[-1], seed=0)
    model = TinyMlp(cfg)
    train(model, train_x, train_y)
    test_x, test_y = make_blobs(256, cfg.layer_sizes[0], cfg.layer_sizes[-1], seed=100)
    assert evaluate(model, test_x, test_y) > 0.8, "training sanity check"
    arch = ArchConfig(r_tiles=2, c_cores=3, k=8)
    rows = robustness_table(
        model, test_x, test_y, arch, CUSTOM, sigmas=[0.0, 0.0031, 0.08], n_seeds=5
    )
    acc0, acc_chip, acc_hi = (r["mean_accuracy"] for r in rows)
    assert acc0 - acc_hi <= 0.03
    assert acc0 - acc_chip <= 0.005
    elapsed = time.time() - t0
    assert elapsed < 300
    print(
        f"\nPASS criterion 12: accuracy {acc0:.3f} (s=0) -> {acc_chip:.3f} "
        f"(s=0.0031, drop {acc0 - acc_chip:.3f} <= 0.005) -> {acc_hi:.3f} "
        f"(s=0.08, drop {acc0 - acc_hi:.3f} <= 0.03), 5 seeds, {elapsed:.1f} s"
    )
