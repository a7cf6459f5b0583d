import math

import pytest

from noma_rbc.core import ChannelParams, CompressionNoise, LinkGains, PowerSplit, Scheme
from noma_rbc.rates import (
    cf_clamp_active,
    gbc_rates,
    optimize_n_hat,
    rbc_cf_dpc_rates,
    rbc_cf_rates,
    rbc_df_rates,
    relay_rate_bits,
    second_rate_bits,
    serve_pair,
    sweep_region,
    uniform_alpha_grid,
)

from helpers import cf_objective, grid_optimal_cf_r2, random_ordered_setup, rng_for

# reference point: g01 = g12 = 8, g02 = 1, P0 = P1 = 10, N1 = N2 = 1, alpha = 0.2
GAINS = LinkGains(8.0, 1.0, 8.0)
PARAMS = ChannelParams(p0=10.0, p1=10.0, n1=1.0, n2=1.0)
SPLIT = PowerSplit(0.2)
TOL = 1e-12


def test_gbc_reference_values():
    pair = gbc_rates(GAINS, PARAMS, SPLIT)
    assert pair.r1 == pytest.approx(math.log2(17.0), abs=TOL)
    assert pair.r2 == pytest.approx(math.log2(11.0 / 3.0), abs=TOL)


def test_gbc_degenerate_alphas_exact():
    assert gbc_rates(GAINS, PARAMS, PowerSplit(1.0)).r2 == 0.0
    assert gbc_rates(GAINS, PARAMS, PowerSplit(0.0)).r1 == 0.0


def test_df_reference_values():
    pair = rbc_df_rates(GAINS, PARAMS, SPLIT)
    assert pair.r1 == pytest.approx(math.log2(17.0), abs=TOL)
    # min(log2(91/3), log2(81/17)) with the relay decoding bound binding
    assert pair.r2 == pytest.approx(math.log2(81.0 / 17.0), abs=TOL)
    assert math.log2(81.0 / 17.0) < math.log2(91.0 / 3.0)


def test_df_without_relay_power_equals_gbc():
    params = ChannelParams(p0=10.0, p1=0.0, n1=1.0, n2=1.0)
    for alpha in uniform_alpha_grid(41):
        split = PowerSplit(alpha)
        assert rbc_df_rates(GAINS, params, split) == gbc_rates(GAINS, params, split)


def test_df_alpha_one_r2_zero():
    assert rbc_df_rates(GAINS, PARAMS, PowerSplit(1.0)).r2 == 0.0


def test_cf_reference_values():
    pair = rbc_cf_rates(GAINS, PARAMS, SPLIT, CompressionNoise(1.0))
    assert pair.r1 == pytest.approx(math.log2(81.0 / 65.0), abs=TOL)
    # min(log2(214/6), log2(91/3) - log2(38/35)); the second argument binds
    assert pair.r2 == pytest.approx(math.log2(3185.0 / 114.0), abs=TOL)
    assert math.log2(3185.0 / 114.0) < math.log2(214.0 / 6.0)


def test_cf_alpha_zero_r1_zero():
    assert rbc_cf_rates(GAINS, PARAMS, PowerSplit(0.0), CompressionNoise(1.0)).r1 == 0.0


def test_cf_large_n_hat_recovers_gbc_r2():
    pair = rbc_cf_rates(GAINS, PARAMS, SPLIT, CompressionNoise(1e12))
    assert abs(pair.r2 - gbc_rates(GAINS, PARAMS, SPLIT).r2) <= 1e-6


def test_cf_dpc_reference_values():
    n_hat = CompressionNoise(1.0)
    pair = rbc_cf_dpc_rates(GAINS, PARAMS, SPLIT, n_hat)
    assert pair.r1 == pytest.approx(math.log2(17.0), abs=TOL)
    assert pair.r2 == rbc_cf_rates(GAINS, PARAMS, SPLIT, n_hat).r2
    assert pair.r1 == gbc_rates(GAINS, PARAMS, SPLIT).r1


def test_ordering_rejected_for_sic_schemes():
    swapped = LinkGains(1.0, 8.0, 8.0)
    with pytest.raises(ValueError, match="swap"):
        gbc_rates(swapped, PARAMS, SPLIT)
    with pytest.raises(ValueError, match="swap"):
        rbc_df_rates(swapped, PARAMS, SPLIT)
    # the CF formulas do not presuppose the ordering
    rbc_cf_rates(swapped, PARAMS, SPLIT, CompressionNoise(1.0))
    rbc_cf_dpc_rates(swapped, PARAMS, SPLIT, CompressionNoise(1.0))


def test_subsumption_and_penalty_properties():
    rng = rng_for(21)
    for _ in range(2000):
        gains, params, split = random_ordered_setup(rng)
        gbc = gbc_rates(gains, params, split)
        df = rbc_df_rates(gains, params, split)
        assert df.r1 == gbc.r1
        assert df.r2 >= gbc.r2 - 1e-12
        n_hat = CompressionNoise(float(10.0 ** rng.uniform(-2, 2)))
        cf = rbc_cf_rates(gains, params, split, n_hat)
        dpc = rbc_cf_dpc_rates(gains, params, split, n_hat)
        # transmitter pre-cancellation can only help r1 and leaves r2 alone
        assert dpc.r1 >= cf.r1
        assert dpc.r2 == cf.r2
        if gains.g01 * split.alpha_bar * params.p0 == 0.0:
            assert dpc.r1 == cf.r1
        elif gains.g01 * split.alpha * params.p0 > 0.0:
            assert dpc.r1 > cf.r1
        # without SIC at the relay user, its rate can never beat the GBC one
        assert cf.r1 <= gbc.r1 + 1e-12


def test_optimizer_dominates_fixed_point_and_gbc():
    n_hat, pair = optimize_n_hat(GAINS, PARAMS, SPLIT)
    assert pair.r2 >= rbc_cf_rates(GAINS, PARAMS, SPLIT, CompressionNoise(1.0)).r2
    assert pair.r2 >= gbc_rates(GAINS, PARAMS, SPLIT).r2 - 1e-6
    assert n_hat.n_hat > 0.0


def test_optimizer_scheme_selection():
    n_hat_cf, cf = optimize_n_hat(GAINS, PARAMS, SPLIT, Scheme.RBC_CF)
    n_hat_dpc, dpc = optimize_n_hat(GAINS, PARAMS, SPLIT, Scheme.RBC_CF_DPC)
    assert n_hat_cf == n_hat_dpc
    assert cf.r2 == dpc.r2
    assert cf.r1 == rbc_cf_rates(GAINS, PARAMS, SPLIT, n_hat_cf).r1
    assert dpc.r1 == gbc_rates(GAINS, PARAMS, SPLIT).r1
    with pytest.raises(ValueError, match="compression"):
        optimize_n_hat(GAINS, PARAMS, SPLIT, Scheme.GBC)


def test_optimizer_alpha_one_returns_zero_rate():
    _, pair = optimize_n_hat(GAINS, PARAMS, PowerSplit(1.0))
    assert pair.r2 == 0.0


def test_optimizer_matches_grid_oracle():
    rng = rng_for(33)
    for _ in range(60):
        gains, params, split = random_ordered_setup(rng)
        _, pair = optimize_n_hat(gains, params, split)
        oracle = grid_optimal_cf_r2(gains, params, split)
        assert abs(pair.r2 - oracle) <= 1e-6


def test_optimizer_handles_zero_relay_power():
    # no positive quadratic root exists; the bracketed fallback must engage
    params = ChannelParams(p0=10.0, p1=0.0, n1=1.0, n2=1.0)
    n_hat, pair = optimize_n_hat(GAINS, params, SPLIT)
    gbc_r2 = gbc_rates(GAINS, params, SPLIT).r2
    assert pair.r2 <= gbc_r2 + 1e-12
    assert pair.r2 >= gbc_r2 - 1e-6
    assert abs(pair.r2 - grid_optimal_cf_r2(GAINS, params, SPLIT)) <= 1e-6
    assert n_hat.n_hat > 0.0


def test_clamp_never_fires_at_or_above_optimum():
    rng = rng_for(55)
    for _ in range(500):
        gains, params, split = random_ordered_setup(rng)
        if split.alpha == 1.0:
            continue
        n_hat, _ = optimize_n_hat(gains, params, split)
        for factor in (1.0, 2.0, 10.0):
            assert not cf_clamp_active(
                gains, params, split, CompressionNoise(n_hat.n_hat * factor)
            )


def test_clamp_fires_for_tiny_compression_noise():
    # with no power on the relay user's message the compression loss grows
    # without bound as n_hat -> 0 and overwhelms the forwarding bound
    params = ChannelParams(p0=10.0, p1=0.0, n1=1.0, n2=1.0)
    split = PowerSplit(0.0)
    n_hat = CompressionNoise(1e-9)
    assert cf_clamp_active(GAINS, params, split, n_hat)
    assert rbc_cf_rates(GAINS, params, split, n_hat).r2 == 0.0
    assert not cf_clamp_active(GAINS, params, split, CompressionNoise(1e3))


def test_sweep_monotonicity_where_it_holds():
    rng = rng_for(77)
    grid = uniform_alpha_grid(41)
    for _ in range(50):
        gains, params, _ = random_ordered_setup(rng)
        for scheme in (Scheme.GBC, Scheme.RBC_DF):
            curve = sweep_region(scheme, gains, params, grid)
            r1s = [p.r1 for _, p in curve.points]
            r2s = [p.r2 for _, p in curve.points]
            assert all(b >= a - 1e-12 for a, b in zip(r1s, r1s[1:]))
            assert all(b <= a + 1e-12 for a, b in zip(r2s, r2s[1:]))
        for scheme in (Scheme.RBC_CF, Scheme.RBC_CF_DPC):
            curve = sweep_region(scheme, gains, params, grid)
            r1s = [p.r1 for _, p in curve.points]
            assert all(b >= a - 1e-12 for a, b in zip(r1s, r1s[1:]))


def test_cf_optimized_r2_is_not_monotone_in_alpha():
    """Regression for a dropped blanket invariant: with a strong relay link
    the optimized CF r2 rises from alpha=0 before falling, because the
    compression loss is largest at alpha=0 and shrinks as the relay user's
    own component masks the shared noise.  Values come from the independent
    brute-force grid, not the analytic optimizer."""
    lo = grid_optimal_cf_r2(GAINS, PARAMS, PowerSplit(0.0))
    hi = grid_optimal_cf_r2(GAINS, PARAMS, PowerSplit(0.02))
    assert hi > lo + 0.1
    # exact crossing at alpha=0: n_hat = 91/80, value log2(103.5125/2.1375)
    assert lo == pytest.approx(math.log2(103.5125 / 2.1375), abs=1e-9)


def test_sweep_region_shapes_and_validation():
    curve = sweep_region(Scheme.GBC, GAINS, PARAMS, [0.0, 1.0])
    assert curve.n_hats is None
    assert curve.points[0][1].r1 == 0.0
    assert curve.points[0][1].r2 == gbc_rates(GAINS, PARAMS, PowerSplit(0.0)).r2
    assert curve.points[1][1].r2 == 0.0
    assert curve.points[1][1].r1 == gbc_rates(GAINS, PARAMS, PowerSplit(1.0)).r1

    cf = sweep_region(Scheme.RBC_CF, GAINS, PARAMS, [0.1, 0.2], optimize=True)
    assert cf.n_hats is not None and len(cf.n_hats) == 2

    fixed = sweep_region(
        Scheme.RBC_CF, GAINS, PARAMS, [0.1, 0.2],
        optimize=False, n_hat=CompressionNoise(1.0),
    )
    assert all(nh.n_hat == 1.0 for nh in fixed.n_hats)

    with pytest.raises(ValueError, match="empty"):
        sweep_region(Scheme.GBC, GAINS, PARAMS, [])
    with pytest.raises(ValueError, match="increasing"):
        sweep_region(Scheme.GBC, GAINS, PARAMS, [0.5, 0.5])
    with pytest.raises(ValueError, match="increasing"):
        sweep_region(Scheme.GBC, GAINS, PARAMS, [0.5, 0.2])
    with pytest.raises(ValueError, match=r"\[0, 1\]"):
        sweep_region(Scheme.GBC, GAINS, PARAMS, [0.5, 1.5])
    with pytest.raises(ValueError, match="n_hat"):
        sweep_region(Scheme.RBC_CF, GAINS, PARAMS, [0.1, 0.2], optimize=False)


def test_df_curve_dominates_gbc_curve_pointwise():
    grid = uniform_alpha_grid(101)
    gbc = sweep_region(Scheme.GBC, GAINS, PARAMS, grid)
    df = sweep_region(Scheme.RBC_DF, GAINS, PARAMS, grid)
    for (_, g), (_, d) in zip(gbc.points, df.points):
        assert d.r1 == g.r1
        assert d.r2 >= g.r2 - 1e-12


def test_reference_setting_qualitative_ordering():
    # at alpha = 0.2: r2 ordering CF > DF > GBC, r1 ordering CF < DF = GBC = DPC
    gbc = gbc_rates(GAINS, PARAMS, SPLIT)
    df = rbc_df_rates(GAINS, PARAMS, SPLIT)
    _, cf = optimize_n_hat(GAINS, PARAMS, SPLIT, Scheme.RBC_CF)
    _, dpc = optimize_n_hat(GAINS, PARAMS, SPLIT, Scheme.RBC_CF_DPC)
    assert cf.r2 > df.r2 > gbc.r2
    assert cf.r1 < df.r1
    assert dpc.r1 == df.r1 == gbc.r1
    assert dpc.r2 == cf.r2


def test_scalar_helpers_match_typed_operations():
    g01, g02, g12 = GAINS.g01, GAINS.g02, GAINS.g12
    assert relay_rate_bits(Scheme.GBC, g01, PARAMS, SPLIT) == gbc_rates(GAINS, PARAMS, SPLIT).r1
    assert relay_rate_bits(Scheme.RBC_CF, g01, PARAMS, SPLIT) == \
        rbc_cf_rates(GAINS, PARAMS, SPLIT, CompressionNoise(1.0)).r1
    assert second_rate_bits(Scheme.GBC, g01, g02, g12, PARAMS, SPLIT) == \
        gbc_rates(GAINS, PARAMS, SPLIT).r2
    assert second_rate_bits(Scheme.RBC_DF, g01, g02, g12, PARAMS, SPLIT) == \
        rbc_df_rates(GAINS, PARAMS, SPLIT).r2

    served = serve_pair(Scheme.RBC_CF_DPC, g01, g02, g12, PARAMS, SPLIT)
    n_hat, best = optimize_n_hat(GAINS, PARAMS, SPLIT, Scheme.RBC_CF_DPC)
    assert served.r1 == best.r1
    assert served.r2 == best.r2
    assert served.n_hat == n_hat.n_hat
    assert not served.r2_clamped

    gbc_served = serve_pair(Scheme.GBC, g01, g02, 0.0, PARAMS, SPLIT)
    assert gbc_served.n_hat is None


def test_objective_transcription_agrees_with_package():
    # the test-side objective used by the grid oracle matches the package
    # closed form at scattered points (guards the oracle itself)
    rng = rng_for(91)
    for _ in range(200):
        gains, params, split = random_ordered_setup(rng)
        n_hat = float(10.0 ** rng.uniform(-6, 6))
        ours = rbc_cf_rates(gains, params, split, CompressionNoise(n_hat)).r2
        theirs = float(cf_objective(gains, params, split, n_hat))
        assert ours == pytest.approx(theirs, abs=1e-9)
