"""Smoke test for the depthopt extension module."""

import depthopt as d


def main():
    approx = d.CameraConfig(1.0, 1.0, 1.0 / 26.0, 2.0, 2, 0.25)
    c1, c2 = approx.derived_constants()
    assert abs(c1 - 0.1) < 1e-12 and c2 == 0.5
    cfg = d.CameraConfig.from_text(
        "focal_length = 1\nbaseline = 1\nz_near = 1/26\nz_far = 2\nprecision_n = 2\nrounding_offset = 1/4\n"
    )
    assert cfg.derived_constants() == (0.1, 0.5)
    assert cfg.rounded_disparity(10) == 1.5
    assert d.zero_error_interval(10, cfg) == (-2, 2)
    assert d.shifted_interval(10, 5, cfg) == (3, 7)
    assert d.exhaustive_interval(10, -5, cfg) == d.shifted_interval(10, -5, cfg)
    table = d.allowable_table(cfg)
    assert len(table) == 256 and table[0][0] == 0

    cfg_b = d.CameraConfig.integer_pel()
    groups = d.extract_groups([30, 5, 10, 5], [0, 0, 0, 0], cfg_b)
    assert [(t, [m[0] for m in ms]) for t, ms in groups] == [(3, [2, 0])]

    a = d.PixelTables(10, 0, -1, 0, [4.0, 4.0], [1.0, 2.0])
    b = d.PixelTables(30, 0, 0, 1, [8.0, 8.0], [1.0, 3.0])
    dp = d.optimize_group([a, b], 1.0, "dp")
    bf = d.optimize_group([a, b], 1.0, "brute")
    assert dp.dv == bf.dv == [-1, 0]
    assert abs(dp.true_cost - d.group_cost([a, b], dp.dv, 1.0)) < 1e-12

    lam, rate, dist, gdv, sdv, trace = d.bisect_lambda([[a, b]], [], 3.0)
    assert rate <= 3.0 and trace
    try:
        d.bisect_lambda([[a, b]], [], 1.0)
    except d.InfeasibleBudget:
        pass
    else:
        raise AssertionError("expected InfeasibleBudget")

    base = d.CameraConfig.half_pel()
    fractions = [d.gen_scene(baseline_scale=k, seed=7).occluded_fraction(base) for k in (1, 2, 3)]
    assert fractions == sorted(fractions) and fractions[-1] > 0

    scene = d.gen_scene(width=64, height=8, baseline_scale=2.0, noise_sigma=1.0, seed=3)
    adjusted, summary = d.run_optimize(scene, base, lam=1.0)
    assert summary["group_pixels"] + summary["single_pixels"] == 64 * 8
    scaled = base.with_baseline_scale(2.0)
    assert d.synthesize_view(scene.texture, adjusted, scaled) == d.synthesize_view(scene.texture, scene.coded, scaled)

    assert d.psnr(scene.texture, scene.texture) == 100.0
    curve = [(1000.0, 30.0), (2000.0, 33.0), (4000.0, 36.0)]
    assert d.bd_rate(curve, curve) == 0.0
    assert abs(d.bd_rate(curve, [(r * 0.9, q) for r, q in curve]) + 10.0) < 0.1
    print("smoke test passed")


if __name__ == "__main__":
    main()
