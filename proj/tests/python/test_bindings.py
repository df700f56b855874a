"""Smoke tests for the scalefit Python module."""

import json
import math

import pytest

import scalefit as sf


def test_law_evaluation_and_rescale():
    law = sf.ScalingLaw(3.13, 1.8e-8, 0.19)
    assert law(1.8e-8) == pytest.approx(4.13)
    assert law.reducible(1.8e-8) == pytest.approx(1.0)
    per_image = sf.rescale_loss(law, 192)
    assert per_image.irreducible == pytest.approx(600.96)
    assert per_image.unit == "nats-per-example"
    assert json.dumps(law.to_dict())


def test_errors_carry_a_kind():
    with pytest.raises(sf.ScalefitError) as info:
        sf.ScalingLaw(1.0, -1.0, 0.2)
    assert info.value.kind == "domain"
    with pytest.raises(ValueError):
        sf.fit_power_plus_const([1, 2, 3], [3, 2, 1])


def test_fit_recovers_parameters():
    xs = sf.log_spaced(1e-2, 1e10, 40)
    truth = sf.ScalingLaw(2.0, 1e3, 0.2)
    fit = sf.fit_power_plus_const(xs, [truth(x) for x in xs])
    assert fit.converged and fit.kind == "power-plus-constant"
    assert fit.law.irreducible == pytest.approx(2.0, rel=1e-6)
    assert fit.law.exponent == pytest.approx(0.2, rel=1e-6)
    assert fit.power is None
    assert fit.to_dict()["converged"] is True


def test_bootstrap_is_seeded():
    xs = sf.log_spaced(1e-2, 1e10, 30)
    ys = [2.0 + (1e3 / x) ** 0.2 * (1 + 0.01 * math.sin(7 * i)) for i, x in enumerate(xs)]
    opts = sf.FitOptions()
    opts.bootstrap_replicates = 50
    opts.seed = 9
    a = sf.bootstrap_ci(xs, ys, options=opts)
    b = sf.bootstrap_ci(xs, ys, options=opts)
    assert a.ci == b.ci and len(a.ci) == 3
    for (lo, hi), p in zip(a.ci, a.parameters):
        assert lo <= p <= hi


def test_frontier_pipeline_beta():
    runs = sf.preset_curves("beta07")
    frontier = sf.build_frontier(runs)
    assert len(frontier.hull) <= len(frontier.pareto)
    nopt = sf.fit_nopt(frontier)
    assert nopt.power.exponent == pytest.approx(0.70, abs=0.03)
    text = sf.write_runs(runs[:2])
    assert [r.run_id for r in sf.read_runs(text)] == [r.run_id for r in runs[:2]]


def test_derived_laws_and_consistency():
    cd = sf.tokens_compute_law(sf.PurePowerLaw(2.8e8, 0.74))
    assert 3.80 <= cd.exponent <= 3.90
    assert sf.data_scaling_exponent(0.7) == pytest.approx(0.428571, rel=1e-5)
    report = sf.consistency_check(
        sf.ScalingLaw(0.0, 72 ** -0.5, 0.2, variable="data"),
        sf.PurePowerLaw(1.0, 0.5),
        sf.ScalingLaw(0.0, 1.0, 0.2),
        flops_per_pf_day=1.0,
    )
    assert report["intersection"]["compute"] == pytest.approx(2.0, abs=1e-6)
    assert report["monotone"]


def test_information_theory():
    fit = sf.fit_log_mi([1e9, 3e12], [0.10, 0.20])
    assert fit.invert(0.20) == pytest.approx(3e12, rel=1e-9)
    assert sf.words_equivalent(8, 3.4) == pytest.approx(2.35, abs=0.01)
    ctx = sf.ContextModel(4.0, 10.0, 0.5, 1)
    assert ctx.mi() == pytest.approx(1.757, abs=1e-3)
    assert sf.mutual_info(4.0, 4.5)["negative"] is True


def test_published_cross_check():
    check = sf.cross_check_per_example("image-8x8")
    assert check["discrepancy"] is True
    assert sf.cross_check_per_example("image-16x16")["discrepancy"] is False
    assert "language" in sf.published_domains()
