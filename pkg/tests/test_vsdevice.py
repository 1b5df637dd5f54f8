import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dispel.errors import ConvergenceError, FitError, ParameterError, SchemaError
from dispel.vsdevice import (IVPoint, VSParams, c_inv_series, drain_current,
                             fit_iv, gate_cap_per_width, load_iv_csv,
                             load_params, save_iv_csv, save_params, tune_vt)
from conftest import mos2_params, finfet_params

PHI_T_300 = 0.025851999786435535


def test_zero_vds_zero_current():
    assert drain_current(mos2_params(), 0.6, 0.0) == 0.0


def test_table_current_against_scalar_oracle():
    # frozen value from an independent single-line evaluation of the model
    # equations (softplus charge * injection velocity * saturation factor)
    p = mos2_params(v_t0=0.2)
    i = drain_current(p, 0.7, 0.7)
    assert i == pytest.approx(2889.313390948139, rel=1e-12)


def test_subthreshold_decade_ratio():
    # one decade per 70 mV of gate underdrive at SS = 70 (DIBL off so the
    # bias points stay referenced to v_t0 itself)
    p = mos2_params(v_t0=0.2, dibl=0.0)
    ratio = drain_current(p, 0.2 - 0.14, 0.6) / drain_current(p, 0.2 - 0.07, 0.6)
    assert ratio == pytest.approx(0.1, rel=0.05)


def test_polarity_normalization():
    p = bp = mos2_params()
    pfet = replace(p, polarity="p")
    assert drain_current(pfet, -0.7, -0.7) == pytest.approx(
        drain_current(p, 0.7, 0.7), rel=1e-12)
    assert drain_current(pfet, -0.7, -0.7) > 0


def test_bias_domain_checked():
    with pytest.raises(ParameterError):
        drain_current(mos2_params(), 2.5, 0.5)


def test_invalid_params_rejected():
    with pytest.raises(ParameterError):
        VSParams(mu=-1.0)
    with pytest.raises(ParameterError):
        VSParams(ss=50.0)  # below the thermal floor
    with pytest.raises(ParameterError):
        VSParams(polarity="x")


@given(st.floats(0.05, 1.5), st.floats(0.05, 1.5), st.floats(0.01, 1.4))
@settings(max_examples=60, deadline=None)
def test_monotone_in_vgs(v1, v2, vds):
    p = mos2_params()
    lo, hi = sorted((v1, v2))
    if hi - lo < 1e-6:
        return
    assert drain_current(p, hi, vds) > drain_current(p, lo, vds)


@given(st.floats(0.0, 1.5), st.floats(0.0, 1.5), st.floats(0.1, 1.2))
@settings(max_examples=60, deadline=None)
def test_monotone_in_vds(d1, d2, vgs):
    p = mos2_params()
    lo, hi = sorted((d1, d2))
    assert drain_current(p, vgs, hi) >= drain_current(p, vgs, lo) - 1e-15


def test_c1_continuity_in_vgs():
    # central-difference derivative is consistent across step sizes
    p = mos2_params()
    for vgs in np.linspace(-0.2, 1.0, 13):
        for vds in (0.05, 0.3, 0.7):
            h1, h2 = 1e-4, 5e-5
            d1 = (drain_current(p, vgs + h1, vds) - drain_current(p, vgs - h1, vds)) / (2 * h1)
            d2 = (drain_current(p, vgs + h2, vds) - drain_current(p, vgs - h2, vds)) / (2 * h2)
            assert d1 == pytest.approx(d2, rel=1e-4, abs=1e-12)


def test_subthreshold_slope_matches_ss():
    p = mos2_params(v_t0=0.4, dibl=0.0)
    n_phi = p.n_body * p.phi_t
    top = p.v_t0 - 3 * n_phi
    vg = np.linspace(top - 0.15, top, 8)
    logi = np.log10(drain_current(p, vg, 0.6))
    slopes = np.diff(logi) / np.diff(vg)
    # 1/SS in decades per volt
    assert np.all(np.abs(slopes - 1000.0 / p.ss) / (1000.0 / p.ss) < 0.05)


class TestTuneVt:
    def test_hits_target(self):
        p = tune_vt(mos2_params(), 1.0, 0.7)
        i_off = drain_current(p, 0.0, 0.7) * 1e3  # nA/um
        assert i_off == pytest.approx(1.0, rel=1e-6)

    def test_fixed_point(self):
        p = tune_vt(mos2_params(), 1.0, 0.7)
        q = tune_vt(p, 1.0, 0.7)
        assert abs(q.v_t0 - p.v_t0) < 1e-9

    def test_halving_target_shifts_by_decade_arithmetic(self):
        p1 = tune_vt(mos2_params(), 1.0, 0.7)
        p2 = tune_vt(mos2_params(), 0.5, 0.7)
        shift_mv = (p2.v_t0 - p1.v_t0) * 1e3
        assert shift_mv == pytest.approx(70.0 * math.log10(2.0), rel=0.02)

    def test_p_type(self):
        p = tune_vt(bp := finfet_params("p"), 1.0, 0.7)
        assert drain_current(p, 0.0, -0.7) * 1e3 == pytest.approx(1.0, rel=1e-6)

    def test_bad_target(self):
        with pytest.raises(ParameterError):
            tune_vt(mos2_params(), -1.0, 0.7)

    def test_other_fields_unchanged(self):
        base = mos2_params()
        p = tune_vt(base, 1.0, 0.7)
        assert (p.v, p.mu, p.l_gate, p.c_inv, p.ss) == (base.v, base.mu, base.l_gate,
                                                        base.c_inv, base.ss)


def test_c_inv_series_large_cq_approaches_cox():
    assert c_inv_series(0.7, 1e9) == pytest.approx(4.9330474957, rel=2e-4)


def test_c_inv_series_reproduces_mos2_value():
    assert c_inv_series(0.7, 37.5) == pytest.approx(4.36, rel=2e-3)


def test_c_inv_series_symmetric_point():
    c_ox = c_inv_series(0.7, 1e12)  # ~C_OX
    assert c_inv_series(0.7, c_ox) == pytest.approx(c_ox / 2.0, rel=1e-6)


def test_gate_cap_per_width():
    assert gate_cap_per_width(mos2_params()) == pytest.approx(0.436, rel=1e-12)
    assert gate_cap_per_width(finfet_params()) == pytest.approx(0.5652, rel=1e-12)
    p = mos2_params()
    assert gate_cap_per_width(replace(p, l_gate=20.0)) == pytest.approx(
        2.0 * gate_cap_per_width(p), rel=1e-12)


def _synthesize_iv(p, n_per_axis=7):
    pts = []
    for vgs in np.linspace(0.0, 0.8, n_per_axis):
        for vds in (0.05, 0.3, 0.7):
            pts.append(IVPoint(float(vgs), float(vds), drain_current(p, vgs, vds)))
    return pts


class TestFitIv:
    FIXED = {"l_gate": 10.0, "c_inv": 4.36, "ss": 70.0}

    def test_round_trip_recovers_v_mu(self):
        truth = mos2_params(v_t0=0.3)
        res = fit_iv(_synthesize_iv(truth), self.FIXED)
        assert res.params.v == pytest.approx(truth.v, rel=0.02)
        assert res.params.mu == pytest.approx(truth.mu, rel=0.02)
        assert res.rms_rel_error < 1e-3

    def test_noisy_round_trip(self):
        truth = mos2_params(v_t0=0.3)
        rng = np.random.default_rng(7)
        pts = [IVPoint(q.v_gs, q.v_ds, q.i_d * (1.0 + 0.03 * rng.standard_normal()))
               for q in _synthesize_iv(truth)]
        res = fit_iv(pts, self.FIXED)
        assert res.params.v == pytest.approx(truth.v, rel=0.10)

    def test_degenerate_duplicated_point(self):
        pt = IVPoint(0.5, 0.5, 100.0)
        with pytest.raises(FitError):
            fit_iv([pt] * 12, self.FIXED)

    def test_too_few_points(self):
        with pytest.raises(FitError):
            fit_iv(_synthesize_iv(mos2_params())[:5], self.FIXED)

    def test_missing_fixed_key(self):
        with pytest.raises(ParameterError):
            fit_iv(_synthesize_iv(mos2_params()), {"l_gate": 10.0})


def test_params_file_round_trip(tmp_path):
    p = mos2_params(v_t0=0.31425)
    path = tmp_path / "dev.params"
    save_params(p, path)
    q = load_params(path)
    assert q == p


def test_params_file_rejects_unknown_key(tmp_path):
    path = tmp_path / "dev.params"
    save_params(mos2_params(), path)
    with open(path, "a") as fh:
        fh.write("bogus=1\n")
    with pytest.raises(SchemaError):
        load_params(path)


def test_params_file_requires_all_fields(tmp_path):
    path = tmp_path / "dev.params"
    path.write_text("polarity=n\nv=1e7\n")
    with pytest.raises(SchemaError):
        load_params(path)


def test_iv_csv_round_trip(tmp_path):
    pts = _synthesize_iv(mos2_params())[:12]
    path = tmp_path / "iv.csv"
    save_iv_csv(pts, path)
    back = load_iv_csv(path)
    assert back == pts


def test_iv_csv_header_checked(tmp_path):
    path = tmp_path / "iv.csv"
    path.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(SchemaError):
        load_iv_csv(path)
