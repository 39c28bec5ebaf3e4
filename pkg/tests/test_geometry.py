import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jjfab import geometry as geo
from jjfab.errors import CalibrationError, ConfigError, DomainError, ShadowedPointError, ZeroAreaError

MASK = geo.MaskStack()


def _brute_rate(L, u, v, tilt_deg=0.0, n=1.0):
    # independent vector form: source on the tilted axis, wafer in its own plane
    a = math.radians(tilt_deg)
    src = np.array([L * math.sin(a), 0.0, L * math.cos(a)])
    p = np.array([u, v, 0.0])
    ray = src - p
    r = np.linalg.norm(ray)
    normal = np.array([0.0, 0.0, 1.0])
    axis = src / np.linalg.norm(src)
    cos_i = ray @ normal / r
    cos_e = ray @ axis / r
    return cos_e ** n * cos_i / r ** 2, math.degrees(math.acos(cos_i))


def test_center_flux_is_normalised():
    for tilt in (0.0, 60.0):
        f = geo.local_flux(geo.SourceGeometry(tilt_alpha_deg=tilt), (0.0, 0.0))
        assert f.relative_rate == 1.0
        assert f.incidence_angle_deg == pytest.approx(tilt, abs=1e-9)


def test_edge_flux_matches_trig_oracle():
    f = geo.local_flux(geo.SourceGeometry(), (50.0, 0.0))
    assert f.incidence_angle_deg == pytest.approx(math.degrees(math.atan(50 / 1200)), abs=1e-9)
    assert f.incidence_angle_deg == pytest.approx(2.386, abs=1e-3)
    assert f.relative_rate == pytest.approx(math.cos(math.atan(50 / 1200)) ** 4, rel=1e-12)
    assert f.relative_rate == pytest.approx(0.9965, abs=1e-4)


@given(u=st.floats(-35, 35), v=st.floats(-35, 35), tilt=st.floats(0, 70), L=st.floats(300, 3000))
@settings(max_examples=60, deadline=None)
def test_flux_against_vector_oracle(u, v, tilt, L):
    src = geo.SourceGeometry(throw_distance_mm=L, tilt_alpha_deg=tilt)
    f = geo.local_flux(src, (u, v))
    raw, inc = _brute_rate(L, u, v, tilt)
    raw0, _ = _brute_rate(L, 0.0, 0.0, tilt)
    assert f.relative_rate == pytest.approx(raw / raw0, rel=1e-9)
    assert f.incidence_angle_deg == pytest.approx(inc, abs=1e-6)


def test_point_outside_wafer_rejected():
    with pytest.raises(DomainError):
        geo.local_flux(geo.SourceGeometry(), (51.0, 0.0))


def test_source_behind_wafer_plane_raises_shadowed():
    # offset crucible that sits below the tilted wafer plane
    src = geo.SourceGeometry(throw_distance_mm=100.0, tilt_alpha_deg=80.0, source_offset_mm=(200.0, 0.0))
    with pytest.raises(ShadowedPointError):
        geo.local_flux(src, (10.0, 0.0))


def test_source_invariants():
    with pytest.raises(ConfigError):
        geo.SourceGeometry(throw_distance_mm=0)
    with pytest.raises(ConfigError):
        geo.SourceGeometry(tilt_alpha_deg=90)
    with pytest.raises(ConfigError):
        geo.SourceGeometry(emission_exponent=-1)
    with pytest.raises(ConfigError):
        geo.WaferLayout(chip_positions=((60.0, 0.0),))


def test_thickness_map_positive_and_rotation_invariant_at_normal_incidence():
    m = geo.thickness_map(geo.SourceGeometry(), geo.WaferLayout(), 2.0)
    assert np.all(m.values > 0)
    lookup = {(round(x, 6), round(y, 6)): v for x, y, v in zip(m.x_mm, m.y_mm, m.values)}
    for (x, y), v in lookup.items():
        assert lookup[(round(-y, 6) + 0.0, round(x, 6))] == pytest.approx(v, rel=1e-6)


def test_tilted_map_symmetric_about_tilt_axis():
    m = geo.thickness_map(geo.SourceGeometry(tilt_alpha_deg=60), geo.WaferLayout(), 2.0)
    lookup = {(round(x, 6), round(y, 6)): v for x, y, v in zip(m.x_mm, m.y_mm, m.values)}
    for (x, y), v in lookup.items():
        assert lookup[(x, round(-y, 6) + 0.0)] == pytest.approx(v, rel=1e-12)


def test_degenerate_grid_is_config_error():
    with pytest.raises(ConfigError):
        geo.thickness_map(geo.SourceGeometry(), geo.WaferLayout(radius_mm=1.0), 5.0)
    with pytest.raises(ConfigError):
        geo.wafer_grid(50, 0)


def test_nonuniformity_formula():
    assert geo.nonuniformity([1.0, 1.0, 1.0]) == 0.0
    assert geo.nonuniformity([0.93, 1.07]) == pytest.approx(0.07, abs=1e-12)
    with pytest.raises(DomainError):
        geo.nonuniformity([])


def test_nonuniformity_monotone_in_tilt():
    vals = [geo.nonuniformity(geo.thickness_map(geo.SourceGeometry(tilt_alpha_deg=a), geo.WaferLayout(), 1.0))
            for a in (0, 15, 30, 45, 60)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert vals[0] < vals[2] < vals[4]


def test_calibrate_throw_round_trip_and_ordering():
    L14 = geo.calibrate_throw(0.14, 60.0)
    assert 100 <= L14 <= 10000
    nu = geo.nonuniformity(geo.thickness_map(geo.SourceGeometry(L14, tilt_alpha_deg=60), geo.WaferLayout(), 1.0))
    assert abs(nu - 0.14) <= 1e-3
    assert geo.calibrate_throw(0.07, 60.0) > L14


@pytest.mark.parametrize("target", [0.02, 0.1, 0.3])
def test_calibrate_throw_round_trip_range(target):
    L = geo.calibrate_throw(target, 60.0, grid_step_mm=2.0)
    nu = geo.nonuniformity(geo.thickness_map(geo.SourceGeometry(L, tilt_alpha_deg=60), geo.WaferLayout(), 2.0))
    assert abs(nu - target) <= 1e-3


def test_calibrate_throw_unreachable():
    with pytest.raises(CalibrationError):
        geo.calibrate_throw(0.0, 60.0)
    with pytest.raises(CalibrationError, match="spans"):
        geo.calibrate_throw(0.0005, 60.0)


def test_dolan_identity_and_shift():
    assert geo.dolan_linewidth(100.0, MASK, 12.3, 12.3) == (100.0, False)
    w, dead = geo.dolan_linewidth(100.0, MASK, 1.72, 0.0)
    assert 100.0 - w == pytest.approx(600 * math.tan(math.radians(1.72)), rel=1e-12)
    assert 100.0 - w == pytest.approx(18.0, abs=0.05)
    assert not dead
    assert geo.dolan_linewidth(100.0, MASK, 20.0, 0.0) == (0.0, True)
    with pytest.raises(DomainError):
        geo.dolan_linewidth(0.0, MASK, 0.0, 0.0)


@given(a=st.floats(-30, 30), eps=st.floats(-1e-7, 1e-7))
def test_dolan_continuous(a, eps):
    w1, _ = geo.dolan_linewidth(100.0, MASK, a, 5.0)
    w2, _ = geo.dolan_linewidth(100.0, MASK, a + eps, 5.0)
    assert abs(w1 - w2) < 1e-3


def test_junction_area_examples():
    center = geo.FluxSample(0.0, 1.0, 0.0)
    assert geo.junction_area(geo.JunctionDesign(150, 200), center, center, MASK) == pytest.approx(30000)
    assert geo.junction_area(geo.JunctionDesign(150, 600), center, center, MASK) == pytest.approx(90000)
    shift = math.degrees(math.atan(18.0 / 600.0))
    edge = geo.FluxSample(shift, 1.0, shift)
    assert geo.junction_area(geo.JunctionDesign(100, 100), edge, center, MASK) == pytest.approx(8200)
    dead = geo.FluxSample(30.0, 1.0, 30.0)
    with pytest.raises(ZeroAreaError):
        geo.junction_area(geo.JunctionDesign(100, 100), dead, center, MASK)


def test_linewidth_calibration_gives_18_percent_and_symmetry():
    L = geo.calibrate_linewidth_throw(0.18, 100.0, MASK)
    m = geo.linewidth_map(geo.SourceGeometry(L), geo.WaferLayout(), 100.0, MASK, 1.0)
    assert 1 - m.values.min() / 100.0 == pytest.approx(0.18, abs=1e-9)
    lookup = {(round(x, 6), round(y, 6)): v for x, y, v in zip(m.x_mm, m.y_mm, m.values)}
    for (x, y), v in lookup.items():
        assert lookup[(round(-x, 6) + 0.0, y)] == pytest.approx(v, abs=1e-9)


def test_scalar_field_csv():
    m = geo.thickness_map(geo.SourceGeometry(), geo.WaferLayout(radius_mm=2.0), 1.0)
    text = m.to_csv("relative_thickness")
    lines = text.splitlines()
    assert lines[0] == "x_mm,y_mm,relative_thickness"
    assert len(lines) == len(m) + 1
