import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nlac import GridFunction, ramp_profile, read_profile, write_profile


def test_construction_validation():
    vals = np.linspace(-1.0, 1.0, 11)
    with pytest.raises(ValueError):
        GridFunction(R=-1.0, h=0.2, values=vals)
    with pytest.raises(ValueError):
        GridFunction(R=1.0, h=0.0, values=vals)
    with pytest.raises(ValueError):
        GridFunction(R=1.0, h=1.0, values=np.array([-1.0, 1.0]))
    # grid must tile the window exactly: 10 cells * 0.3 != 2
    with pytest.raises(ValueError):
        GridFunction(R=1.0, h=0.3, values=vals)
    bad = vals.copy()
    bad[3] = 1.5
    with pytest.raises(ValueError):
        GridFunction(R=1.0, h=0.2, values=bad)


def test_grid_geometry():
    g = GridFunction(R=2.0, h=0.5, values=np.zeros(9))
    assert g.n == 8
    assert g.x[0] == -2.0
    assert g.x[-1] == pytest.approx(2.0, abs=1e-15)
    assert np.allclose(np.diff(g.x), 0.5)


def test_copy_is_independent():
    g = ramp_profile(R=2.0, h=0.5)
    c = g.copy()
    c.values[0] = 0.0
    assert g.values[0] == -1.0


def test_reflection():
    vals = np.linspace(-1.0, 1.0, 9) ** 3
    g = GridFunction(R=2.0, h=0.5, values=vals)
    r = g.reflected()
    assert np.array_equal(r.values, vals[::-1])
    assert r.left_tail == g.right_tail and r.right_tail == g.left_tail

    odd = g.reflected(negate=True)
    assert np.array_equal(odd.values, -vals[::-1])
    # an odd reflection of a connection keeps the standard tails
    assert odd.left_tail == -1.0 and odd.right_tail == 1.0


@given(seed=st.integers(min_value=0, max_value=2 ** 32 - 1))
@settings(max_examples=25, deadline=None)
def test_double_reflection_is_identity(seed):
    rng = np.random.default_rng(seed)
    vals = rng.uniform(-1.0, 1.0, size=9)
    g = GridFunction(R=2.0, h=0.5, values=vals)
    for negate in (False, True):
        back = g.reflected(negate).reflected(negate)
        assert np.array_equal(back.values, g.values)
        assert back.left_tail == g.left_tail
        assert back.right_tail == g.right_tail


def test_interpolation():
    g = ramp_profile(R=4.0, h=0.5)
    # exact at the nodes, linear between them, constant tails outside
    assert np.array_equal(g.interpolate(g.x), g.values)
    assert g.interpolate(0.25) == pytest.approx(0.25, abs=1e-15)
    assert g.interpolate(-17.0) == -1.0
    assert g.interpolate(4.0 + 1e-9) == 1.0
    out = g.interpolate(np.array([-100.0, 0.0, 100.0]))
    assert np.array_equal(out, [-1.0, 0.0, 1.0])


def test_ramp_profile():
    g = ramp_profile(R=10.0, h=0.25)
    assert g.values[0] == -1.0 and g.values[-1] == 1.0
    assert np.all(np.diff(g.values) >= 0.0)
    assert g.interpolate(0.0) == 0.0
    shifted = ramp_profile(R=10.0, h=0.25, center=0.25)
    assert shifted.interpolate(0.25) == 0.0
    assert np.array_equal(shifted.values, np.clip(g.x - 0.25, -1.0, 1.0))


def test_write_read_round_trip(tmp_path):
    rng = np.random.default_rng(7)
    vals = rng.uniform(-1.0, 1.0, size=21)
    vals[0], vals[-1] = -1.0, 1.0
    g = GridFunction(R=5.0, h=0.5, values=vals,
                     left_tail=-0.75, right_tail=0.5)
    path = tmp_path / "profile.txt"
    write_profile(path, g, header_extra={"kernel": "fractional s=0.5"})

    back, header = read_profile(path)
    assert back.R == g.R and back.h == g.h
    assert back.left_tail == g.left_tail
    assert back.right_tail == g.right_tail
    # repr round-trips doubles exactly
    assert np.array_equal(back.values, g.values)
    assert header["kernel"] == "fractional s=0.5"
    assert header["columns"] == "x u"

    # writing the read-back profile reproduces the file byte for byte
    path2 = tmp_path / "profile2.txt"
    write_profile(path2, back, header_extra={"kernel": header["kernel"]})
    assert path.read_bytes() == path2.read_bytes()


def test_read_defaults_tails(tmp_path):
    path = tmp_path / "bare.txt"
    path.write_text("# R: 1.0\n# h: 1.0\n-1.0 -1.0\n0.0 0.0\n1.0 1.0\n")
    g, _ = read_profile(path)
    assert g.left_tail == -1.0 and g.right_tail == 1.0
