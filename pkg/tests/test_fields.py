"""Synthetic field generation, projection, and the binary field format."""

import os

import numpy as np
import pytest

from hologlab import (LacunarySpec, Modulus, SampledField, divergence_max,
                      gen_lacunary, gen_smooth_random, holog_seminorm,
                      load_field, periodic_grid, project_divfree, save_field)
from hologlab.errors import DomainError, PreconditionError, ResolutionError
from hologlab.fields import bounded_pressure, box_grid


def test_lacunary_single_level_exact():
    # one level, zero phase: f(x) = 2^(-1/3) sin(2x) exactly
    g = periodic_grid(1, 256)
    spec = LacunarySpec(1.0 / 3.0, 0.0, base=2, levels=1, seed=0, phases=(0.0,))
    f = gen_lacunary(spec, g)
    expected = 2.0 ** (-1.0 / 3.0) * np.sin(2.0 * g.axis(0))
    assert np.array_equal(f.scalar(), expected)


def test_lacunary_determinism():
    g = periodic_grid(2, 256)
    spec = LacunarySpec(1.0 / 3.0, 1.0, 2, 5, seed=7)
    a = gen_lacunary(spec, g)
    b = gen_lacunary(spec, g)
    assert np.array_equal(a.values, b.values)


def test_lacunary_2d_divergence_free():
    g = periodic_grid(2, 512)
    f = gen_lacunary(LacunarySpec(1.0 / 3.0, 1.0, 2, 6, seed=3), g)
    assert f.divergence_free
    assert divergence_max(f) <= 1e-10 * f.max_abs()


def test_lacunary_resolution_errors():
    with pytest.raises(ResolutionError, match="n/4"):
        gen_lacunary(LacunarySpec(0.4, 0.0, 2, 8, seed=0), periodic_grid(1, 512))
    with pytest.raises(ResolutionError, match="Nyquist"):
        gen_lacunary(LacunarySpec(0.4, 0.0, 2, 7, seed=0), periodic_grid(2, 512))


def test_lacunary_amplitude_law_invariants():
    spec = LacunarySpec(0.4, 1.5, 2, 6, seed=0)
    a = spec.amplitudes()
    assert np.all(a > 0)
    assert np.all(np.diff(a) < 0)
    k = np.arange(1, 7)
    assert a == pytest.approx(2.0 ** (-0.4 * k) * (k * np.log(2.0)) ** (-1.5), rel=1e-14)
    with pytest.raises(DomainError):
        LacunarySpec(0.2, -3.0, 2, 8, seed=0)  # amplitudes not decreasing


def test_lacunary_saturates_class():
    # adding levels must blow up the seminorm measured in a strictly smaller
    # class (alpha + 0.1); the growth rate is b^(0.1 dK), so ten extra levels
    # give a factor 2 at base 2
    mod_tight = Modulus.holog(0.4 + 0.1, 0.0)
    g = periodic_grid(1, 2 ** 14)
    few = gen_lacunary(LacunarySpec(0.4, 0.0, 2, 2, seed=7), g)
    many = gen_lacunary(LacunarySpec(0.4, 0.0, 2, 12, seed=7), g)
    s_few = holog_seminorm(few, mod_tight).value
    s_many = holog_seminorm(many, mod_tight).value
    assert s_many >= 2.0 * s_few


def test_smooth_random_mean_zero_and_seeds():
    g = periodic_grid(2, 128)
    f = gen_smooth_random(1, 4.0, g)
    assert abs(np.mean(f.values)) <= 1e-12 * f.max_abs()
    f2 = gen_smooth_random(2, 4.0, g)
    assert not np.array_equal(f.values, f2.values)


def test_smooth_random_low_modes_agree_across_resolution():
    a = gen_smooth_random(1, 4.0, periodic_grid(2, 128))
    b = gen_smooth_random(1, 4.0, periodic_grid(2, 256))
    fa = np.fft.fft2(a.values[0]) / 128 ** 2
    fb = np.fft.fft2(b.values[0]) / 256 ** 2
    for kx, ky in [(1, 0), (3, 5), (10, -8), (0, 20)]:
        assert fa[kx % 128, ky % 128] == pytest.approx(
            fb[kx % 256, ky % 256], abs=1e-15)


def test_smooth_random_decay_precondition():
    with pytest.raises(PreconditionError):
        gen_smooth_random(0, 1.5, periodic_grid(1, 64))


def test_projection_annihilates_gradients():
    g = periodic_grid(2, 128)
    xx, yy = g.mesh()
    phi = np.sin(xx) * np.cos(2 * yy)
    grad = SampledField(g, np.stack([np.cos(xx) * np.cos(2 * yy),
                                     -2 * np.sin(xx) * np.sin(2 * yy)]))
    proj = project_divfree(grad)
    assert proj.max_abs() <= 1e-12 * grad.max_abs()


def test_projection_idempotent_and_identity_on_divfree():
    g = periodic_grid(2, 128)
    f = gen_smooth_random(5, 4.0, g, components=2)
    once = project_divfree(f)
    twice = project_divfree(once)
    assert divergence_max(once) <= 1e-10 * once.max_abs()
    assert np.max(np.abs(once.values - twice.values)) <= 1e-12 * once.max_abs()
    lac = gen_lacunary(LacunarySpec(1.0 / 3.0, 0.0, 2, 4, seed=1), g)
    plac = project_divfree(lac)
    assert np.max(np.abs(plac.values - lac.values)) <= 1e-12 * lac.max_abs()


def test_projection_arity_error():
    g = periodic_grid(2, 64)
    scalar = gen_smooth_random(0, 4.0, g)
    with pytest.raises(PreconditionError, match="components"):
        project_divfree(scalar)


def test_bounded_pressure_sup_norm_and_modes():
    g = box_grid(2, 256, -1.5, 1.5)
    p = bounded_pressure(3, g, p_max=0.7)
    assert p.max_abs() == pytest.approx(0.7, rel=1e-12)
    assert len(p.meta["modes"]) > 0
    # mode metadata reproduces the samples
    from hologlab.fields import eval_mode_sum
    re = eval_mode_sum(p.meta["modes"], g)
    assert np.max(np.abs(re - p.values[0])) <= 1e-12


def test_save_load_roundtrip(tmp_path):
    g = periodic_grid(2, 64)
    f = gen_lacunary(LacunarySpec(1.0 / 3.0, 1.0, 2, 3, seed=5), g)
    path = os.path.join(tmp_path, "f.bin")
    save_field(f, path)
    assert os.path.exists(path) and os.path.exists(path + ".json")
    back = load_field(path)
    assert np.array_equal(back.values, f.values)
    assert back.divergence_free == f.divergence_free
    assert back.grid == f.grid
    assert back.meta["spec"]["seed"] == 5


def test_save_load_box_roundtrip(tmp_path):
    g = box_grid(1, 32, -1.0, 2.0)
    f = SampledField(g, np.linspace(0, 1, 32))
    path = os.path.join(tmp_path, "b.bin")
    save_field(f, path)
    back = load_field(path)
    assert np.array_equal(back.values, f.values)
    assert not back.grid.periodic
    assert back.grid.lower == (-1.0,)
