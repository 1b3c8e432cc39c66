"""Commutator decomposition, energy flux, null flux, and the envelope."""

import numpy as np
import pytest

from hologlab import (LacunarySpec, Modulus, SampledField, gen_lacunary,
                      gen_smooth_random, holog_seminorm, make_kernel, mollify,
                      periodic_grid, project_divfree)
from hologlab.commutator import cet_decomposition, energy_flux, flux_bound
from hologlab.errors import DomainError, PreconditionError


@pytest.fixture(scope="module")
def divfree_field():
    g = periodic_grid(2, 128)
    return project_divfree(gen_smooth_random(2, 3.0, g, components=2))


def test_cet_identity_exact(divfree_field):
    u = divfree_field
    for eps in (0.05, 0.1, 0.2):
        k = make_kernel(eps, u.grid, enforce_floor=False)
        lhs, convex, anchor = cet_decomposition(u, k)
        resid = np.max(np.abs(lhs - (convex - anchor)))
        assert resid <= 1e-12 * u.max_abs() ** 2


def test_cet_constant_field_zero():
    g = periodic_grid(2, 64)
    u = SampledField(g, np.stack([np.full((64, 64), 1.5),
                                  np.full((64, 64), -0.7)]),
                     divergence_free=True)
    k = make_kernel(0.4, g)
    lhs, convex, anchor = cet_decomposition(u, k)
    for t in (lhs, convex, anchor):
        assert np.max(np.abs(t)) <= 1e-14


def test_cet_single_mode_closed_form():
    # u = (sin x, 0): the smoothed tensor has the exact per-mode attenuation
    g = periodic_grid(2, 128)
    xx, _ = g.mesh()
    u = SampledField(g, np.stack([np.sin(xx), np.zeros_like(xx)]),
                     divergence_free=True)
    k = make_kernel(0.2, g)
    r = k.radius_cells
    offs = np.arange(-r, r + 1) * g.spacing
    att = lambda m: float(np.sum(k.weights * np.cos(m * offs)[:, None]))
    lhs, _, _ = cet_decomposition(u, k)
    lhs11_exact = 0.5 * (1.0 - att(2) * np.cos(2 * xx)) - (att(1) * np.sin(xx)) ** 2
    assert np.max(np.abs(lhs[0, 0] - lhs11_exact)) <= 1e-10


def test_cet_arity_error():
    g = periodic_grid(2, 64)
    scalar = gen_smooth_random(0, 4.0, g)
    k = make_kernel(0.4, g)
    with pytest.raises(PreconditionError, match="vector"):
        cet_decomposition(scalar, k)


def test_flux_requires_divfree_flag():
    g = periodic_grid(2, 64)
    u = gen_smooth_random(1, 4.0, g, components=2)  # not projected
    k = make_kernel(0.4, g)
    with pytest.raises(PreconditionError, match="divergence_free"):
        energy_flux(u, k)


def test_flux_constant_zero():
    g = periodic_grid(2, 64)
    u = SampledField(g, np.ones((2, 64, 64)), divergence_free=True)
    fs = energy_flux(u, make_kernel(0.4, g))
    assert fs.flux == 0.0
    assert fs.null_flux == 0.0


def test_flux_taylor_green_against_direct_quadrature():
    # direct-summation smoothing path + spectral gradient as the oracle
    import scipy.fft as sfft
    g = periodic_grid(2, 256)
    xx, yy = g.mesh()
    u = SampledField(g, np.stack([-np.cos(xx) * np.sin(yy),
                                  np.sin(xx) * np.cos(yy)]),
                     divergence_free=True)
    k = make_kernel(0.1, g)
    fs = energy_flux(u, k)
    um = mollify(u, k, method="direct").values
    n = g.n
    kv = sfft.fftfreq(n, 1.0 / n)
    grad = np.empty((2, 2, n, n))
    for c in range(2):
        sm = sfft.rfftn(um[c])
        grad[0, c] = sfft.irfftn(1j * kv[:, None] * sm, s=(n, n))
        grad[1, c] = sfft.irfftn(1j * kv[None, : n // 2 + 1] * sm, s=(n, n))
    uum = np.stack([[mollify(SampledField(g, (u.values[i] * u.values[j])[None]),
                             k, method="direct").values[0]
                     for j in range(2)] for i in range(2)])
    oracle = float(np.mean(np.einsum("ijxy,ijxy->xy", uum, grad)))
    # stationary cellular flow: the flux is zero to quadrature noise, so the
    # comparison is absolute at the integrand scale
    scale = np.max(np.abs(uum)) * np.max(np.abs(grad))
    assert abs(fs.flux - oracle) <= 1e-10 * scale
    assert abs(fs.flux) <= 1e-12 * scale


def test_flux_oracle_on_active_field():
    import scipy.fft as sfft
    g = periodic_grid(2, 128)
    u = project_divfree(gen_smooth_random(9, 2.5, g, components=2))
    k = make_kernel(0.2, g)
    fs = energy_flux(u, k)
    um = mollify(u, k, method="direct").values
    n = g.n
    kv = sfft.fftfreq(n, 1.0 / n)
    grad = np.empty((2, 2, n, n))
    for c in range(2):
        sm = sfft.rfftn(um[c])
        grad[0, c] = sfft.irfftn(1j * kv[:, None] * sm, s=(n, n))
        grad[1, c] = sfft.irfftn(1j * kv[None, : n // 2 + 1] * sm, s=(n, n))
    uum = np.stack([[mollify(SampledField(g, (u.values[i] * u.values[j])[None]),
                             k, method="direct").values[0]
                     for j in range(2)] for i in range(2)])
    oracle = float(np.mean(np.einsum("ijxy,ijxy->xy", uum, grad)))
    assert fs.flux == pytest.approx(oracle, rel=1e-10)


def test_null_flux_lacunary():
    g = periodic_grid(2, 512)
    u = gen_lacunary(LacunarySpec(1.0 / 3.0, 1.0, 2, 6, seed=4), g)
    k = make_kernel(0.1, g)
    fs = energy_flux(u, k)
    um = mollify(u, k).values
    scale = np.max(np.abs(um)) ** 2 * 50.0  # generous gradient scale
    assert abs(fs.null_flux) <= 1e-8 * scale


def test_flux_cubic_scaling():
    g = periodic_grid(2, 128)
    u = gen_lacunary(LacunarySpec(0.4, 0.0, 2, 4, seed=8), g)
    k = make_kernel(0.2, g)
    base = energy_flux(u, k).flux
    for c in (2.0, -3.0):
        scaled = energy_flux(u.copy_with(c * u.values), k).flux
        assert scaled == pytest.approx(c ** 3 * base, rel=1e-12)


def test_flux_bound_values():
    mod0 = Modulus.holog(1.0 / 3.0, 0.0)
    assert flux_bound(1.0, mod0, 0.3, 1.0) == pytest.approx(2.0, rel=1e-13)
    mod1 = Modulus.holog(0.5, 0.0)
    assert flux_bound(1.0, mod1, 0.01, 1.0) == pytest.approx(0.2, rel=1e-13)
    # eps = e^-4 with lambda=1: the log factor cubed contributes 4^-3
    mod2 = Modulus.holog(1.0 / 3.0, 1.0, s_max=0.5)
    eps = np.exp(-4.0)
    expected = 2.0 * (1.0 / 64.0)
    assert flux_bound(1.0, mod2, eps, 1.0) == pytest.approx(expected, rel=1e-13)
    with pytest.raises(DomainError):
        flux_bound(1.0, mod0, 0.6, 1.0)  # above s_max


def test_flux_below_bound_on_sweep():
    g = periodic_grid(2, 512)
    mod = Modulus.holog(0.4, 0.0)
    u = gen_lacunary(LacunarySpec(0.4, 0.0, 2, 6, seed=12), g)
    s_val = holog_seminorm(u, mod).value
    for eps in (0.4, 0.2, 0.1, 0.05):
        k = make_kernel(eps, g, enforce_floor=False)
        fs = energy_flux(u, k, mod=mod, seminorm=s_val)
        assert abs(fs.flux) <= fs.bound
        assert fs.residual_identity <= 1e-10 * u.max_abs() ** 2
