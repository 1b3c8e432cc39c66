"""Discrete mollification: bump kernels at scale eps, convolution, gradients
of mollified fields, and shift differences.

The kernel samples the standard bump phi(x) ~ exp(-1/(1 - |x|^2)) on |x| < 1,
scaled to support |x| <= eps, at cell centers, then renormalizes so the
weights sum to 1 exactly.  Because the discrete convolution is then a convex
combination, the pointwise bound

    |u(x) - (u * phi_eps)(x)| <= m(eps) * S        (S the discrete seminorm
                                                    over pairs <= eps apart)

holds with constant exactly 1, and mollifying a constant returns it.

The gradient stencil samples grad(phi_eps) at the same cell centers (not a
spectral derivative of the smoothed field), so the constant

    K1 = eps * sum_y |grad_weights(y)|

is a measured kernel property standing in for int |grad phi|; the sup bound
|grad u^eps| <= S * m(eps) * K1 / eps then holds discretely with that K1.
Two small normalizations are applied and recorded: the gradient stencil is
exactly antisymmetrized, and each axis is rescaled so its first moment
(-sum_y g_a(y) y_a dx) equals 1 exactly, which makes linear fields
differentiate exactly and keeps the stencil consistent with the unit-mass
weights on under-resolved grids.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .errors import ConfigError, DomainError, PreconditionError, ResolutionError
from .fields import Grid, SampledField


def bump(t: np.ndarray) -> np.ndarray:
    """exp(-1/(1-t^2)) on |t| < 1, zero outside (unnormalized)."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    with np.errstate(divide="ignore", over="ignore"):
        out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
    return out


def bump_grad_factor(t: np.ndarray) -> np.ndarray:
    """d/dt exp(-1/(1-t^2)) / t = -2 exp(...) / (1-t^2)^2 on |t| < 1."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    with np.errstate(divide="ignore", over="ignore"):
        out[inside] = -2.0 * np.exp(-1.0 / (1.0 - t[inside] ** 2)) \
            / (1.0 - t[inside] ** 2) ** 2
    return out


@dataclass
class MollifierKernel:
    """Discrete bump stencil at scale eps on a grid of spacing dx.

    weights has shape (2R+1,)*dim indexed by offset+R; grad_weights has an
    extra leading axis for the gradient direction.  quadrature records the
    sampling rule and the normalization factors actually applied.
    """

    eps: float
    dx: float
    dim: int
    radius_cells: int
    weights: np.ndarray
    grad_weights: np.ndarray
    k1: float
    quadrature: dict = field(default_factory=dict)
    _mult_cache: dict = field(default_factory=dict, repr=False)

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(-self.radius_cells, self.radius_cells + 1)


def make_kernel(eps: float, grid: Grid, enforce_floor: bool = True) -> MollifierKernel:
    """Build the mollifier stencil for `grid` at scale eps.

    eps must satisfy 4*dx <= eps < 1; the lower floor keeps the bump resolved
    and the recorded constants stable.  enforce_floor=False admits cruder
    kernels (down to one cell of support) for checks that rely only on the
    algebraic structure -- unit mass and shared stencils -- not on the bump
    being resolved.
    """
    dx = grid.spacing
    if eps >= 1.0:
        raise DomainError(f"eps must be < 1 (modulus domain), got {eps}")
    if enforce_floor and eps < 4.0 * dx:
        raise ResolutionError(
            f"eps = {eps:g} is below the resolution floor 4*dx = {4 * dx:g}")
    if eps < dx:
        raise ResolutionError(f"eps = {eps:g} smaller than one cell {dx:g}")
    r = int(np.floor(eps / dx + 1e-12))
    offs = np.arange(-r, r + 1)
    if grid.dim == 1:
        t = offs * dx / eps
        raw = bump(t)
        tvec = (offs * dx / eps)[None]
        radial = np.abs(t)
    else:
        ox, oy = np.meshgrid(offs, offs, indexing="ij")
        radial = np.hypot(ox, oy) * dx / eps
        raw = bump(radial)
        tvec = np.stack([ox, oy]) * dx / eps
    total = raw.sum()
    if total <= 0:
        raise ResolutionError("kernel stencil has no interior samples")
    w = raw / total
    # pin the sum to 1.0 exactly; the ulp-level correction cycles through
    # symmetric weight groups because a single target can leave the pairwise
    # summation stuck one ulp off
    center = (r,) * grid.dim
    targets = [(center,)]
    for j in range(1, r + 1):
        if grid.dim == 1:
            targets.append(((center[0] - j,), (center[0] + j,)))
        else:
            targets.append(((r - j, r), (r + j, r)))
    for i in range(64):
        s = w.sum()
        if s == 1.0:
            break
        group = targets[i % len(targets)]
        for idx in group:
            w[idx] += (1.0 - s) / len(group)
    if w.sum() != 1.0:
        raise ResolutionError("could not pin the stencil mass to 1.0 exactly")

    gfac = bump_grad_factor(radial) / total
    g = gfac[None] * tvec / eps  # sampled grad(phi_eps), weights-consistent scale
    # exact antisymmetry, then unit first moment per axis
    flip = tuple(slice(None, None, -1) for _ in range(grid.dim))
    g = 0.5 * (g - g[(slice(None),) + flip])
    moment_scale = []
    degenerate = False
    for a in range(grid.dim):
        ya = tvec[a] * eps  # physical offset along axis a
        mom = -np.sum(g[a] * ya)
        if mom <= 0:
            # a radius-1 stencil samples grad(phi) only at the support edge,
            # where it vanishes; such kernels serve identity checks that use
            # the weights alone
            if enforce_floor:
                raise ResolutionError("gradient stencil has degenerate first moment")
            degenerate = True
            break
        g[a] /= mom
        moment_scale.append(float(mom))
    if degenerate:
        g = np.zeros_like(g)
        moment_scale = [0.0] * grid.dim

    gnorm = np.sqrt(np.sum(g * g, axis=0))
    k1 = float(eps * gnorm.sum())
    quad = {
        "rule": "cell-center",
        "weight_renormalization": float(1.0 / total),
        "grad_first_moment": moment_scale,
        "degenerate_gradient": degenerate,
    }
    return MollifierKernel(eps=eps, dx=dx, dim=grid.dim, radius_cells=r,
                           weights=w, grad_weights=g, k1=k1, quadrature=quad)


def _check_compatible(f: SampledField, k: MollifierKernel):
    if f.dim != k.dim:
        raise ConfigError(f"kernel dim {k.dim} != field dim {f.dim}")
    if abs(f.spacing - k.dx) > 1e-12 * k.dx:
        raise ConfigError(
            f"kernel spacing {k.dx:g} does not match field spacing {f.spacing:g}")


def _resolve_mode(f: SampledField, mode: str) -> str:
    if mode not in ("periodic", "zero_extend"):
        raise ConfigError(f"unknown extension mode {mode!r}")
    if mode == "periodic" and not f.grid.periodic:
        raise ConfigError("periodic mode requires a periodic grid")
    if mode == "zero_extend" and f.grid.periodic:
        raise ConfigError("zero_extend mode is for box domains")
    return mode


def _stencil_multiplier(k: MollifierKernel, grid: Grid, which: str, pad: int | None):
    """rfft of the stencil embedded on the (possibly padded) grid; cached."""
    n = grid.n if pad is None else pad
    key = (which, n)
    if key in k._mult_cache:
        return k._mult_cache[key]
    shape = (n,) * k.dim
    emb = np.zeros(shape)
    r = k.radius_cells
    stn = k.weights if which == "w" else k.grad_weights[int(which)]
    idx = [(np.arange(-r, r + 1)) % n] * k.dim
    if k.dim == 1:
        emb[idx[0]] = stn
    else:
        emb[np.ix_(idx[0], idx[1])] = stn
    mult = sfft.rfftn(emb, workers=-1)
    k._mult_cache[key] = mult
    return mult


def _conv_direct(values: np.ndarray, stn: np.ndarray, r: int, periodic: bool,
                 paired: bool = False) -> np.ndarray:
    """Offset-sum convolution; paired=True exploits antisymmetric stencils
    by summing w_y (f(x-y) - f(x+y)) over y > 0 so constants map to exact 0."""
    dim = stn.ndim
    out = np.zeros_like(values, dtype=float)
    if dim == 1:
        for j in range(-r, r + 1):
            wj = stn[j + r]
            if wj == 0.0 or (paired and j <= 0):
                continue
            if paired:
                out += wj * (_shift(values, (j,), periodic)
                             - _shift(values, (-j,), periodic))
            else:
                out += wj * _shift(values, (j,), periodic)
        return out
    for a in range(-r, r + 1):
        for b in range(-r, r + 1):
            wj = stn[a + r, b + r]
            if wj == 0.0:
                continue
            if paired:
                # one representative per antipodal offset pair
                if b < 0 or (b == 0 and a <= 0):
                    continue
                out += wj * (_shift(values, (a, b), periodic)
                             - _shift(values, (-a, -b), periodic))
            else:
                out += wj * _shift(values, (a, b), periodic)
    return out


def _shift(values: np.ndarray, off: tuple, periodic: bool) -> np.ndarray:
    """Sampled f(x - off*dx): roll for periodic grids, zero-fill for boxes.
    values has a leading component axis."""
    if periodic:
        return np.roll(values, off, axis=tuple(range(1, values.ndim)))
    out = np.zeros_like(values)
    src = [slice(None)]
    dst = [slice(None)]
    for axis, o in enumerate(off, start=1):
        n = values.shape[axis]
        if o >= 0:
            dst.append(slice(o, n))
            src.append(slice(0, n - o))
        else:
            dst.append(slice(0, n + o))
            src.append(slice(-o, n))
    out[tuple(dst)] = values[tuple(src)]
    return out


def _conv_fft(values: np.ndarray, k: MollifierKernel, grid: Grid, which: str,
              periodic: bool) -> np.ndarray:
    r = k.radius_cells
    n = grid.n
    axes = tuple(range(1, values.ndim))
    if periodic:
        mult = _stencil_multiplier(k, grid, which, pad=None)
        spec = sfft.rfftn(values, axes=axes, workers=-1)
        return sfft.irfftn(spec * mult, s=(n,) * k.dim, axes=axes, workers=-1)
    pad = sfft.next_fast_len(n + 2 * r + 1)
    mult = _stencil_multiplier(k, grid, which, pad=pad)
    padded = np.zeros(values.shape[:1] + (pad,) * k.dim, dtype=values.dtype)
    padded[(slice(None),) + tuple(slice(0, n) for _ in range(k.dim))] = values
    spec = sfft.rfftn(padded, axes=axes, workers=-1)
    out = sfft.irfftn(spec * mult, s=(pad,) * k.dim, axes=axes, workers=-1)
    return out[(slice(None),) + tuple(slice(0, n) for _ in range(k.dim))]


_DIRECT_WORK_LIMIT = 2 * 10 ** 8


def _pick_method(method: str, f: SampledField, k: MollifierKernel) -> str:
    if method in ("direct", "fft"):
        return method
    if method != "auto":
        raise ConfigError(f"unknown convolution method {method!r}")
    work = f.values.size * (2 * k.radius_cells + 1) ** k.dim
    return "direct" if work <= _DIRECT_WORK_LIMIT else "fft"


def mollify(f: SampledField, k: MollifierKernel, mode: str = "periodic",
            method: str = "auto") -> SampledField:
    """(f * phi_eps) with wraparound (periodic) or zero substitution outside
    the box (zero_extend).  The fft and direct paths agree to roundoff; the
    default picks by work size."""
    _check_compatible(f, k)
    mode = _resolve_mode(f, mode)
    periodic = mode == "periodic"
    if _pick_method(method, f, k) == "fft":
        out = _conv_fft(f.values, k, f.grid, "w", periodic)
    else:
        out = _conv_direct(f.values, k.weights, k.radius_cells, periodic)
    return f.copy_with(out, divergence_free=f.divergence_free and periodic)


def grad_mollified(f: SampledField, k: MollifierKernel, mode: str = "periodic",
                   method: str = "auto") -> SampledField:
    """grad(f * phi_eps), computed by convolving f with the sampled gradient
    stencil.  Output components are ordered derivative-axis major:
    out[a*C + c] = d_a (f_c)^eps."""
    if k.quadrature.get("degenerate_gradient"):
        raise ResolutionError(
            "this kernel's gradient stencil is degenerate (radius 1); the "
            "kernel can only back identity checks on the weights")
    _check_compatible(f, k)
    mode = _resolve_mode(f, mode)
    periodic = mode == "periodic"
    pieces = []
    use_fft = _pick_method(method, f, k) == "fft"
    for a in range(k.dim):
        if use_fft:
            pieces.append(_conv_fft(f.values, k, f.grid, str(a), periodic))
        else:
            pieces.append(_conv_direct(f.values, k.grad_weights[a],
                                       k.radius_cells, periodic, paired=True))
    out = np.concatenate(pieces, axis=0)
    return SampledField(f.grid, out)


def delta_shift(f: SampledField, offset_cells, mode: str | None = None) -> SampledField:
    """delta_y f = f(x - y) - f(x) for a grid offset y = offset_cells * dx."""
    if np.isscalar(offset_cells):
        offset_cells = (int(offset_cells),)
    off = tuple(int(o) for o in offset_cells)
    if len(off) != f.dim:
        raise PreconditionError(f"offset needs {f.dim} entries, got {len(off)}")
    if any(abs(o) >= f.grid.n for o in off):
        raise PreconditionError("offset exceeds the grid")
    periodic = f.grid.periodic if mode is None else (mode == "periodic")
    shifted = _shift(f.values, off, periodic)
    return f.copy_with(shifted - f.values, divergence_free=False)
