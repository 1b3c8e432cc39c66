"""Synthetic sampled fields: grids, lacunary rough fields, smooth random
fields, Leray projection, and a flat binary save/load format.

Grid conventions
----------------
Periodic grids cover [0, 2*pi)^dim with nodes x_i = i*dx (endpoint excluded).
Box grids are cell-centered: x_i = lower + (i + 1/2)*dx with dx = side/n, so
no node sits on the box edge and Riemann sums use weight dx^dim.

Vector fields store their samples as values[c, i] (1-D) or values[c, i, j]
(2-D) with axis order (x, y); scalar fields use components == 1.

The lacunary generator realizes a prescribed modulus of continuity
omega(s) * s^alpha through the amplitude law

    a_k = b**(-alpha*k) * (k*ln b)**(-lam),

so that at separation s ~ b**-k the dominant level contributes ~ a_k, i.e.
~ s^alpha * (log 1/s)^(-lam).  Phases come from numpy's PCG64 generator
(seeded), which is the pinned pseudo-random source for every stochastic
object in this package.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, PreconditionError, ResolutionError

TWO_PI = 2.0 * np.pi

# Pinned pseudo-random source; recorded in saved sidecars so outputs are
# reproducible across versions of this package.
RNG_NAME = "numpy-PCG64"


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class Grid:
    """Uniform grid, periodic torus or cell-centered box, n points per axis."""

    dim: int
    n: int
    lower: tuple[float, ...] = ()
    upper: tuple[float, ...] = ()
    periodic: bool = True

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise DomainError(f"dim must be 1 or 2, got {self.dim}")
        if self.n < 2:
            raise DomainError(f"grid needs >= 2 points per axis, got {self.n}")
        if not self.lower:
            object.__setattr__(self, "lower", (0.0,) * self.dim)
            object.__setattr__(self, "upper", (TWO_PI,) * self.dim)
        if len(self.lower) != self.dim or len(self.upper) != self.dim:
            raise DomainError("domain bounds must have one entry per axis")
        sides = [u - l for l, u in zip(self.lower, self.upper)]
        if any(s <= 0 for s in sides):
            raise DomainError("upper corner must exceed lower corner")
        if max(sides) - min(sides) > 1e-12 * max(sides):
            raise DomainError("only square domains are supported")

    @property
    def side(self) -> float:
        return self.upper[0] - self.lower[0]

    @property
    def spacing(self) -> float:
        return self.side / self.n

    @property
    def volume(self) -> float:
        return self.side ** self.dim

    def axis(self, a: int = 0) -> np.ndarray:
        dx = self.spacing
        offs = 0.0 if self.periodic else 0.5
        return self.lower[a] + (np.arange(self.n) + offs) * dx

    def mesh(self) -> tuple[np.ndarray, ...]:
        axes = [self.axis(a) for a in range(self.dim)]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim


def periodic_grid(dim: int, n: int) -> Grid:
    return Grid(dim=dim, n=n)


def box_grid(dim: int, n: int, lower: float, upper: float) -> Grid:
    return Grid(dim=dim, n=n, lower=(lower,) * dim, upper=(upper,) * dim,
                periodic=False)


@dataclass
class SampledField:
    """Scalar or vector field sampled on a uniform grid.

    values has shape (components,) + grid.shape.  A field flagged
    divergence_free promises a spectral divergence of at most
    1e-10 * max|u| (only meaningful on periodic grids).
    """

    grid: Grid
    values: np.ndarray
    divergence_free: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.ndim == self.grid.dim:
            self.values = self.values[None]
        expected = self.grid.shape
        if self.values.shape[1:] != expected:
            raise PreconditionError(
                f"values shape {self.values.shape} does not match grid {expected}")
        if not np.all(np.isfinite(self.values)):
            raise PreconditionError("field values must be finite")

    @property
    def dim(self) -> int:
        return self.grid.dim

    @property
    def components(self) -> int:
        return self.values.shape[0]

    @property
    def spacing(self) -> float:
        return self.grid.spacing

    def component(self, c: int) -> np.ndarray:
        return self.values[c]

    def scalar(self) -> np.ndarray:
        if self.components != 1:
            raise PreconditionError("scalar() requires a single-component field")
        return self.values[0]

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def copy_with(self, values: np.ndarray, divergence_free: bool | None = None) -> "SampledField":
        dv = self.divergence_free if divergence_free is None else divergence_free
        return SampledField(self.grid, values, divergence_free=dv, meta=dict(self.meta))


@dataclass(frozen=True)
class LacunarySpec:
    """Parameters of the lacunary construction.

    Invariants checked at construction: b >= 2, K >= 1, amplitudes positive
    and (for alpha > 0) strictly decreasing.  Resolution of the top mode
    (b**K <= n/4) is checked against the grid at generation time.
    """

    alpha: float
    lam: float
    base: int = 2
    levels: int = 8
    seed: int = 0
    phases: tuple[float, ...] | None = None

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise DomainError(f"alpha must lie in [0,1), got {self.alpha}")
        if self.base < 2:
            raise DomainError(f"base must be >= 2, got {self.base}")
        if self.levels < 1:
            raise DomainError(f"levels must be >= 1, got {self.levels}")
        amps = self.amplitudes()
        if np.any(amps <= 0):
            raise DomainError("amplitude law produced nonpositive a_k")
        if self.alpha > 0 and np.any(np.diff(amps) >= 0):
            raise DomainError("amplitudes must decrease in k for alpha > 0")

    def amplitudes(self) -> np.ndarray:
        k = np.arange(1, self.levels + 1, dtype=float)
        return self.base ** (-self.alpha * k) * (k * np.log(self.base)) ** (-self.lam)

    def draw_phases(self) -> np.ndarray:
        if self.phases is not None:
            if len(self.phases) != self.levels:
                raise PreconditionError("phase override must supply one phase per level")
            return np.asarray(self.phases, dtype=float)
        return _rng(self.seed).uniform(0.0, TWO_PI, size=self.levels)


def _check_resolved(spec: LacunarySpec, grid: Grid):
    top = spec.base ** spec.levels
    if top > grid.n / 4:
        raise ResolutionError(
            f"top mode b^K = {top} unresolved on n = {grid.n} grid "
            f"(need b^K <= n/4 = {grid.n / 4:g})")
    if grid.dim == 2 and 2 * top >= grid.n / 2:
        # the triad's C-wave component is 2 b^K and must stay below Nyquist
        raise ResolutionError(
            f"triad component 2*b^K = {2 * top} reaches Nyquist on n = {grid.n} "
            f"grid (need 2*b^K < n/2)")


def gen_lacunary(spec: LacunarySpec, grid: Grid) -> SampledField:
    """Deterministic lacunary field saturating the (alpha, lam) class.

    1-D: scalar  f(x) = sum_k a_k sin(b^k x + phi_k).
    2-D: divergence-free velocity built, per level, from the exact scalene
         triad m_A = (b^k, 0), m_B = (b^k, 2 b^k), m_C = m_A + m_B: each
         wavevector m carries the plane wave a(|m|) cos(m . x + phi) *
         m_perp/|m|, with a(r) = r**(-alpha) (ln r)**(-lam) the amplitude
         law read at the actual radius.  The triad geometry is deliberate: a
         lacunary sum without exact triads has identically vanishing energy
         flux (no resonant interactions), and a mirror-symmetric triad at
         equal radii still cancels because the smoothing weighs its opposite
         channels identically.  The C-wave phase sits in quadrature with
         phi_A + phi_B (the triple-correlation coupling is proportional to
         sin(phi_A + phi_B - phi_C)), keeping one sign across levels.  All
         waves are exact grid modes, so the field is divergence-free to
         roundoff and flagged accordingly.
    """
    if not grid.periodic:
        raise PreconditionError("gen_lacunary requires a periodic grid")
    _check_resolved(spec, grid)
    amps = spec.amplitudes()
    phases = spec.draw_phases()
    if grid.dim == 1:
        x = grid.axis(0)
        f = np.zeros(grid.n)
        for k in range(spec.levels):
            f += amps[k] * np.sin(spec.base ** (k + 1) * x + phases[k])
        out = SampledField(grid, f)
    else:
        gen = _rng(spec.seed + 1)
        phases_b = gen.uniform(0.0, TWO_PI, size=spec.levels)

        def amp_law(radius: float) -> float:
            return radius ** (-spec.alpha) * np.log(radius) ** (-spec.lam)

        xx, yy = grid.mesh()
        u = np.zeros((2,) + grid.shape)
        for k in range(spec.levels):
            bk = spec.base ** (k + 1)
            m_a, m_b, m_c = (bk, 0), (bk, 2 * bk), (2 * bk, 2 * bk)
            waves = [(m_a, phases[k]),
                     (m_b, phases_b[k]),
                     (m_c, phases[k] + phases_b[k] - 0.5 * np.pi)]
            for m, phi in waves:
                mnorm = float(np.hypot(*m))
                amp = amp_law(mnorm)
                prof = (amp / mnorm) * np.cos(m[0] * xx + m[1] * yy + phi)
                u[0] += m[1] * prof
                u[1] -= m[0] * prof
        out = SampledField(grid, u, divergence_free=True)
    out.meta["spec"] = {
        "kind": "lacunary", "alpha": spec.alpha, "lam": spec.lam,
        "base": spec.base, "levels": spec.levels, "seed": spec.seed,
        "rng": RNG_NAME,
    }
    return out


def _canonical_modes(nmax: int, dim: int) -> list[tuple[int, ...]]:
    """Integer modes (half-spectrum) ordered by max-norm shell then
    lexicographically.

    The ordering makes coarse-grid draws a prefix of fine-grid draws, so low
    modes agree across resolutions for a fixed seed.
    """
    modes = []
    if dim == 1:
        return [(k,) for k in range(1, nmax + 1)]
    for r in range(1, nmax + 1):
        shell = []
        for kx in range(-r, r + 1):
            for ky in range(-r, r + 1):
                if max(abs(kx), abs(ky)) != r:
                    continue
                if kx > 0 or (kx == 0 and ky > 0):
                    shell.append((kx, ky))
        modes.extend(sorted(shell))
    return modes


def gen_smooth_random(seed: int, decay_rate: float, grid: Grid,
                      components: int = 1, max_shell: int | None = None) -> SampledField:
    """Random-phase spectrum with amplitude |k|^(-decay_rate), mean zero.

    decay_rate > dim/2 + 1 guarantees the field is smooth at grid scale.
    Mode coefficients are a pure function of (seed, component, mode), drawn
    in a resolution-independent order, so low modes agree across grid sizes.
    """
    if decay_rate <= grid.dim / 2 + 1:
        raise PreconditionError(
            f"decay_rate must exceed dim/2 + 1 = {grid.dim / 2 + 1}, got {decay_rate}")
    if not grid.periodic:
        raise PreconditionError("gen_smooth_random requires a periodic grid")
    n = grid.n
    nmax = n // 2 - 1 if max_shell is None else min(max_shell, n // 2 - 1)
    modes = _canonical_modes(nmax, grid.dim)
    out = np.zeros((components,) + grid.shape)
    for c in range(components):
        gen = _rng(seed * 1009 + c)
        spec = np.zeros(grid.shape, dtype=complex)
        for kv in modes:
            amp = float(sum(k * k for k in kv)) ** (-decay_rate / 2.0)
            phase = gen.uniform(0.0, TWO_PI)
            coef = 0.5 * amp * np.exp(1j * phase)
            idx = tuple(k % n for k in kv)
            conj_idx = tuple((-k) % n for k in kv)
            spec[idx] = coef
            spec[conj_idx] = np.conj(coef)
        out[c] = np.real(np.fft.ifftn(spec)) * n ** grid.dim
    fld = SampledField(grid, out)
    fld.meta["spec"] = {"kind": "smooth_random", "decay_rate": decay_rate,
                        "seed": seed, "components": components, "rng": RNG_NAME}
    return fld


def bounded_pressure(seed: int, grid: Grid, p_max: float = 1.0,
                     decay_rate: float = 4.0, max_shell: int = 3) -> SampledField:
    """Smooth scalar pressure stand-in rescaled to sup-norm exactly p_max.

    A short random-phase trigonometric sum (shells up to max_shell) of the
    rescaled coordinates, so it stays cheap to evaluate on any grid; only the
    sup-norm of this field enters the estimates that consume it.  The mode
    list is recorded in meta["modes"] as (kx, ky, amplitude, phase) rows to
    allow re-evaluation off the grid.
    """
    modes = _canonical_modes(max_shell, grid.dim)
    gen = _rng(seed * 2027)
    rows = []
    for kv in modes:
        amp = float(sum(k * k for k in kv)) ** (-decay_rate / 2.0)
        phase = gen.uniform(0.0, TWO_PI)
        rows.append(tuple(kv) + (amp, phase))
    vals = eval_mode_sum(rows, grid)
    scale = p_max / np.max(np.abs(vals))
    rows = [r[:-2] + (r[-2] * scale, r[-1]) for r in rows]
    fld = SampledField(grid, (vals * scale)[None])
    fld.meta["spec"] = {"kind": "pressure", "seed": seed, "p_max": p_max,
                        "decay_rate": decay_rate, "rng": RNG_NAME}
    fld.meta["modes"] = rows
    fld.meta["grid_map"] = {"lower": grid.lower, "side": grid.side}
    return fld


def eval_mode_sum(rows: list[tuple], grid: Grid,
                  points: np.ndarray | None = None) -> np.ndarray:
    """Evaluate sum_k amp*cos(k . q + phase) with q the torus-mapped
    coordinates of the grid (or of explicit points, shape (m, dim))."""
    if points is None:
        axes = [TWO_PI * (grid.axis(a) - grid.lower[a]) / grid.side
                for a in range(grid.dim)]
        coords = np.meshgrid(*axes, indexing="ij") if grid.dim == 2 else [axes[0]]
    else:
        coords = [TWO_PI * (points[:, a] - grid.lower[a]) / grid.side
                  for a in range(grid.dim)]
    out = np.zeros_like(coords[0])
    for row in rows:
        kv, amp, phase = row[:-2], row[-2], row[-1]
        arg = phase + sum(k * q for k, q in zip(kv, coords))
        out += amp * np.cos(arg)
    return out


def _wavenumbers(grid: Grid) -> list[np.ndarray]:
    k = np.fft.fftfreq(grid.n, d=1.0 / grid.n) * (TWO_PI / grid.side)
    return [k] * grid.dim


def divergence_max(f: SampledField) -> float:
    """Max-norm of the spectral divergence (periodic vector fields)."""
    if not f.grid.periodic:
        raise PreconditionError("spectral divergence needs a periodic grid")
    if f.components != f.dim:
        raise PreconditionError("divergence needs components == dim")
    ks = _wavenumbers(f.grid)
    if f.dim == 1:
        div = np.fft.ifft(1j * ks[0] * np.fft.fft(f.values[0]))
    else:
        kx = ks[0][:, None]
        ky = ks[1][None, :]
        div = np.fft.ifft2(1j * kx * np.fft.fft2(f.values[0])
                           + 1j * ky * np.fft.fft2(f.values[1]))
    return float(np.max(np.abs(np.real(div))))


def project_divfree(f: SampledField) -> SampledField:
    """Spectral Leray projection: remove the gradient part mode by mode."""
    if f.components != f.dim:
        raise PreconditionError(
            f"Leray projection needs components == dim, got {f.components} != {f.dim}")
    if not f.grid.periodic:
        raise PreconditionError("Leray projection requires a periodic grid")
    if f.dim == 1:
        # in 1-D every divergence-free periodic field is constant
        mean = np.mean(f.values[0])
        return f.copy_with(np.full_like(f.values, mean), divergence_free=True)
    kx = _wavenumbers(f.grid)[0][:, None]
    ky = _wavenumbers(f.grid)[1][None, :]
    k2 = kx * kx + ky * ky
    k2safe = np.where(k2 == 0, 1.0, k2)
    uh = np.fft.fft2(f.values[0])
    vh = np.fft.fft2(f.values[1])
    kdotu = (kx * uh + ky * vh) / k2safe
    kdotu[0, 0] = 0.0
    uh -= kx * kdotu
    vh -= ky * kdotu
    vals = np.stack([np.real(np.fft.ifft2(uh)), np.real(np.fft.ifft2(vh))])
    return f.copy_with(vals, divergence_free=True)


# ---------------------------------------------------------------------------
# Flat binary save/load: header of IEEE-754 little-endian doubles
# [dim, components, grid_n, lower..., upper...], then row-major doubles.
# A JSON sidecar (<path>.json) carries periodicity, flags and the generating
# spec; both files together define the format.

def save_field(f: SampledField, path: str) -> None:
    g = f.grid
    header = [float(g.dim), float(f.components), float(g.n)]
    header += [float(v) for v in g.lower] + [float(v) for v in g.upper]
    with open(path, "wb") as fh:
        fh.write(struct.pack("<%dd" % len(header), *header))
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())
    sidecar = {
        "domain": "periodic" if g.periodic else "box",
        "divergence_free": bool(f.divergence_free),
        "spec": f.meta.get("spec", {}),
    }
    with open(path + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_field(path: str) -> SampledField:
    with open(path + ".json") as fh:
        sidecar = json.load(fh)
    with open(path, "rb") as fh:
        dim, components, n = struct.unpack("<3d", fh.read(24))
        dim, components, n = int(dim), int(components), int(n)
        lower = struct.unpack("<%dd" % dim, fh.read(8 * dim))
        upper = struct.unpack("<%dd" % dim, fh.read(8 * dim))
        payload = np.frombuffer(fh.read(), dtype="<f8")
    grid = Grid(dim=dim, n=n, lower=lower, upper=upper,
                periodic=sidecar["domain"] == "periodic")
    values = payload.reshape((components,) + grid.shape).copy()
    fld = SampledField(grid, values, divergence_free=sidecar["divergence_free"])
    fld.meta["spec"] = sidecar.get("spec", {})
    return fld
