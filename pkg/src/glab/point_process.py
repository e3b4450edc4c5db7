"""Marked Poisson point processes on R^d x (0, inf).

Sampling, mass measurement, and the measure-preserving transformations
(homothety, volume-preserving stretch, superposition, mark flattening)
used by the solvers and the estimation pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import integrate

from .errors import DomainError, InfeasibleError, ParameterError, ShapeError

MARK_KINDS = ("dirac", "exponential", "pareto", "mixture")


def unit_ball_volume(dim: int) -> float:
    """Lebesgue volume of the closed unit ball in R^dim."""
    return math.pi ** (dim / 2.0) / math.gamma(dim / 2.0 + 1.0)


@dataclass(frozen=True)
class IntensityDescriptor:
    """Mark measure nu together with the ambient dimension.

    Supported kinds:
      dirac        nu = rate * delta_{atom}
      exponential  nu = weight * Exp(rate)   (tail weight * exp(-rate*t))
      pareto       nu = weight * Pareto(scale, shape)
      mixture      nu = sum_i rates[i] * delta_{atoms[i]}
    """

    kind: str
    dim: int
    atom: float | None = None
    rate: float | None = None
    scale: float | None = None
    shape: float | None = None
    weight: float = 1.0
    atoms: tuple[float, ...] | None = None
    rates: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.dim < 2:
            raise ParameterError(f"dimension must be >= 2, got {self.dim}")
        if self.kind == "dirac":
            if self.atom is None or self.atom <= 0:
                raise ParameterError("dirac mark location must be positive")
            if self.rate is None or self.rate <= 0:
                raise ParameterError("dirac rate must be positive")
        elif self.kind == "exponential":
            if self.rate is None or self.rate <= 0:
                raise ParameterError("exponential rate must be positive")
            if self.weight <= 0:
                raise ParameterError("intensity weight must be positive")
        elif self.kind == "pareto":
            if self.scale is None or self.scale <= 0:
                raise ParameterError("pareto scale must be positive")
            if self.shape is None or self.shape <= 0:
                raise ParameterError("pareto shape must be positive")
            if self.weight <= 0:
                raise ParameterError("intensity weight must be positive")
        elif self.kind == "mixture":
            if not self.atoms or not self.rates or len(self.atoms) != len(self.rates):
                raise ParameterError("mixture needs matching atoms and rates")
            if any(a <= 0 for a in self.atoms) or any(r <= 0 for r in self.rates):
                raise ParameterError("mixture atoms and rates must be positive")
        else:
            raise ParameterError(f"unknown mark kind {self.kind!r}")

    @classmethod
    def dirac_kind(cls, atom: float, rate: float, dim: int) -> "IntensityDescriptor":
        return cls(kind="dirac", dim=dim, atom=atom, rate=rate)

    @classmethod
    def exponential_kind(cls, rate: float, dim: int, weight: float = 1.0):
        return cls(kind="exponential", dim=dim, rate=rate, weight=weight)

    @classmethod
    def pareto_kind(cls, scale: float, shape: float, dim: int, weight: float = 1.0):
        return cls(kind="pareto", dim=dim, scale=scale, shape=shape, weight=weight)

    @classmethod
    def mixture_kind(cls, atoms: Sequence[float], rates: Sequence[float], dim: int):
        return cls(kind="mixture", dim=dim, atoms=tuple(atoms), rates=tuple(rates))

    def total_mass(self) -> float:
        """nu((0, inf)); finite and positive for every supported kind."""
        if self.kind == "dirac":
            return float(self.rate)
        if self.kind in ("exponential", "pareto"):
            return float(self.weight)
        return float(sum(self.rates))

    def tail(self, t: np.ndarray | float) -> np.ndarray | float:
        """nu([t, inf)) evaluated pointwise."""
        t = np.asarray(t, dtype=float)
        if self.kind == "dirac":
            out = np.where(t <= self.atom, self.rate, 0.0)
        elif self.kind == "exponential":
            out = self.weight * np.exp(-self.rate * np.maximum(t, 0.0))
        elif self.kind == "pareto":
            out = self.weight * np.where(
                t <= self.scale, 1.0, (self.scale / np.maximum(t, self.scale)) ** self.shape
            )
        else:
            out = np.zeros_like(t, dtype=float)
            for a, r in zip(self.atoms, self.rates):
                out = out + np.where(t <= a, r, 0.0)
        return out if out.ndim else float(out)

    def sample_marks(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """n i.i.d. draws from the normalized mark law nu / nu((0, inf))."""
        if self.kind == "dirac":
            return np.full(n, float(self.atom))
        if self.kind == "exponential":
            return rng.exponential(1.0 / self.rate, size=n)
        if self.kind == "pareto":
            u = rng.random(n)
            return self.scale * u ** (-1.0 / self.shape)
        weights = np.asarray(self.rates, dtype=float)
        idx = rng.choice(len(weights), size=n, p=weights / weights.sum())
        return np.asarray(self.atoms, dtype=float)[idx]

    def scaled(self, factor: float) -> "IntensityDescriptor":
        """Descriptor for factor * nu (same mark law, multiplied rate)."""
        if factor <= 0:
            raise ParameterError("scaling factor must be positive")
        if self.kind == "dirac":
            return replace(self, rate=self.rate * factor)
        if self.kind in ("exponential", "pareto"):
            return replace(self, weight=self.weight * factor)
        return replace(self, rates=tuple(r * factor for r in self.rates))

    def to_json(self) -> dict:
        out = {"kind": self.kind, "dim": self.dim}
        if self.kind == "dirac":
            out.update(atom=self.atom, rate=self.rate)
        elif self.kind == "exponential":
            out.update(rate=self.rate, weight=self.weight)
        elif self.kind == "pareto":
            out.update(scale=self.scale, shape=self.shape, weight=self.weight)
        else:
            out.update(atoms=list(self.atoms), rates=list(self.rates))
        return out

    @classmethod
    def from_json(cls, data: dict) -> "IntensityDescriptor":
        data = dict(data)
        kind = data.pop("kind")
        dim = data.pop("dim")
        if kind == "mixture":
            return cls.mixture_kind(data["atoms"], data["rates"], dim)
        return cls(kind=kind, dim=dim, **data)


class MomentCheck(NamedTuple):
    value: float
    finite: bool


def check_moment_condition(nu: IntensityDescriptor, tol: float = 1e-10) -> MomentCheck:
    """Integral of nu([t, inf))^(1/d) over t in (0, inf), in closed form.

    The integral is the summability condition the mark measure must satisfy;
    it diverges exactly for pareto marks with shape <= dim.
    """
    if tol <= 0:
        raise ParameterError("tol must be positive")
    d = nu.dim
    if nu.kind == "dirac":
        return MomentCheck(nu.atom * nu.rate ** (1.0 / d), True)
    if nu.kind == "exponential":
        # tail^(1/d) = weight^(1/d) * exp(-rate*t/d)
        return MomentCheck(nu.weight ** (1.0 / d) * d / nu.rate, True)
    if nu.kind == "pareto":
        if nu.shape <= d:
            return MomentCheck(math.inf, False)
        w = nu.weight ** (1.0 / d)
        value = w * nu.scale * (1.0 + 1.0 / (nu.shape / d - 1.0))
        return MomentCheck(value, True)
    # mixture: piecewise-constant tail, exact sum
    order = np.argsort(nu.atoms)
    atoms = np.asarray(nu.atoms, dtype=float)[order]
    rates = np.asarray(nu.rates, dtype=float)[order]
    suffix = np.cumsum(rates[::-1])[::-1]
    prev = 0.0
    total = 0.0
    for a, s in zip(atoms, suffix):
        total += (a - prev) * s ** (1.0 / d)
        prev = a
    return MomentCheck(total, True)


def moment_integral_quadrature(nu: IntensityDescriptor, tol: float = 1e-10) -> float:
    """Adaptive-quadrature evaluation of the same tail integral.

    Independent of :func:`check_moment_condition`; integrates on [0, T] with an
    analytic bound for the remaining tail (zero for compactly supported tails).
    """
    if tol <= 0:
        raise ParameterError("tol must be positive")
    d = nu.dim

    def integrand(t):
        return nu.tail(t) ** (1.0 / d)

    if nu.kind == "dirac":
        breakpoints = [0.0, nu.atom]
    elif nu.kind == "mixture":
        breakpoints = [0.0] + sorted(nu.atoms)
    elif nu.kind == "exponential":
        breakpoints = [0.0, math.inf]
    else:
        if nu.shape <= d:
            return math.inf
        breakpoints = [0.0, nu.scale, math.inf]
    value = 0.0
    for lo, hi in zip(breakpoints, breakpoints[1:]):
        piece, _ = integrate.quad(integrand, lo, hi, epsabs=tol / 2.0, limit=400)
        value += piece
    return value


@dataclass(frozen=True)
class MarkedPoint:
    pos: tuple[float, ...]
    mass: float

    def __post_init__(self):
        if self.mass <= 0:
            raise ParameterError("mass must be positive")


@dataclass(frozen=True)
class PointConfiguration:
    """A sampled realization: atom positions with positive masses in a box window."""

    dim: int
    window: np.ndarray  # (dim, 2) per-axis [lo, hi]
    positions: np.ndarray  # (n, dim)
    masses: np.ndarray  # (n,)
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        window = np.asarray(self.window, dtype=float).reshape(self.dim, 2)
        positions = np.asarray(self.positions, dtype=float).reshape(-1, self.dim)
        masses = np.asarray(self.masses, dtype=float).reshape(-1)
        object.__setattr__(self, "window", window)
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "masses", masses)
        if positions.shape[0] != masses.shape[0]:
            raise ShapeError("positions and masses disagree in length")
        if np.any(window[:, 1] < window[:, 0]):
            raise ParameterError("window bounds must satisfy lo <= hi")
        if masses.size and np.any(masses <= 0):
            raise ParameterError("all masses must be positive")
        eps = 1e-9
        if positions.size and (
            np.any(positions < window[:, 0] - eps) or np.any(positions > window[:, 1] + eps)
        ):
            raise ParameterError("atom positions must lie in the window")
        if positions.shape[0] > 1:
            order = np.lexsort(positions.T)
            if np.any(np.all(np.diff(positions[order], axis=0) == 0.0, axis=1)):
                raise ParameterError("atom positions must be pairwise distinct")

    @property
    def n(self) -> int:
        return int(self.positions.shape[0])

    @property
    def points(self) -> tuple[MarkedPoint, ...]:
        return tuple(
            MarkedPoint(tuple(p), float(m)) for p, m in zip(self.positions, self.masses)
        )

    def total_mass(self) -> float:
        return float(self.masses.sum())

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "window": self.window.tolist(),
            "points": [
                {"pos": list(map(float, p)), "mass": float(m)}
                for p, m in zip(self.positions, self.masses)
            ],
            "provenance": self.provenance,
        }

    @classmethod
    def from_json(cls, data: dict) -> "PointConfiguration":
        pts = data.get("points", [])
        dim = int(data["dim"])
        positions = np.asarray([p["pos"] for p in pts], dtype=float).reshape(len(pts), dim)
        masses = np.asarray([p["mass"] for p in pts], dtype=float)
        return cls(
            dim=dim,
            window=np.asarray(data["window"], dtype=float),
            positions=positions,
            masses=masses,
            provenance=data.get("provenance", {}),
        )


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.default_rng(seed)
    return np.random.default_rng(np.random.SeedSequence(seed))


def sample_ppp(nu: IntensityDescriptor, window, seed) -> PointConfiguration:
    """Sample the process on a box window; fully determined by the seed.

    The atom count is Poisson with mean vol(window) * nu((0, inf)); positions
    are i.i.d. uniform on the window and marks i.i.d. from the normalized
    mark law.  Draw order (count, positions, marks) is part of the contract:
    it makes homothety-coupled runs reproduce each other exactly.
    """
    window = np.asarray(window, dtype=float).reshape(nu.dim, 2)
    widths = window[:, 1] - window[:, 0]
    if np.any(widths < 0):
        raise ParameterError("window bounds must satisfy lo <= hi")
    volume = float(np.prod(widths))
    rng = _as_rng(seed)
    count = int(rng.poisson(volume * nu.total_mass()))
    uniforms = rng.random((count, nu.dim))
    positions = window[:, 0] + uniforms * widths
    masses = nu.sample_marks(count, rng)
    provenance = {"seed": _seed_repr(seed), "nu": nu.to_json(), "truncation": None}
    return PointConfiguration(
        dim=nu.dim, window=window, positions=positions, masses=masses, provenance=provenance
    )


def _seed_repr(seed):
    if isinstance(seed, np.random.SeedSequence):
        entropy = seed.entropy
        if isinstance(entropy, (tuple, list)):
            return list(entropy)
        return entropy
    if isinstance(seed, np.random.Generator):
        return "generator-state"
    return seed


RegionLike = Callable[[np.ndarray], np.ndarray]


def ball(center, radius: float) -> RegionLike:
    """Closed Euclidean ball as a vectorized membership predicate."""
    center = np.asarray(center, dtype=float)

    def contains(positions: np.ndarray) -> np.ndarray:
        return np.linalg.norm(positions - center, axis=1) <= radius

    return contains


def box(bounds) -> RegionLike:
    bounds = np.asarray(bounds, dtype=float)

    def contains(positions: np.ndarray) -> np.ndarray:
        return np.all(
            (positions >= bounds[:, 0]) & (positions <= bounds[:, 1]), axis=1
        )

    return contains


def mass_of(region, cfg: PointConfiguration) -> float:
    """Total mass of atoms lying in the region.

    The region may be a vectorized predicate over an (n, d) position array or
    a finite point set given as an (m, d) array (exact position matching).
    """
    if cfg.n == 0:
        return 0.0
    if callable(region):
        mask = np.asarray(region(cfg.positions), dtype=bool)
    else:
        pts = np.asarray(region, dtype=float).reshape(-1, cfg.dim)
        if pts.shape[0] == 0:
            return 0.0
        mask = (cfg.positions[:, None, :] == pts[None, :, :]).all(axis=2).any(axis=1)
    return float(cfg.masses[mask].sum())


def transform_scale(cfg: PointConfiguration, lam: float) -> PointConfiguration:
    """Homothety z -> z / lam on positions; the image is a sample of lam^d * nu."""
    if lam <= 0:
        raise ParameterError("lam must be positive")
    return PointConfiguration(
        dim=cfg.dim,
        window=cfg.window / lam,
        positions=cfg.positions / lam,
        masses=cfg.masses.copy(),
        provenance={**cfg.provenance, "scaled_by": lam},
    )


def stretch_factor(beta: float, dim: int) -> float:
    """Axis ratio of the volume-preserving stretch map; >= 1 on [1/sqrt(d), 1)."""
    if not (1.0 / math.sqrt(dim) <= beta < 1.0):
        raise DomainError(
            f"beta must lie in [1/sqrt({dim}), 1), got {beta}"
        )
    return ((dim - 1) * beta * beta / (1.0 - beta * beta)) ** (1.0 / (2.0 * dim))


def stretch_matrix_diagonal(beta: float, dim: int) -> np.ndarray:
    lam = stretch_factor(beta, dim)
    diag = np.full(dim, lam)
    diag[0] = lam ** (-(dim - 1))
    return diag


def transform_stretch(obj, beta: float):
    """Apply the determinant-1 contraction along axis 1 / dilation elsewhere.

    Accepts a PointConfiguration or a Path; masses and atom counts are
    preserved, and counts in images of measurable sets match counts in the
    preimages (the map is a linear bijection).
    """
    from .geometry import Path  # local import to avoid a cycle

    if isinstance(obj, PointConfiguration):
        diag = stretch_matrix_diagonal(beta, obj.dim)
        window = obj.window * diag[:, None]
        return PointConfiguration(
            dim=obj.dim,
            window=window,
            positions=obj.positions * diag,
            masses=obj.masses.copy(),
            provenance={**obj.provenance, "stretched_beta": beta},
        )
    if isinstance(obj, Path):
        diag = stretch_matrix_diagonal(beta, obj.vertices.shape[1])
        return Path(obj.vertices * diag)
    raise TypeError(f"cannot stretch object of type {type(obj).__name__}")


def superpose(cfg1: PointConfiguration, cfg2: PointConfiguration) -> PointConfiguration:
    """Union of the two atom sets; atoms of cfg1 keep their indices, atoms of
    cfg2 follow with offset cfg1.n."""
    if cfg1.dim != cfg2.dim:
        raise ShapeError("superposed configurations must share the dimension")
    if not np.allclose(cfg1.window, cfg2.window):
        raise ShapeError("superposed configurations must share the window")
    return PointConfiguration(
        dim=cfg1.dim,
        window=cfg1.window.copy(),
        positions=np.vstack([cfg1.positions, cfg2.positions]),
        masses=np.concatenate([cfg1.masses, cfg2.masses]),
        provenance={"superposition": [cfg1.provenance, cfg2.provenance]},
    )


def flatten_marks(cfg: PointConfiguration) -> PointConfiguration:
    """Same atoms, every mass replaced by 1; the mass of a set counts atoms."""
    return PointConfiguration(
        dim=cfg.dim,
        window=cfg.window.copy(),
        positions=cfg.positions.copy(),
        masses=np.ones(cfg.n),
        provenance={**cfg.provenance, "flattened": True},
    )


def nearest_atom_distance(cfg: PointConfiguration, x) -> float:
    if cfg.n == 0:
        raise InfeasibleError("no atoms: nearest distance undefined")
    x = np.asarray(x, dtype=float)
    return float(np.linalg.norm(cfg.positions - x, axis=1).min())


def sprinkle_integral(nu: IntensityDescriptor, eps: float, verify: bool = False) -> float:
    """Expected distance integral I(eps) of the sprinkling construction.

    Closed form Gamma(1 + 1/d) * (eps * nu_total * omega_d)^(-1/d); with
    ``verify`` the value is cross-checked against adaptive quadrature of
    exp(-eps * nu_total * omega_d * s^d) to 1e-8.
    """
    if eps <= 0:
        raise ParameterError("eps must be positive")
    d = nu.dim
    a = eps * nu.total_mass() * unit_ball_volume(d)
    value = math.gamma(1.0 + 1.0 / d) * a ** (-1.0 / d)
    if verify:
        quad_value, _ = integrate.quad(
            lambda s: math.exp(-a * s**d), 0.0, math.inf, epsabs=1e-12
        )
        if abs(quad_value - value) > 1e-8:
            raise AssertionError(
                f"quadrature {quad_value} deviates from closed form {value}"
            )
    return value
