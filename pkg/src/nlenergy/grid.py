"""Cell-centred lattice functions with explicit far-field data.

A :class:`Domain` describes the box ``[-R_box, R_box]^n`` cut into cells of
width ``h``; nodes sit at cell centres. The minimisation ball is ``|x| < R``.
A :class:`GridFunction` stores one value per node plus a :class:`FarField`
rule giving the function beyond the box, which the energy needs for tails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import InputError, UsageError

LATTICE_TOL = 1e-9
BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class Domain:
    n: int
    R: float
    R_box: float
    h: float

    def __post_init__(self):
        if self.n not in (1, 2):
            raise UsageError(f"dimension must be 1 or 2, got {self.n}")
        if not (self.R > 0 and self.h > 0):
            raise UsageError("R and h must be positive")
        if self.R_box < 2.0 * self.R * (1.0 - 1e-12):
            raise UsageError(f"R_box = {self.R_box} must be at least 2R = {2 * self.R}")
        if self.h > self.R / 4.0 * (1.0 + 1e-12):
            raise UsageError(f"h = {self.h} must not exceed R/4 = {self.R / 4}")
        cells = 2.0 * self.R_box / self.h
        if abs(cells - round(cells)) > LATTICE_TOL * max(1.0, cells):
            raise UsageError("2 R_box / h must be an integer")

    @property
    def N(self) -> int:
        """Nodes per axis."""
        return int(round(2.0 * self.R_box / self.h))

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.n

    @property
    def size(self) -> int:
        return self.N ** self.n

    @property
    def cell_volume(self) -> float:
        return self.h ** self.n

    def axis(self) -> np.ndarray:
        k = np.arange(self.N)
        return -self.R_box + (k + 0.5) * self.h

    def coords(self) -> np.ndarray:
        """Node coordinates, shape ``shape + (n,)``."""
        ax = self.axis()
        if self.n == 1:
            return ax[:, None]
        X, Y = np.meshgrid(ax, ax, indexing="ij")
        return np.stack([X, Y], axis=-1)

    def radii(self) -> np.ndarray:
        return np.linalg.norm(self.coords(), axis=-1)

    @property
    def R_eff(self) -> float:
        # nudge R off any node so membership |x| < R is unambiguous
        r = self.radii()
        if np.any(np.abs(r - self.R) < BOUNDARY_TOL):
            return self.R + self.h / 1000.0
        return self.R

    def ball_mask(self, radius: Optional[float] = None) -> np.ndarray:
        radius = self.R_eff if radius is None else radius
        return self.radii() < radius

    def interior_mask(self) -> np.ndarray:
        return self.ball_mask()

    def ball_volume(self) -> float:
        """Lattice volume of B_R (number of interior nodes times h^n)."""
        return float(np.count_nonzero(self.interior_mask())) * self.cell_volume

    def index_of(self, point) -> tuple:
        point = np.atleast_1d(np.asarray(point, dtype=float))
        idx = np.floor((point + self.R_box) / self.h).astype(int)
        if np.any(idx < 0) or np.any(idx >= self.N):
            raise UsageError("point lies outside the lattice box")
        return tuple(int(i) for i in idx)


# -- far field -----------------------------------------------------------------

def _ramp(s):
    return np.clip(s, -1.0, 1.0)


PROFILE_1D = {"ramp": _ramp}


@dataclass(frozen=True)
class FarField:
    """Values of a function outside the lattice box.

    ``kind`` is ``constant`` (value ``c``), ``profile1d`` (``u0(omega.x - offset)``
    for a named or callable 1D profile), ``combined`` (pointwise min or max of
    two rules) or ``none``.
    """

    kind: str = "none"
    c: float = 0.0
    direction: tuple = ()
    name: str = ""
    params: tuple = ()
    offset: float = 0.0
    func: Optional[Callable] = field(default=None, compare=False, repr=False)
    op: str = ""
    parts: tuple = ()

    @staticmethod
    def constant(c: float) -> "FarField":
        return FarField("constant", c=float(c))

    @staticmethod
    def none() -> "FarField":
        return FarField("none")

    @staticmethod
    def profile1d(direction, name: str, params=(), offset=0.0, func=None) -> "FarField":
        direction = tuple(float(v) for v in np.atleast_1d(direction))
        if abs(math.hypot(*direction) - 1.0) > 1e-12:
            raise UsageError("far-field direction must be a unit vector")
        if func is None:
            func = _profile_function(name, params)
        return FarField("profile1d", direction=direction, name=name,
                        params=tuple(float(v) for v in params), offset=float(offset), func=func)

    @property
    def evaluable(self) -> bool:
        return self.kind != "none"

    def __call__(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if self.kind == "constant":
            return np.full(points.shape[:-1], self.c)
        if self.kind == "profile1d":
            s = points @ np.asarray(self.direction) - self.offset
            return np.asarray(self.func(s), dtype=float)
        if self.kind == "combined":
            a, b = (part(points) for part in self.parts)
            return np.minimum(a, b) if self.op == "min" else np.maximum(a, b)
        raise UsageError("far-field rule 'none' cannot be evaluated")

    def shifted(self, shift) -> "FarField":
        """Far field of x -> f(x - shift)."""
        shift = np.atleast_1d(np.asarray(shift, dtype=float))
        if self.kind == "profile1d":
            return replace(self, offset=self.offset + float(np.dot(self.direction, shift)))
        if self.kind == "combined":
            return replace(self, parts=tuple(p.shifted(shift) for p in self.parts))
        return self

    def bounds(self) -> tuple:
        """Range of values taken by the rule, (lo, hi)."""
        if self.kind == "constant":
            return self.c, self.c
        if self.kind == "profile1d":
            s = np.linspace(-1e3, 1e3, 20001)
            v = self.func(s)
            return float(np.min(v)), float(np.max(v))
        if self.kind == "combined":
            (a0, a1), (b0, b1) = (p.bounds() for p in self.parts)
            if self.op == "min":
                return min(a0, b0), min(a1, b1)
            return max(a0, b0), max(a1, b1)
        return -math.inf, math.inf

    def describe(self) -> str:
        if self.kind == "constant":
            return f"constant {self.c:.17g}"
        if self.kind == "none":
            return "none"
        if self.kind == "profile1d" and self.name in _SERIALIZABLE:
            vals = list(self.direction) + [self.offset] + list(self.params)
            return "profile1d " + self.name + " " + " ".join(f"{v:.17g}" for v in vals)
        raise UsageError(f"far-field rule {self.kind}/{self.name or self.op} is not serializable")

    @staticmethod
    def parse(text: str, n: int) -> "FarField":
        parts = text.split()
        if not parts:
            raise InputError("empty far-field descriptor")
        if parts[0] == "none":
            return FarField.none()
        if parts[0] == "constant" and len(parts) == 2:
            return FarField.constant(float(parts[1]))
        if parts[0] == "profile1d" and len(parts) >= 3 + n and parts[1] in _SERIALIZABLE:
            nums = [float(v) for v in parts[2:]]
            return FarField.profile1d(nums[:n], parts[1], params=nums[n + 1:], offset=nums[n])
        raise InputError(f"cannot parse far-field descriptor {text!r}")


_SERIALIZABLE = ("ramp", "layer_tanh")


def _profile_function(name, params):
    if name == "ramp":
        return _ramp
    if name == "layer_tanh":
        (width,) = params
        return lambda s: np.tanh(np.asarray(s) / width)
    raise UsageError(f"unknown 1D profile {name!r}")


def combine_farfields(a: FarField, b: FarField, op: str) -> FarField:
    if not (a.evaluable and b.evaluable):
        return FarField.none()
    if a.kind == b.kind == "constant":
        return FarField.constant(min(a.c, b.c) if op == "min" else max(a.c, b.c))
    if a == b:
        return a
    return FarField("combined", op=op, parts=(a, b))


# -- grid functions --------------------------------------------------------------

class GridFunction:
    """Immutable nodal values on a :class:`Domain` plus a far-field rule."""

    def __init__(self, domain: Domain, values, farfield: FarField = FarField.none(),
                 bound: Optional[float] = None):
        values = np.array(values, dtype=float)
        if values.shape != domain.shape:
            raise UsageError(f"values have shape {values.shape}, expected {domain.shape}")
        if not np.all(np.isfinite(values)):
            raise InputError("grid values must be finite")
        if bound is not None:
            if np.max(np.abs(values)) > bound:
                raise InputError(f"values exceed the declared bound {bound}")
            lo, hi = farfield.bounds()
            if farfield.evaluable and (lo < -bound or hi > bound):
                raise InputError(f"far field exceeds the declared bound {bound}")
        values.setflags(write=False)
        self.domain = domain
        self.values = values
        self.farfield = farfield
        self.bound = bound

    def __repr__(self):
        return f"GridFunction({self.domain}, farfield={self.farfield.kind})"

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.domain, values, self.farfield, self.bound)

    def with_interior(self, interior_values) -> "GridFunction":
        """Copy with new values on the interior nodes (B_R) only."""
        v = np.array(self.values)
        v[self.domain.interior_mask()] = interior_values
        return GridFunction(self.domain, v, self.farfield, self.bound)

    def interior_values(self) -> np.ndarray:
        return self.values[self.domain.interior_mask()]

    def __eq__(self, other):
        return (isinstance(other, GridFunction) and self.domain == other.domain
                and np.array_equal(self.values, other.values) and self.farfield == other.farfield)

    __hash__ = None

    # text round trip: header line, then one value per line in row-major order
    def to_text(self) -> str:
        d = self.domain
        head = f"{d.n} {d.R:.17g} {d.R_box:.17g} {d.h:.17g} {self.farfield.describe()}"
        body = "\n".join(f"{v:.17g}" for v in self.values.ravel(order="C"))
        return head + "\n" + body + "\n"

    @staticmethod
    def from_text(text: str) -> "GridFunction":
        lines = text.strip().splitlines()
        if not lines:
            raise InputError("empty grid-function file")
        head = lines[0].split(maxsplit=4)
        if len(head) < 5:
            raise InputError("grid-function header needs n, R, R_box, h and a far-field rule")
        n = int(head[0])
        dom = Domain(n, float(head[1]), float(head[2]), float(head[3]))
        ff = FarField.parse(head[4], n)
        vals = np.array([float(v) for v in lines[1:]], dtype=float)
        if vals.size != dom.size:
            raise InputError(f"expected {dom.size} values, found {vals.size}")
        return GridFunction(dom, vals.reshape(dom.shape), ff)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_text())

    @staticmethod
    def load(path) -> "GridFunction":
        with open(path) as fh:
            return GridFunction.from_text(fh.read())


# -- profiles ------------------------------------------------------------------

def _unit(omega, n):
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    if w.shape != (n,):
        raise UsageError(f"direction must have {n} components")
    if abs(np.linalg.norm(w) - 1.0) > 1e-12:
        raise UsageError("direction must be a unit vector")
    return w


@dataclass(frozen=True)
class Profile:
    """Analytic function sampled by :func:`sample_profile`.

    Use the constructors ``constant``, ``ramp``, ``layer_tanh``, ``psi_aux``,
    ``dist_aux`` and ``custom`` rather than building instances directly.
    """

    name: str
    params: tuple = ()
    func: Optional[Callable] = field(default=None, compare=False, repr=False)
    farfield_rule: Optional[FarField] = field(default=None, compare=False, repr=False)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        n = points.shape[-1]
        if self.name == "constant":
            return np.full(points.shape[:-1], self.params[0])
        if self.name == "ramp":
            w = _unit(self.params, n)
            return np.clip(points @ w, -1.0, 1.0)
        if self.name == "layer_tanh":
            w = _unit(self.params[:-1], n)
            return np.tanh((points @ w) / self.params[-1])
        r = np.linalg.norm(points, axis=-1)
        if self.name == "psi_aux":
            R = self.params[0]
            return -1.0 + 2.0 * np.minimum(np.maximum(r - R - 1.0, 0.0), 1.0)
        if self.name == "dist_aux":
            R = self.params[0]
            return np.maximum(R + 1.0 - r, 1.0)
        if self.name == "custom":
            return np.asarray(self.func(points), dtype=float)
        raise UsageError(f"unknown profile {self.name!r}")

    def farfield(self, dom: Domain) -> FarField:
        if self.farfield_rule is not None:
            return self.farfield_rule
        if self.name == "constant":
            return FarField.constant(self.params[0])
        if self.name == "ramp":
            return FarField.profile1d(self.params, "ramp")
        if self.name == "layer_tanh":
            return FarField.profile1d(self.params[:-1], "layer_tanh", params=(self.params[-1],))
        if self.name == "psi_aux" and dom.R_box >= self.params[0] + 2.0:
            return FarField.constant(1.0)
        if self.name == "dist_aux" and dom.R_box >= self.params[0]:
            return FarField.constant(1.0)
        return FarField.none()


def constant(c: float) -> Profile:
    return Profile("constant", (float(c),))


def ramp(omega) -> Profile:
    return Profile("ramp", tuple(float(v) for v in np.atleast_1d(omega)))


def layer_tanh(omega, width: float) -> Profile:
    if not width > 0:
        raise UsageError("layer width must be positive")
    return Profile("layer_tanh", tuple(float(v) for v in np.atleast_1d(omega)) + (float(width),))


def psi_aux(R: float) -> Profile:
    """-1 on B_(R+1), +1 outside B_(R+2), linear in |x| in between."""
    return Profile("psi_aux", (float(R),))


def dist_aux(R: float) -> Profile:
    """max(R + 1 - |x|, 1)."""
    return Profile("dist_aux", (float(R),))


def custom(func: Callable, farfield: Optional[FarField] = None) -> Profile:
    """``func`` maps points of shape (..., n) to values of shape (...)."""
    return Profile("custom", (), func, farfield)


def make_profile(name: str, **params) -> Profile:
    builders = {"constant": constant, "ramp": ramp, "layer_tanh": layer_tanh,
                "psi_aux": psi_aux, "dist_aux": dist_aux, "custom": custom}
    if name not in builders:
        raise UsageError(f"unknown profile {name!r}")
    return builders[name](**params)


def sample_profile(dom: Domain, profile: Profile, bound: Optional[float] = None) -> GridFunction:
    if not isinstance(profile, Profile):
        raise UsageError(f"unknown profile {profile!r}")
    values = profile.evaluate(dom.coords())
    return GridFunction(dom, values, profile.farfield(dom), bound)


# -- pointwise operations -----------------------------------------------------------

def min_max_combine(u: GridFunction, v: GridFunction):
    if u.domain != v.domain:
        raise UsageError("grid functions live on different domains")
    m = np.minimum(u.values, v.values)
    M = np.maximum(u.values, v.values)
    return (GridFunction(u.domain, m, combine_farfields(u.farfield, v.farfield, "min")),
            GridFunction(u.domain, M, combine_farfields(u.farfield, v.farfield, "max")))


def translate(u: GridFunction, shift) -> GridFunction:
    """Return x -> u(x - shift) for a shift that is a whole number of cells."""
    dom = u.domain
    shift = np.atleast_1d(np.asarray(shift, dtype=float))
    if shift.shape != (dom.n,):
        raise UsageError(f"shift must have {dom.n} components")
    cells = shift / dom.h
    k = np.round(cells).astype(int)
    if np.any(np.abs(cells - k) > LATTICE_TOL * np.maximum(1.0, np.abs(cells))):
        raise UsageError("shift must be an integer multiple of h in every coordinate")
    if not np.any(k):
        return GridFunction(dom, u.values, u.farfield, u.bound)

    out = np.empty(dom.shape)
    src_idx = np.indices(dom.shape) - k.reshape((dom.n,) + (1,) * dom.n)
    inside = np.all((src_idx >= 0) & (src_idx < dom.N), axis=0)
    clipped = tuple(np.clip(src_idx[i], 0, dom.N - 1) for i in range(dom.n))
    out[inside] = u.values[clipped][inside]
    if not np.all(inside):
        if not u.farfield.evaluable:
            raise UsageError("translation exposes nodes beyond the box but the far field is 'none'")
        pre = dom.coords() - dom.h * k
        out[~inside] = u.farfield(pre[~inside])
    return GridFunction(dom, out, u.farfield.shifted(dom.h * k), u.bound)
