"""
Laminate descriptions, unit-cell functions and the scaling between physical and
nondimensional variables.

Every periodic profile lives on the unit cell [0, 1) as a piecewise polynomial.
Piece ``i`` covers ``[edges[i], edges[i + 1])`` and is stored in the local
coordinate ``s = y - edges[i]`` to keep the coefficients well conditioned.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import Polynomial

from constants import BREAKPOINT_MERGE_TOL, DEFAULT_SAMPLE_PIECES, MAX_DEGREE

_log = logging.getLogger(__name__)

Scalar = Union[int, float]


class LaminateValidationError(ValueError):
    def __init__(self, field_name: str, value: Any, reason: str):
        self.field = field_name
        self.value = value
        self.reason = reason
        super().__init__(f"invalid {field_name}={value!r}: {reason}")


class DegreeOverflowError(ArithmeticError):
    def __init__(self, degree: int, limit: int = MAX_DEGREE, operation: str = "product"):
        self.degree = degree
        self.limit = limit
        self.operation = operation
        super().__init__(
            f"{operation} needs polynomial degree {degree} > {limit}; "
            "resample the operands with UnitCellFunction.sample(...) first"
        )


class Model(str, Enum):
    MODEL1 = "model1"
    MODEL2 = "model2"

    @classmethod
    def parse(cls, raw: Any) -> "Model":
        text = str(raw).strip().lower()
        if text in {"1", "model1", "model_1"}:
            return cls.MODEL1
        if text in {"2", "model2", "model_2"}:
            return cls.MODEL2
        raise LaminateValidationError("model", raw, "expected 'model1' or 'model2'")


def _require_positive(field_name: str, value: Any) -> float:
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise LaminateValidationError(field_name, value, "not a number") from None
    if not math.isfinite(number) or number <= 0.0:
        raise LaminateValidationError(field_name, value, "must be finite and strictly positive")
    return number


def _require_finite(field_name: str, value: Any) -> float:
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise LaminateValidationError(field_name, value, "not a number") from None
    if not math.isfinite(number):
        raise LaminateValidationError(field_name, value, "must be finite")
    return number


def _shift_polynomial(poly: Polynomial, offset: float) -> Polynomial:
    """Coefficients of s -> poly(s + offset)."""
    if offset == 0.0:
        return poly
    coef = [poly.deriv(k)(offset) / math.factorial(k) for k in range(poly.degree() + 1)]
    return Polynomial(coef)


def _merge_edges(*edge_sets: np.ndarray) -> np.ndarray:
    merged = np.unique(np.concatenate(edge_sets))
    keep = [merged[0]]
    for edge in merged[1:]:
        if edge - keep[-1] > BREAKPOINT_MERGE_TOL:
            keep.append(edge)
    keep[0] = 0.0
    keep[-1] = 1.0
    return np.asarray(keep, dtype=float)


@dataclass(frozen=True, eq=False)
class UnitCellFunction:
    """1-periodic piecewise polynomial on [0, 1)."""

    edges: np.ndarray
    pieces: Tuple[Polynomial, ...]

    def __post_init__(self) -> None:
        edges = np.array(self.edges, dtype=float)
        if edges.ndim != 1 or edges.size < 2:
            raise LaminateValidationError("edges", self.edges, "need at least two breakpoints")
        if abs(edges[0]) > BREAKPOINT_MERGE_TOL or abs(edges[-1] - 1.0) > BREAKPOINT_MERGE_TOL:
            raise LaminateValidationError("edges", self.edges, "must start at 0 and end at 1")
        if np.any(np.diff(edges) <= 0.0):
            raise LaminateValidationError("edges", self.edges, "must be strictly increasing")
        if len(self.pieces) != edges.size - 1:
            raise LaminateValidationError("pieces", len(self.pieces), "one polynomial per interval expected")
        for piece in self.pieces:
            if piece.degree() > MAX_DEGREE:
                raise DegreeOverflowError(piece.degree(), operation="construction")
        edges.setflags(write=False)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "pieces", tuple(Polynomial(p.coef) for p in self.pieces))

    # construction

    @classmethod
    def constant(cls, value: Scalar) -> "UnitCellFunction":
        return cls(np.array([0.0, 1.0]), (Polynomial([float(value)]),))

    @classmethod
    def piecewise_constant(cls, edges: Sequence[float], values: Sequence[float]) -> "UnitCellFunction":
        return cls(np.asarray(edges, dtype=float), tuple(Polynomial([float(v)]) for v in values))

    @classmethod
    def from_coefficients(cls, edges: Sequence[float], coefficients: Iterable[Sequence[float]]) -> "UnitCellFunction":
        return cls(np.asarray(edges, dtype=float), tuple(Polynomial(list(c)) for c in coefficients))

    @classmethod
    def sample(
        cls, fn: Callable[[np.ndarray], np.ndarray], n_pieces: int = DEFAULT_SAMPLE_PIECES, degree: int = 0
    ) -> "UnitCellFunction":
        """
        Rendition of a smooth 1-periodic profile on a uniform partition.

        degree 0 keeps the midpoint value of ``fn`` on each piece and is closed
        under reciprocals, so conductivity profiles use it; its cell means are
        second-order accurate in 1/n_pieces, pointwise values first-order.
        degree 1 is the continuous linear interpolant through the edge values,
        second-order pointwise.
        """
        if n_pieces < 1:
            raise LaminateValidationError("n_pieces", n_pieces, "must be >= 1")
        if degree not in (0, 1):
            raise LaminateValidationError("degree", degree, "must be 0 or 1")
        edges = np.linspace(0.0, 1.0, n_pieces + 1)
        nodes = 0.5 * (edges[:-1] + edges[1:]) if degree == 0 else edges
        values = np.asarray(fn(nodes), dtype=float)
        if values.shape != nodes.shape:
            values = np.broadcast_to(values, nodes.shape)
        if degree == 0:
            return cls.piecewise_constant(edges, values)
        slopes = np.diff(values) / np.diff(edges)
        return cls.from_coefficients(edges, zip(values[:-1], slopes))

    # structure

    @property
    def n_pieces(self) -> int:
        return len(self.pieces)

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def degree(self) -> int:
        return max(p.degree() for p in self.pieces)

    def is_piecewise_constant(self) -> bool:
        return all(p.degree() == 0 or not np.any(p.coef[1:]) for p in self.pieces)

    def is_constant(self, rtol: float = 1e-13) -> bool:
        if not self.is_piecewise_constant():
            return False
        values = np.array([p.coef[0] for p in self.pieces])
        scale = max(1.0, float(np.max(np.abs(values))))
        return float(np.ptp(values)) <= rtol * scale

    def refine(self, edges: np.ndarray) -> "UnitCellFunction":
        """Same function on a finer partition that contains ``self.edges``."""
        edges = np.asarray(edges, dtype=float)
        if edges.size == self.edges.size and np.array_equal(edges, self.edges):
            return self
        midpoints = 0.5 * (edges[:-1] + edges[1:])
        owner = np.clip(np.searchsorted(self.edges, midpoints, side="right") - 1, 0, self.n_pieces - 1)
        pieces = tuple(
            _shift_polynomial(self.pieces[j], float(edges[i] - self.edges[j])) for i, j in enumerate(owner)
        )
        return UnitCellFunction(edges, pieces)

    def _aligned(self, other: "UnitCellFunction") -> Tuple["UnitCellFunction", "UnitCellFunction"]:
        if self.edges.size == other.edges.size and np.array_equal(self.edges, other.edges):
            return self, other
        edges = _merge_edges(self.edges, other.edges)
        return self.refine(edges), other.refine(edges)

    # evaluation

    def __call__(self, y: Union[Scalar, np.ndarray]) -> Union[float, np.ndarray]:
        scalar = np.ndim(y) == 0
        arr = np.mod(np.atleast_1d(np.asarray(y, dtype=float)), 1.0)
        idx = np.clip(np.searchsorted(self.edges, arr, side="right") - 1, 0, self.n_pieces - 1)
        out = np.empty_like(arr)
        for i in np.unique(idx):
            mask = idx == i
            out[mask] = self.pieces[i](arr[mask] - self.edges[i])
        if scalar:
            return float(out[0])
        return out

    def left_limits(self) -> np.ndarray:
        """Value of piece i at its right end, i.e. f(edges[i+1]^-)."""
        return np.array([p(length) for p, length in zip(self.pieces, self.lengths)])

    def right_limits(self) -> np.ndarray:
        """Value of piece i at its left end, i.e. f(edges[i]^+)."""
        return np.array([p.coef[0] for p in self.pieces])

    def jumps(self) -> np.ndarray:
        """Periodic jumps f(edges[i]^+) - f(edges[i]^-), i = 0..n-1."""
        return self.right_limits() - np.roll(self.left_limits(), 1)

    def is_continuous(self, atol: float = 1e-12) -> bool:
        scale = max(1.0, self.max_abs())
        return bool(np.all(np.abs(self.jumps()) <= atol * scale))

    def _critical_values(self) -> np.ndarray:
        values: List[float] = []
        for piece, length in zip(self.pieces, self.lengths):
            values.extend([piece(0.0), piece(length)])
            if piece.degree() >= 2:
                for root in piece.deriv().roots():
                    if abs(root.imag) < 1e-14 and 0.0 < root.real < length:
                        values.append(piece(root.real))
        return np.asarray(values, dtype=float)

    def minimum(self) -> float:
        return float(np.min(self._critical_values()))

    def maximum(self) -> float:
        return float(np.max(self._critical_values()))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self._critical_values())))

    # calculus

    def mean(self) -> float:
        total = 0.0
        for piece, length in zip(self.pieces, self.lengths):
            total += piece.integ()(length)
        return float(total)

    def derivative(self) -> "UnitCellFunction":
        return UnitCellFunction(self.edges, tuple(p.deriv() for p in self.pieces))

    def antiderivative(self) -> "UnitCellFunction":
        """Continuous y -> integral of f over [0, y]; periodic only when <f> = 0."""
        pieces = []
        offset = 0.0
        for piece, length in zip(self.pieces, self.lengths):
            primitive = piece.integ(lbnd=0.0) + offset
            pieces.append(primitive)
            offset = float(primitive(length))
        return UnitCellFunction(self.edges, tuple(pieces))

    def zero_mean(self) -> "UnitCellFunction":
        return self - self.mean()

    def map_pieces(self, fn: Callable[[Polynomial], Polynomial]) -> "UnitCellFunction":
        return UnitCellFunction(self.edges, tuple(fn(p) for p in self.pieces))

    def reciprocal(self) -> "UnitCellFunction":
        if not self.is_piecewise_constant():
            raise DegreeOverflowError(self.degree + 1, operation="reciprocal of a non-constant piece")
        values = [p.coef[0] for p in self.pieces]
        if any(v == 0.0 for v in values):
            raise ZeroDivisionError("reciprocal of a unit-cell function with a zero piece")
        return UnitCellFunction.piecewise_constant(self.edges, [1.0 / v for v in values])

    # algebra

    def __add__(self, other: Union["UnitCellFunction", Scalar]) -> "UnitCellFunction":
        if isinstance(other, UnitCellFunction):
            a, b = self._aligned(other)
            return UnitCellFunction(a.edges, tuple(p + q for p, q in zip(a.pieces, b.pieces)))
        return self.map_pieces(lambda p: p + float(other))

    __radd__ = __add__

    def __neg__(self) -> "UnitCellFunction":
        return self.map_pieces(lambda p: -p)

    def __sub__(self, other: Union["UnitCellFunction", Scalar]) -> "UnitCellFunction":
        return self + (-other)

    def __rsub__(self, other: Scalar) -> "UnitCellFunction":
        return (-self) + other

    def __mul__(self, other: Union["UnitCellFunction", Scalar]) -> "UnitCellFunction":
        if isinstance(other, UnitCellFunction):
            a, b = self._aligned(other)
            pieces = []
            for p, q in zip(a.pieces, b.pieces):
                if p.degree() + q.degree() > MAX_DEGREE:
                    raise DegreeOverflowError(p.degree() + q.degree())
                pieces.append(p * q)
            return UnitCellFunction(a.edges, tuple(pieces))
        return self.map_pieces(lambda p: p * float(other))

    __rmul__ = __mul__

    def __truediv__(self, other: Union["UnitCellFunction", Scalar]) -> "UnitCellFunction":
        if isinstance(other, UnitCellFunction):
            return self * other.reciprocal()
        return self * (1.0 / float(other))

    def __rtruediv__(self, other: Scalar) -> "UnitCellFunction":
        return self.reciprocal() * float(other)

    def __repr__(self) -> str:
        return f"UnitCellFunction(n_pieces={self.n_pieces}, degree={self.degree}, mean={self.mean():.6g})"


def mean(f: UnitCellFunction) -> float:
    return f.mean()


def integrate_product(f: UnitCellFunction, g: UnitCellFunction) -> float:
    """<f g> without keeping the product around."""
    return (f * g).mean()


@dataclass(frozen=True)
class MaterialProfile:
    sigma: UnitCellFunction
    gamma: UnitCellFunction
    rho: Optional[UnitCellFunction] = None
    c_specific: Optional[float] = None

    def __post_init__(self) -> None:
        if self.sigma.minimum() <= 0.0:
            raise LaminateValidationError("sigma", self.sigma.minimum(), "conductivity must be strictly positive")
        if self.gamma.minimum() <= 0.0:
            raise LaminateValidationError("gamma", self.gamma.minimum(), "capacity must be strictly positive")
        if self.rho is not None and self.rho.minimum() <= 0.0:
            raise LaminateValidationError("rho", self.rho.minimum(), "density must be strictly positive")
        if self.c_specific is not None:
            object.__setattr__(self, "c_specific", _require_positive("c", self.c_specific))
        if self.rho is not None and self.c_specific is not None:
            mismatch = (self.gamma - self.rho * self.c_specific).max_abs()
            if mismatch > 1e-12 * self.gamma.max_abs():
                raise LaminateValidationError("gamma", mismatch, "gamma must equal c * rho pointwise")

    @classmethod
    def from_density(cls, sigma: UnitCellFunction, rho: UnitCellFunction, c_specific: float) -> "MaterialProfile":
        c_value = _require_positive("c", c_specific)
        return cls(sigma=sigma, gamma=rho * c_value, rho=rho, c_specific=c_value)


@dataclass(frozen=True)
class BilayerSpec:
    sigma_a: float
    sigma_b: float
    phi: float
    h: float
    v_m: float
    gamma_a: Optional[float] = None
    gamma_b: Optional[float] = None
    rho_a: Optional[float] = None
    rho_b: Optional[float] = None
    c: Optional[float] = None
    model: Model = Model.MODEL1

    def __post_init__(self) -> None:
        object.__setattr__(self, "model", Model.parse(self.model.value if isinstance(self.model, Model) else self.model))
        object.__setattr__(self, "sigma_a", _require_positive("sigma_a", self.sigma_a))
        object.__setattr__(self, "sigma_b", _require_positive("sigma_b", self.sigma_b))
        object.__setattr__(self, "h", _require_positive("h", self.h))
        object.__setattr__(self, "v_m", _require_finite("v_m", self.v_m))
        phi = _require_finite("phi", self.phi)
        if not 0.0 < phi < 1.0:
            raise LaminateValidationError("phi", self.phi, "volume fraction must lie in (0, 1)")
        object.__setattr__(self, "phi", phi)
        has_density = self.rho_a is not None or self.rho_b is not None
        if self.model is Model.MODEL2 or has_density:
            for name in ("rho_a", "rho_b", "c"):
                if getattr(self, name) is None:
                    raise LaminateValidationError(name, None, "required for density modulation")
                object.__setattr__(self, name, _require_positive(name, getattr(self, name)))
            object.__setattr__(self, "gamma_a", self.c * self.rho_a)
            object.__setattr__(self, "gamma_b", self.c * self.rho_b)
        else:
            for name in ("gamma_a", "gamma_b"):
                if getattr(self, name) is None:
                    raise LaminateValidationError(name, None, "required for capacity modulation")
                object.__setattr__(self, name, _require_positive(name, getattr(self, name)))

    @property
    def sigma_pair(self) -> Tuple[float, float]:
        return self.sigma_a, self.sigma_b

    @property
    def gamma_pair(self) -> Tuple[float, float]:
        return float(self.gamma_a), float(self.gamma_b)

    @property
    def rho0(self) -> Optional[float]:
        if self.rho_a is None:
            return None
        return self.phi * self.rho_a + (1.0 - self.phi) * self.rho_b

    def replace(self, **changes: Any) -> "BilayerSpec":
        values: Dict[str, Any] = {
            "sigma_a": self.sigma_a,
            "sigma_b": self.sigma_b,
            "phi": self.phi,
            "h": self.h,
            "v_m": self.v_m,
            "model": self.model,
        }
        if self.rho_a is not None:
            values.update(rho_a=self.rho_a, rho_b=self.rho_b, c=self.c)
        else:
            values.update(gamma_a=self.gamma_a, gamma_b=self.gamma_b)
        values.update(changes)
        return BilayerSpec(**values)


@dataclass(frozen=True)
class LaminateSpec:
    profile: MaterialProfile
    h: float
    v_m: float
    model: Model = Model.MODEL1
    bilayer: Optional[BilayerSpec] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "h", _require_positive("h", self.h))
        object.__setattr__(self, "v_m", _require_finite("v_m", self.v_m))
        object.__setattr__(self, "model", Model.parse(self.model.value if isinstance(self.model, Model) else self.model))
        if self.model is Model.MODEL2 and (self.profile.rho is None or self.profile.c_specific is None):
            raise LaminateValidationError("rho", None, "model2 requires rho and c")

    @property
    def is_sigma_constant(self) -> bool:
        return self.profile.sigma.is_constant()

    @property
    def is_gamma_constant(self) -> bool:
        return self.profile.gamma.is_constant()

    @property
    def is_rho_constant(self) -> bool:
        return self.profile.rho is None or self.profile.rho.is_constant()

    @classmethod
    def from_profile_table(
        cls,
        rows: Sequence[Dict[str, Any]],
        h: float,
        v_m: float,
        model: Union[Model, str] = Model.MODEL1,
        c_specific: Optional[float] = None,
    ) -> "LaminateSpec":
        """
        Piecewise-constant laminate from rows {breakpoint, sigma, gamma|rho}.

        ``breakpoint`` is the left end of the piece as a fraction of the period.
        """
        if not rows:
            raise LaminateValidationError("profile", rows, "at least one piece required")
        model = Model.parse(model.value if isinstance(model, Model) else model)
        starts = [_require_finite("profile.breakpoint", row.get("breakpoint")) for row in rows]
        if abs(starts[0]) > BREAKPOINT_MERGE_TOL:
            raise LaminateValidationError("profile.breakpoint", starts[0], "first piece must start at 0")
        edges = np.array(starts + [1.0])
        if np.any(np.diff(edges) <= 0.0):
            raise LaminateValidationError("profile.breakpoint", starts, "breakpoints must increase inside [0, 1)")
        sigma = UnitCellFunction.piecewise_constant(
            edges, [_require_positive("profile.sigma", row.get("sigma")) for row in rows]
        )
        if model is Model.MODEL2:
            if c_specific is None:
                raise LaminateValidationError("c", None, "model2 profile requires c")
            rho = UnitCellFunction.piecewise_constant(
                edges, [_require_positive("profile.rho", row.get("rho")) for row in rows]
            )
            profile = MaterialProfile.from_density(sigma, rho, c_specific)
        else:
            gamma = UnitCellFunction.piecewise_constant(
                edges, [_require_positive("profile.gamma", row.get("gamma")) for row in rows]
            )
            profile = MaterialProfile(sigma=sigma, gamma=gamma)
        return cls(profile=profile, h=h, v_m=v_m, model=model)


def make_bilayer(spec: BilayerSpec) -> LaminateSpec:
    """Phase A on [0, phi), phase B on [phi, 1)."""
    edges = [0.0, spec.phi, 1.0]
    sigma = UnitCellFunction.piecewise_constant(edges, spec.sigma_pair)
    if spec.rho_a is not None:
        rho = UnitCellFunction.piecewise_constant(edges, [spec.rho_a, spec.rho_b])
        profile = MaterialProfile.from_density(sigma, rho, float(spec.c))
    else:
        gamma = UnitCellFunction.piecewise_constant(edges, spec.gamma_pair)
        profile = MaterialProfile(sigma=sigma, gamma=gamma)
    return LaminateSpec(profile=profile, h=spec.h, v_m=spec.v_m, model=spec.model, bilayer=spec)


def eta_for_gaussian(h: float, nu: float) -> float:
    """eta = kappa_star h with kappa_star = 2 pi / (6 nu)."""
    return 2.0 * math.pi * _require_positive("h", h) / (6.0 * _require_positive("nu", nu))


@dataclass(frozen=True)
class ScaleSet:
    kappa_star: float
    sigma_star: float
    gamma_star: float
    theta_star: float = 1.0
    rho_star: Optional[float] = None

    def __post_init__(self) -> None:
        for name in ("kappa_star", "sigma_star", "gamma_star", "theta_star"):
            object.__setattr__(self, name, _require_positive(name, getattr(self, name)))
        if self.rho_star is not None:
            object.__setattr__(self, "rho_star", _require_positive("rho_star", self.rho_star))

    @property
    def alpha_star(self) -> float:
        return self.sigma_star / self.gamma_star

    @property
    def v_star(self) -> float:
        return self.alpha_star * self.kappa_star

    @property
    def c_star(self) -> Optional[float]:
        if self.rho_star is None:
            return None
        return self.gamma_star / self.rho_star

    @property
    def omega_star(self) -> float:
        """Frequency scale: t = omega_star * tau."""
        return self.alpha_star * self.kappa_star ** 2

    def eta(self, h: float) -> float:
        return self.kappa_star * _require_positive("h", h)

    def kappa_to_nondim(self, kappa: Any) -> Any:
        return np.asarray(kappa) / self.kappa_star

    def kappa_to_dim(self, k: Any) -> Any:
        return np.asarray(k) * self.kappa_star

    def omega_to_nondim(self, omega: Any) -> Any:
        return np.asarray(omega) / self.omega_star

    def omega_to_dim(self, w: Any) -> Any:
        return np.asarray(w) * self.omega_star

    def theta_to_nondim(self, theta: Any) -> Any:
        return np.asarray(theta) / self.theta_star

    def theta_to_dim(self, value: Any) -> Any:
        return np.asarray(value) * self.theta_star

    @classmethod
    def default_for(cls, spec: LaminateSpec, kappa_star: float = 1.0) -> "ScaleSet":
        """sigma* makes <1/sigma> = 1, gamma* and rho* are the arithmetic means."""
        sigma_star = 1.0 / (1.0 / spec.profile.sigma).mean()
        gamma_star = spec.profile.gamma.mean()
        rho_star = spec.profile.rho.mean() if spec.profile.rho is not None else None
        return cls(kappa_star=kappa_star, sigma_star=sigma_star, gamma_star=gamma_star, rho_star=rho_star)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kappa_star": self.kappa_star,
            "sigma_star": self.sigma_star,
            "gamma_star": self.gamma_star,
            "theta_star": self.theta_star,
            "rho_star": self.rho_star,
            "alpha_star": self.alpha_star,
            "v_star": self.v_star,
        }


@dataclass(frozen=True)
class NondimProblem:
    sigma: UnitCellFunction
    gamma: UnitCellFunction
    v: float
    eta: float
    model: Model
    scales: ScaleSet
    h: float
    rho: Optional[UnitCellFunction] = None
    c: Optional[float] = None
    source: Optional[LaminateSpec] = field(default=None, repr=False)


def nondimensionalize(spec: LaminateSpec, scales: ScaleSet) -> NondimProblem:
    profile = spec.profile
    rho = None
    c_value = None
    if spec.model is Model.MODEL2 or profile.rho is not None:
        if scales.rho_star is None:
            raise LaminateValidationError("rho_star", None, "density scale required for model2")
        rho = profile.rho / scales.rho_star
        c_value = float(profile.c_specific) / float(scales.c_star)
    return NondimProblem(
        sigma=profile.sigma / scales.sigma_star,
        gamma=profile.gamma / scales.gamma_star,
        v=spec.v_m / scales.v_star,
        eta=scales.eta(spec.h),
        model=spec.model,
        scales=scales,
        h=spec.h,
        rho=rho,
        c=c_value,
        source=spec,
    )


def dimensionalize(problem: NondimProblem) -> LaminateSpec:
    scales = problem.scales
    sigma = problem.sigma * scales.sigma_star
    if problem.rho is not None:
        rho = problem.rho * scales.rho_star
        c_value = float(problem.c) * float(scales.c_star)
        profile = MaterialProfile(sigma=sigma, gamma=problem.gamma * scales.gamma_star, rho=rho, c_specific=c_value)
    else:
        profile = MaterialProfile(sigma=sigma, gamma=problem.gamma * scales.gamma_star)
    h = problem.eta / scales.kappa_star
    return LaminateSpec(profile=profile, h=h, v_m=problem.v * scales.v_star, model=problem.model)
