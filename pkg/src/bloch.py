"""
Exact Floquet-Bloch dispersion of a space-time modulated bilayer.

In the moving frame xi = X - v_m tau the coefficients depend on xi only. Inside
phase j the field is a combination of exp(r_j^+ xi) and exp(r_j^- xi); the four
layer amplitudes satisfy a 4x4 homogeneous system (continuity of the field and
of the flux at phi h, Floquet conditions at h). Its determinant vanishes on the
dispersion branches.

The matrix is kept as exponents X and prefactors F with entries F * exp(X) so
that scaled determinants never overflow.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.special import roots_legendre

from constants import (
    CONTINUATION_JUMP_FACTOR,
    DEFAULT_KAPPA_POINTS,
    GAUSS_LEGENDRE_NODES,
    MAX_KAPPA_HALVINGS,
    MAX_QUADRISECTION_DEPTH,
    NEWTON_MAX_ITER,
    NEWTON_SLOW_ITER,
    NEWTON_STEP_RTOL,
    ROOT_RESIDUAL_TOL,
)
from effective import effective_prediction
from laminate import BilayerSpec, LaminateValidationError, Model, make_bilayer

_log = logging.getLogger(__name__)

_SPLIT_FRACTION = 0.5371
_MAX_CONTOUR_REFINEMENTS = 14
_PHASE_STEP_LIMIT = math.pi / 3.0


class BlochStructureError(ArithmeticError):
    def __init__(self, row: int):
        self.row = row
        super().__init__(f"Floquet-Bloch matrix row {row} vanishes identically")


class Frame(str, Enum):
    MOVING = "moving"
    FIXED = "fixed"


@dataclass(frozen=True)
class BlochMatrix:
    kappa_tilde: float
    omega_tilde: Union[complex, np.ndarray]
    exponents: np.ndarray
    prefactors: np.ndarray
    r_plus: np.ndarray
    r_minus: np.ndarray
    sqrt_delta: np.ndarray
    sigma: Tuple[float, float]
    model: Model
    h: float

    @property
    def entries(self) -> np.ndarray:
        """Unscaled entries F * exp(X); may overflow for thick or fast layers."""
        with np.errstate(over="ignore"):
            return self.prefactors * np.exp(self.exponents)

    @property
    def root_gap(self) -> np.ndarray:
        """r_j^+ - r_j^- = sqrt(Delta_j) / sigma_j."""
        return self.sqrt_delta / np.asarray(self.sigma)


@dataclass(frozen=True)
class DispersionBranch:
    kappa: np.ndarray
    omega: np.ndarray
    frame: Frame
    branch_index: int
    residuals: np.ndarray
    converged: np.ndarray
    v_m: float
    model: Model = Model.MODEL1
    iterations: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    def in_frame(self, frame: Union[Frame, str]) -> "DispersionBranch":
        """Omega = Omega_tilde + v_m kappa; kappa is frame independent."""
        frame = Frame(frame)
        if frame is self.frame:
            return self
        shift = self.v_m * self.kappa
        omega = self.omega + shift if frame is Frame.FIXED else self.omega - shift
        return replace(self, omega=omega, frame=frame)

    @property
    def n_failed(self) -> int:
        return int(np.count_nonzero(~self.converged))


# layer exponents and matrix


def _advection(bilayer: BilayerSpec, model: Model) -> Tuple[float, float]:
    v = bilayer.v_m
    if model is Model.MODEL2:
        if bilayer.rho0 is None:
            raise LaminateValidationError("bilayer.rho_a", None, "model2 dispersion needs rho_a, rho_b and c")
        b = v * float(bilayer.c) * float(bilayer.rho0)
        return b, b
    return v * bilayer.gamma_a, v * bilayer.gamma_b


def layer_exponents(
    sigma: float, gamma: float, b: float, omega_tilde: Union[complex, np.ndarray]
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Roots of sigma r^2 + b r - i omega_tilde gamma = 0.

    Returns (r_plus, r_minus, sqrt_delta) with r_plus - r_minus = sqrt_delta / sigma.
    The root with the larger modulus comes from q = -(b + s sqrt_delta) / 2, the
    other from the product of roots, so neither suffers cancellation.
    """
    omega_tilde = np.asarray(omega_tilde, dtype=complex)
    const = -1j * omega_tilde * gamma
    delta = b * b - 4.0 * sigma * const
    root = np.sqrt(delta)
    s = np.where(b * root.real >= 0.0, 1.0, -1.0)
    q = -0.5 * (b + s * root)
    degenerate = q == 0.0
    safe_q = np.where(degenerate, 1.0, q)
    near = q / sigma
    far = np.where(degenerate, 0.0, const / safe_q)
    r_plus = np.where(s > 0.0, far, near)
    r_minus = np.where(s > 0.0, near, far)
    return r_plus, r_minus, root


def assemble(
    kappa_tilde: float,
    omega_tilde: Union[complex, np.ndarray],
    bilayer: BilayerSpec,
    model: Optional[Model] = None,
) -> BlochMatrix:
    """Exponents and prefactors of the 4x4 system for amplitudes (a+, a-, b+, b-)."""
    model = bilayer.model if model is None else Model(model)
    h, phi, v = bilayer.h, bilayer.phi, bilayer.v_m
    sa, sb = bilayer.sigma_pair
    ga, gb = bilayer.gamma_pair
    ba, bb = _advection(bilayer, model)
    omega_tilde = np.asarray(omega_tilde, dtype=complex)

    ra_p, ra_m, root_a = layer_exponents(sa, ga, ba, omega_tilde)
    rb_p, rb_m, root_b = layer_exponents(sb, gb, bb, omega_tilde)

    shape = omega_tilde.shape + (4, 4)
    X = np.zeros(shape, dtype=complex)
    F = np.zeros(shape, dtype=complex)
    bloch = -1j * kappa_tilde * h

    if model is Model.MODEL1:
        jump_b = v * (gb - ga)
        flux_a, flux_b = v * ga, v * gb
    else:
        jump_b = flux_a = flux_b = 0.0

    for col, (r, sig, sign, layer) in enumerate(
        ((ra_p, sa, 1.0, "A"), (ra_m, sa, 1.0, "A"), (rb_p, sb, -1.0, "B"), (rb_m, sb, -1.0, "B"))
    ):
        if layer == "A":
            X[..., 0, col] = bloch
            X[..., 1, col] = bloch
            F[..., 0, col] = 1.0
            F[..., 1, col] = sig * r
            F[..., 3, col] = sig * r + flux_a
        else:
            X[..., 0, col] = r * h
            X[..., 1, col] = r * h
            F[..., 0, col] = -1.0
            F[..., 1, col] = -(sig * r + jump_b)
            F[..., 3, col] = -(sig * r + flux_b)
        X[..., 2, col] = r * phi * h
        X[..., 3, col] = r * phi * h
        F[..., 2, col] = sign

    return BlochMatrix(
        kappa_tilde=float(kappa_tilde),
        omega_tilde=omega_tilde if omega_tilde.ndim else complex(omega_tilde),
        exponents=X,
        prefactors=F,
        r_plus=np.stack([ra_p, rb_p], axis=-1),
        r_minus=np.stack([ra_m, rb_m], axis=-1),
        sqrt_delta=np.stack([root_a, root_b], axis=-1),
        sigma=(sa, sb),
        model=model,
        h=h,
    )


@dataclass(frozen=True)
class _Scaling:
    column_shift: np.ndarray
    row_scale: np.ndarray
    weight: np.ndarray


def _scaled_matrix(M: BlochMatrix, scaling: Optional[_Scaling] = None) -> Tuple[np.ndarray, _Scaling]:
    X, F = M.exponents, M.prefactors
    if scaling is None:
        shift = np.max(X.real, axis=-2, keepdims=True)
        with np.errstate(under="ignore"):
            scaled = F * np.exp(X - shift)
        row_scale = np.max(np.abs(scaled), axis=-1, keepdims=True)
        scaling = _Scaling(shift, row_scale, np.ones(X.shape[:-2]))
    else:
        with np.errstate(under="ignore", over="ignore"):
            scaled = F * np.exp(X - scaling.column_shift)
    with np.errstate(invalid="ignore", divide="ignore"):
        return scaled / scaling.row_scale, scaling


def det_scaled(M: BlochMatrix) -> Union[complex, np.ndarray]:
    """
    det M after shifting every column by exp(-max Re X) and dividing every row
    by its largest modulus. Both factors are positive reals, so the zero set and
    the phase of det M are unchanged.
    """
    scaled, scaling = _scaled_matrix(M)
    empty = np.asarray(scaling.row_scale[..., 0] == 0.0)
    if np.any(empty):
        row = int(np.argwhere(empty)[0][-1])
        raise BlochStructureError(row)
    det = np.linalg.det(scaled)
    return complex(det) if np.ndim(det) == 0 else det


def _characteristic(
    M: BlochMatrix, scaling: Optional[_Scaling] = None
) -> Tuple[Union[complex, np.ndarray], _Scaling]:
    fresh = scaling is None
    scaled, scaling = _scaled_matrix(M, scaling)
    if fresh:
        norms = np.abs(M.r_plus) + np.abs(M.r_minus) + 1.0 / M.h
        scaling = replace(scaling, weight=np.prod(norms, axis=-1))
    with np.errstate(invalid="ignore", divide="ignore"):
        value = np.linalg.det(scaled) * scaling.weight / np.prod(M.root_gap, axis=-1)
    return value, scaling


def characteristic(
    kappa_tilde: float,
    omega_tilde: Union[complex, np.ndarray],
    bilayer: BilayerSpec,
    model: Optional[Model] = None,
) -> Union[complex, np.ndarray]:
    """
    Reduced dispersion function det M / ((r_A^+ - r_A^-)(r_B^+ - r_B^-)) up to a
    positive factor. It is single valued in omega_tilde and free of the spurious
    zeros where a layer's two exponents coincide.
    """
    value, _ = _characteristic(assemble(kappa_tilde, omega_tilde, bilayer, model))
    return complex(value) if np.ndim(value) == 0 else value


def uniform_ladder(sigma: float, gamma: float, v_m: float, h: float, kappa: float, m: int) -> complex:
    """Fixed-frame Floquet ladder of a homogeneous medium: i sigma k^2 / gamma - v_m 2 pi m / h."""
    k = kappa + 2.0 * math.pi * m / h
    return 1j * sigma * k * k / gamma - v_m * 2.0 * math.pi * m / h


def frequency_scale(bilayer: BilayerSpec) -> float:
    """Diffusive frequency at the edge of the Brillouin zone of the stiffest phase."""
    sigma_max = max(bilayer.sigma_pair)
    gamma_min = min(bilayer.gamma_pair)
    return sigma_max / gamma_min * (math.pi / bilayer.h) ** 2


# Newton


@dataclass
class _NewtonResult:
    omega: complex
    iterations: int
    converged: bool
    residual: float


def _fixed_char(kappa: float, omega: complex, bilayer: BilayerSpec, model: Model, scaling: Optional[_Scaling]):
    M = assemble(kappa, omega - bilayer.v_m * kappa, bilayer, model)
    return _characteristic(M, scaling)


def _residual(kappa: float, omega: complex, bilayer: BilayerSpec, model: Model) -> float:
    try:
        return abs(det_scaled(assemble(kappa, omega - bilayer.v_m * kappa, bilayer, model)))
    except BlochStructureError:
        return math.inf


def newton_root(
    kappa: float,
    omega0: complex,
    bilayer: BilayerSpec,
    model: Optional[Model] = None,
    tol: float = ROOT_RESIDUAL_TOL,
    max_iter: int = NEWTON_MAX_ITER,
) -> _NewtonResult:
    """
    Damped complex Newton on the reduced dispersion function, unknown is the
    fixed-frame frequency. Scaling factors are frozen within an iteration so
    the function being differentiated is analytic.
    """
    model = bilayer.model if model is None else Model(model)
    scale = frequency_scale(bilayer)
    floor = 1e-8 * scale
    omega = complex(omega0)
    if bilayer.v_m == 0.0 and kappa == 0.0 and abs(omega) <= 1e-6 * scale:
        return _NewtonResult(0j, 0, True, 0.0)

    iterations = 0
    converged = False
    for iterations in range(1, max_iter + 1):
        f0, scaling = _fixed_char(kappa, omega, bilayer, model, None)
        f0 = complex(f0)
        if f0 == 0.0:
            converged = True
            break
        if not np.isfinite(f0):
            break
        delta = 1e-6 * max(abs(omega), scale)
        f_plus, _ = _fixed_char(kappa, omega + delta, bilayer, model, scaling)
        f_minus, _ = _fixed_char(kappa, omega - delta, bilayer, model, scaling)
        derivative = (complex(f_plus) - complex(f_minus)) / (2.0 * delta)
        if derivative == 0.0 or not np.isfinite(derivative):
            break
        step = -f0 / derivative
        for _ in range(30):
            trial, _ = _fixed_char(kappa, omega + step, bilayer, model, scaling)
            trial = complex(trial)
            if np.isfinite(trial) and abs(trial) <= abs(f0):
                break
            step *= 0.5
        omega = omega + step
        if abs(step) <= NEWTON_STEP_RTOL * max(abs(omega), floor):
            converged = True
            break

    residual = _residual(kappa, omega, bilayer, model)
    return _NewtonResult(omega, iterations, converged and residual <= tol, residual)


# single branch by continuation


GuessType = Union[None, complex, Callable[[float], complex]]


def _default_predictor(bilayer: BilayerSpec, model: Model) -> Callable[[float], complex]:
    spec = make_bilayer(bilayer if bilayer.model is model else bilayer.replace(model=model))
    return effective_prediction(spec, order=2)


def find_branch(
    bilayer: BilayerSpec,
    model: Optional[Model] = None,
    kappa_grid: Optional[Sequence[float]] = None,
    initial_guess: GuessType = None,
    tol: float = ROOT_RESIDUAL_TOL,
    branch_index: int = 0,
) -> DispersionBranch:
    """
    One dispersion branch by Newton continuation along kappa_grid.

    The guess at the next wavenumber is the predictor value shifted by the
    offset observed at the previous one; the kappa step is halved when Newton
    is slow or fails.
    """
    model = bilayer.model if model is None else Model(model)
    if kappa_grid is None:
        kappa_grid = np.linspace(0.0, math.pi / bilayer.h, DEFAULT_KAPPA_POINTS)
    kappa = np.asarray(kappa_grid, dtype=float)
    if kappa.size > 1:
        steps = np.diff(kappa)
        if not (np.all(steps > 0.0) or np.all(steps < 0.0)):
            raise ValueError("kappa_grid must be strictly monotone")

    if callable(initial_guess):
        predictor = initial_guess
        first = complex(predictor(float(kappa[0])))
    else:
        predictor = _default_predictor(bilayer, model)
        first = complex(predictor(float(kappa[0]))) if initial_guess is None else complex(initial_guess)

    scale = frequency_scale(bilayer)
    omegas = np.full(kappa.size, np.nan + 0j)
    residuals = np.full(kappa.size, np.inf)
    converged = np.zeros(kappa.size, dtype=bool)
    iterations = np.zeros(kappa.size, dtype=int)

    result = newton_root(float(kappa[0]), first, bilayer, model, tol)
    omegas[0], residuals[0], converged[0], iterations[0] = result.omega, result.residual, result.converged, result.iterations
    if not result.converged:
        _log.warning("Newton did not converge at kappa=%.6g (residual %.3e)", kappa[0], result.residual)
    k_prev, w_prev = float(kappa[0]), result.omega
    offset = w_prev - complex(predictor(k_prev))

    for i in range(1, kappa.size):
        target = float(kappa[i])
        step = target - k_prev
        halvings = 0
        k_cur, w_cur, off_cur = k_prev, w_prev, offset
        while True:
            k_try = k_cur + step
            if (step > 0.0 and k_try > target) or (step < 0.0 and k_try < target):
                k_try = target
            predicted = complex(predictor(k_try))
            guess = predicted + off_cur
            result = newton_root(k_try, guess, bilayer, model, tol)
            slow = result.iterations > NEWTON_SLOW_ITER
            if (not result.converged or slow) and halvings < MAX_KAPPA_HALVINGS:
                step *= 0.5
                halvings += 1
                continue
            if result.converged:
                expected = abs(guess - w_cur) + 1e-6 * scale
                if abs(result.omega - guess) > CONTINUATION_JUMP_FACTOR * expected:
                    _log.warning(
                        "possible branch switch near kappa=%.6g: |dOmega|=%.3e vs predicted %.3e",
                        k_try,
                        abs(result.omega - w_cur),
                        abs(guess - w_cur),
                    )
                k_cur, w_cur = k_try, result.omega
                off_cur = w_cur - predicted
            if k_try == target or not result.converged:
                break
        if not result.converged:
            _log.warning("Newton failed at kappa=%.6g (residual %.3e); point flagged", target, result.residual)
        omegas[i] = result.omega
        residuals[i] = result.residual
        converged[i] = result.converged
        iterations[i] = result.iterations
        if result.converged:
            k_prev, w_prev, offset = target, result.omega, result.omega - complex(predictor(target))

    return DispersionBranch(
        kappa=kappa,
        omega=omegas,
        frame=Frame.FIXED,
        branch_index=branch_index,
        residuals=residuals,
        converged=converged,
        v_m=bilayer.v_m,
        model=model,
        iterations=iterations,
    )


# several branches by the argument principle


@dataclass(frozen=True)
class SearchRectangle:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def contains(self, z: complex, margin: float = 0.0) -> bool:
        dx = margin * (self.re_max - self.re_min)
        dy = margin * (self.im_max - self.im_min)
        return (self.re_min - dx <= z.real <= self.re_max + dx) and (self.im_min - dy <= z.imag <= self.im_max + dy)

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))

    def split(self) -> List["SearchRectangle"]:
        re_mid = self.re_min + _SPLIT_FRACTION * (self.re_max - self.re_min)
        im_mid = self.im_min + _SPLIT_FRACTION * (self.im_max - self.im_min)
        return [
            SearchRectangle(self.re_min, re_mid, self.im_min, im_mid),
            SearchRectangle(re_mid, self.re_max, self.im_min, im_mid),
            SearchRectangle(self.re_min, re_mid, im_mid, self.im_max),
            SearchRectangle(re_mid, self.re_max, im_mid, self.im_max),
        ]


def default_rectangle(bilayer: BilayerSpec, model: Model, kappa: float, n: int) -> SearchRectangle:
    """Fixed-frame search window large enough for the first n Floquet harmonics."""
    m = math.ceil(n / 2)
    k_max = abs(kappa) + 2.0 * math.pi * m / bilayer.h
    sigma_max = max(bilayer.sigma_pair)
    gamma_min = min(bilayer.gamma_pair)
    im_max = 4.0 * sigma_max * k_max ** 2 / gamma_min
    drift = 1.0
    if model is Model.MODEL2 and bilayer.rho0 is not None:
        drift = max(1.0, float(bilayer.c) * bilayer.rho0 / gamma_min)
    re_half = 2.0 * abs(bilayer.v_m) * drift * k_max + 0.1 * im_max
    return SearchRectangle(-re_half, re_half, -0.05 * im_max, im_max)


def _edge_phase(kappa: float, z0: complex, z1: complex, bilayer: BilayerSpec, model: Model) -> float:
    nodes, _ = roots_legendre(GAUSS_LEGENDRE_NODES)
    t = np.concatenate(([0.0], 0.5 * (nodes + 1.0), [1.0]))
    dphi = np.zeros(0)
    for _ in range(_MAX_CONTOUR_REFINEMENTS):
        z = z0 + (z1 - z0) * t
        values, _ = _fixed_char(kappa, z, bilayer, model, None)
        values = np.asarray(values)
        finite = np.isfinite(values) & (values != 0.0)
        if not np.all(finite):
            t = np.delete(t, np.flatnonzero(~finite))
            continue
        dphi = np.angle(values[1:] / values[:-1])
        bad = np.flatnonzero(np.abs(dphi) > _PHASE_STEP_LIMIT)
        if bad.size == 0:
            return float(np.sum(dphi))
        t = np.sort(np.concatenate((t, 0.5 * (t[bad] + t[bad + 1]))))
    _log.warning("contour phase not resolved on edge %s -> %s at kappa=%.6g", z0, z1, kappa)
    return float(np.sum(dphi))


def count_roots(kappa: float, rect: SearchRectangle, bilayer: BilayerSpec, model: Model) -> int:
    """Zeros of the reduced dispersion function inside rect (argument principle)."""
    corners = [
        complex(rect.re_min, rect.im_min),
        complex(rect.re_max, rect.im_min),
        complex(rect.re_max, rect.im_max),
        complex(rect.re_min, rect.im_max),
    ]
    total = sum(_edge_phase(kappa, corners[i], corners[(i + 1) % 4], bilayer, model) for i in range(4))
    winding = total / (2.0 * math.pi)
    count = int(round(winding))
    if abs(winding - count) > 0.1:
        _log.warning("non-integer winding %.3f at kappa=%.6g", winding, kappa)
    return max(count, 0)


def _roots_in(
    kappa: float, rect: SearchRectangle, count: int, bilayer: BilayerSpec, model: Model, tol: float, depth: int
) -> List[Tuple[complex, _NewtonResult]]:
    if count == 0:
        return []
    if count == 1 or depth >= MAX_QUADRISECTION_DEPTH:
        result = newton_root(kappa, rect.center, bilayer, model, tol)
        if result.converged and rect.contains(result.omega, margin=0.1):
            return [(result.omega, result)] * count
        if depth >= MAX_QUADRISECTION_DEPTH:
            _log.warning("Newton polish left its box at kappa=%.6g depth=%d", kappa, depth)
            return [(result.omega, result)] * count
    found: List[Tuple[complex, _NewtonResult]] = []
    for child in rect.split():
        child_count = count_roots(kappa, child, bilayer, model)
        found.extend(_roots_in(kappa, child, child_count, bilayer, model, tol, depth + 1))
    return found


def find_branches(
    bilayer: BilayerSpec,
    model: Optional[Model] = None,
    kappa: Optional[Sequence[float]] = None,
    n: int = 3,
    rect: Optional[SearchRectangle] = None,
    tol: float = ROOT_RESIDUAL_TOL,
) -> List[DispersionBranch]:
    """
    The n least damped roots at every kappa, located by winding counts on
    recursively quadrisected rectangles and polished by Newton. Branch j holds
    the j-th root in increasing Im(Omega) order.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    model = bilayer.model if model is None else Model(model)
    if kappa is None:
        kappa = np.linspace(0.0, math.pi / bilayer.h, 41)
    kappa = np.asarray(kappa, dtype=float)

    omegas = np.full((n, kappa.size), np.nan + 0j)
    residuals = np.full((n, kappa.size), np.inf)
    converged = np.zeros((n, kappa.size), dtype=bool)
    iterations = np.zeros((n, kappa.size), dtype=int)
    partial = 0
    for i, k in enumerate(kappa):
        window = rect if rect is not None else default_rectangle(bilayer, model, float(k), n)
        total = count_roots(float(k), window, bilayer, model)
        roots = _roots_in(float(k), window, total, bilayer, model, tol, 0)
        if bilayer.v_m == 0.0 and k == 0.0 and window.contains(0j) and not any(abs(w) == 0.0 for w, _ in roots):
            roots.append((0j, _NewtonResult(0j, 0, True, 0.0)))
        roots.sort(key=lambda item: (item[0].imag, item[0].real))
        if len(roots) < n:
            partial += 1
        for j, (omega, result) in enumerate(roots[:n]):
            omegas[j, i] = omega
            residuals[j, i] = result.residual
            converged[j, i] = result.converged
            iterations[j, i] = result.iterations
    if partial:
        _log.warning("fewer than %d roots in the search window at %d of %d wavenumbers", n, partial, kappa.size)

    return [
        DispersionBranch(
            kappa=kappa,
            omega=omegas[j],
            frame=Frame.FIXED,
            branch_index=j,
            residuals=residuals[j],
            converged=converged[j],
            v_m=bilayer.v_m,
            model=model,
            iterations=iterations[j],
        )
        for j in range(n)
    ]


def branches_table(branches: Sequence[DispersionBranch], frames: Sequence[Union[Frame, str]] = (Frame.FIXED, Frame.MOVING)) -> pd.DataFrame:
    """Long table branch,kappa,re_omega,im_omega,residual,frame."""
    parts = []
    for frame in frames:
        for branch in branches:
            view = branch.in_frame(frame)
            parts.append(
                pd.DataFrame(
                    {
                        "branch": branch.branch_index,
                        "kappa": view.kappa,
                        "re_omega": view.omega.real,
                        "im_omega": view.omega.imag,
                        "residual": view.residuals,
                        "frame": view.frame.value,
                    }
                )
            )
    if not parts:
        return pd.DataFrame(columns=["branch", "kappa", "re_omega", "im_omega", "residual", "frame"])
    return pd.concat(parts, ignore_index=True)


def parity_defects(forward: DispersionBranch, backward: DispersionBranch) -> Dict[str, float]:
    """
    A branch on kappa against its own evaluation on -kappa, fixed frame.

    For a real laminate Re(Omega) is odd and Im(Omega) even in kappa; the two
    defects measure how far the computed roots are from that. `max_asymmetry`
    is |Omega(kappa) - Omega(-kappa)|, nonzero exactly when the medium is
    non-reciprocal.
    """
    a = forward.in_frame(Frame.FIXED)
    b = backward.in_frame(Frame.FIXED)
    if a.kappa.shape != b.kappa.shape or not np.allclose(a.kappa, -b.kappa):
        raise ValueError("backward branch must sit on the negated kappa grid")
    ok = a.converged & b.converged
    scale = np.maximum(np.abs(a.omega), np.abs(b.omega))
    scale = np.where(scale > 0.0, scale, 1.0)

    def worst(values: np.ndarray) -> float:
        return float(np.max(values[ok])) if np.any(ok) else math.nan

    return {
        "points": int(np.count_nonzero(ok)),
        "max_re_odd_defect": worst(np.abs(a.omega.real + b.omega.real) / scale),
        "max_im_even_defect": worst(np.abs(a.omega.imag - b.omega.imag) / scale),
        "max_asymmetry": worst(np.abs(a.omega - b.omega) / scale),
    }
