"""
Periodic cell problems and homogenized coefficients.

Every corrector X solves the unit-cell problem

    d/dy [sigma X' + G] = H,   X 1-periodic and continuous,  <X> = 0,

with the flux sigma X' + G continuous across breakpoints. The pipeline below
assembles (G, H) for each corrector from lower-order results and collects the
averaged coefficients of the leading, first and second order mean-field
equations for both models.
"""

import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np
import pandas as pd

from constants import SOLVABILITY_TOL
from laminate import (
    BilayerSpec,
    LaminateSpec,
    Model,
    NondimProblem,
    ScaleSet,
    UnitCellFunction,
    integrate_product,
    nondimensionalize,
)

_log = logging.getLogger(__name__)

MODEL1_NAMES = ("P", "Q", "R", "S", "V", "A", "L", "M_corr", "N", "O", "B", "C")
MODEL2_NAMES = ("P", "S", "A", "M_corr", "C", "R_adv", "L_adv", "N_adv_corr", "B_adv")


class SolvabilityError(ArithmeticError):
    def __init__(self, problem: str, mean: float, tolerance: float):
        self.problem = problem
        self.mean = mean
        self.tolerance = tolerance
        super().__init__(
            f"cell problem {problem}: <H> = {mean:.3e} exceeds {tolerance:.1e}; "
            "the assembled right-hand side is inconsistent"
        )


class PipelineError(ValueError):
    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(reason)


@dataclass(frozen=True)
class CellProblem:
    sigma: UnitCellFunction
    G: UnitCellFunction
    H: UnitCellFunction
    name: str = "X"

    def __post_init__(self) -> None:
        if self.sigma.minimum() <= 0.0:
            raise PipelineError(f"cell problem {self.name}: sigma must be strictly positive")
        mean_h = self.H.mean()
        tolerance = SOLVABILITY_TOL * max(1.0, self.H.max_abs())
        if abs(mean_h) > tolerance:
            raise SolvabilityError(self.name, mean_h, tolerance)


@dataclass(frozen=True)
class Corrector:
    name: str
    value: UnitCellFunction
    slope: UnitCellFunction

    def __call__(self, y: Any) -> Any:
        return self.value(y)


def solve_cell(problem: CellProblem) -> Corrector:
    """
    Zero-mean periodic solution of d/dy[sigma X' + G] = H.

    sigma X' + G = int_0^y H + c0, with c0 fixed by <X'> = 0.
    """
    inv_sigma = 1.0 / problem.sigma
    primitive = (problem.H - problem.H.mean()).antiderivative()
    c0 = ((problem.G * inv_sigma).mean() - (primitive * inv_sigma).mean()) / inv_sigma.mean()
    slope = (primitive + c0 - problem.G) * inv_sigma
    value = slope.antiderivative()
    value = value - value.mean()
    return Corrector(problem.name, value, slope)


def _zero_corrector(name: str) -> Corrector:
    zero = UnitCellFunction.constant(0.0)
    return Corrector(name, zero, zero)


@dataclass
class CorrectorSet:
    P: Optional[Corrector] = None
    Q: Optional[Corrector] = None
    R: Optional[Corrector] = None
    S: Optional[Corrector] = None
    V: Optional[Corrector] = None
    A: Optional[Corrector] = None
    L: Optional[Corrector] = None
    M_corr: Optional[Corrector] = None
    N: Optional[Corrector] = None
    O: Optional[Corrector] = None
    B: Optional[Corrector] = None
    C: Optional[Corrector] = None
    R_adv: Optional[Corrector] = None
    L_adv: Optional[Corrector] = None
    N_adv_corr: Optional[Corrector] = None
    B_adv: Optional[Corrector] = None

    def available(self) -> Dict[str, Corrector]:
        return {name: value for name, value in vars(self).items() if value is not None}

    def require(self, name: str) -> Corrector:
        value = getattr(self, name, None)
        if value is None:
            raise PipelineError(f"corrector {name} has not been computed")
        return value


@dataclass
class EffectiveCoefficients:
    model: str
    v: float
    eta: float
    h: float
    gamma0: float
    sigma0: float
    W0: float = 0.0
    rho0: Optional[float] = None
    c: Optional[float] = None
    d_xx: Optional[float] = None
    d_x: Optional[float] = None
    a_f: Optional[float] = None
    C1: Optional[float] = None
    C2: Optional[float] = None
    e_xxx: Optional[float] = None
    e_txx: Optional[float] = None
    e_tx: Optional[float] = None
    e_tt: Optional[float] = None
    e_xx: Optional[float] = None
    e_x: Optional[float] = None
    e_t: Optional[float] = None
    b_xx: Optional[float] = None
    b_x: Optional[float] = None
    b_t: Optional[float] = None
    b_0: Optional[float] = None
    adv_txx: Optional[float] = None
    adv_xx: Optional[float] = None
    adv_f_t: Optional[float] = None
    adv_f_xx: Optional[float] = None
    adv_f_x: Optional[float] = None
    N_gamma: Optional[float] = None
    N_sigma: Optional[float] = None
    N_adv: Optional[float] = None
    N_adv_reduced: Optional[float] = None
    beta1: Optional[float] = None
    beta2: Optional[float] = None
    beta3: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class CellPipeline:
    spec: LaminateSpec
    scales: ScaleSet
    problem: NondimProblem
    correctors: CorrectorSet
    coefficients: EffectiveCoefficients
    sigma_only: bool = False
    gamma_only: bool = False
    rho_only: bool = False
    notes: Dict[str, str] = field(default_factory=dict)


# order 0 and 1


def correctors_order1(problem: NondimProblem) -> Dict[str, Corrector]:
    sigma, gamma, v = problem.sigma, problem.gamma, problem.v
    zero = UnitCellFunction.constant(0.0)
    out = {"P": solve_cell(CellProblem(sigma, sigma, zero, "P"))}
    if problem.model is Model.MODEL1:
        out["Q"] = _zero_corrector("Q") if v == 0.0 else solve_cell(CellProblem(sigma, gamma * v, zero, "Q"))
    return out


def effective_order0(problem: NondimProblem, order1: Dict[str, Corrector]) -> Dict[str, float]:
    P = order1["P"]
    sigma0 = (problem.sigma * (P.slope + 1.0)).mean()
    gamma0 = problem.gamma.mean()
    W0 = 0.0
    if problem.model is Model.MODEL1:
        W0 = (problem.sigma * order1["Q"].slope).mean()
    return {"gamma0": gamma0, "sigma0": sigma0, "W0": W0}


def correctors_order2(
    problem: NondimProblem,
    order1: Dict[str, Corrector],
    order0: Dict[str, float],
) -> Dict[str, Corrector]:
    sigma, gamma, v = problem.sigma, problem.gamma, problem.v
    gamma0, sigma0, W0 = order0["gamma0"], order0["sigma0"], order0["W0"]
    P = order1["P"]
    zero = UnitCellFunction.constant(0.0)
    sigma_p = sigma * P.value
    out = {
        "S": solve_cell(CellProblem(sigma, sigma_p * (gamma0 / sigma0), gamma - gamma0, "S")),
        "A": solve_cell(CellProblem(sigma, sigma_p * (-1.0 / sigma0), zero, "A")),
    }
    if problem.model is Model.MODEL1:
        Q = order1["Q"]
        g_r = gamma * P.value * v + sigma * Q.value - sigma_p * (W0 / sigma0)
        h_r = -(sigma * Q.slope) + W0
        out["R"] = solve_cell(CellProblem(sigma, g_r, h_r, "R"))
        out["V"] = _zero_corrector("V") if v == 0.0 else solve_cell(CellProblem(sigma, gamma * Q.value * v, zero, "V"))
    return out


def first_order_sources(
    problem: NondimProblem,
    correctors: Dict[str, Corrector],
    order0: Dict[str, float],
) -> Dict[str, float]:
    """Coefficients of d_xx T0, d_x T0 and f driving the first-order mean field."""
    if problem.model is Model.MODEL2:
        return {"d_xx": 0.0, "d_x": 0.0, "a_f": 0.0}
    sigma, gamma = problem.sigma, problem.gamma
    gamma0, sigma0, W0 = order0["gamma0"], order0["sigma0"], order0["W0"]
    P, Q, R, V = (correctors[k] for k in ("P", "Q", "R", "V"))
    gamma_q = (gamma * Q.value).mean()
    d_xx = (sigma * (Q.value + R.slope)).mean() - (W0 / sigma0) * (sigma * P.value).mean() - (sigma0 / gamma0) * gamma_q
    d_x = (sigma * V.slope).mean() - (W0 / gamma0) * gamma_q
    a_f = -gamma_q / gamma0
    return {"d_xx": d_xx, "d_x": d_x, "a_f": a_f}


# order 2


def correctors_order3(
    problem: NondimProblem,
    correctors: Dict[str, Corrector],
    order0: Dict[str, float],
    sources1: Dict[str, float],
) -> Tuple[Dict[str, Corrector], float, float]:
    sigma, gamma, v = problem.sigma, problem.gamma, problem.v
    gamma0, sigma0, W0 = order0["gamma0"], order0["sigma0"], order0["W0"]
    zero = UnitCellFunction.constant(0.0)
    P, S, A = correctors["P"], correctors["S"], correctors["A"]
    sigma_p = sigma * P.value

    out = {
        "M_corr": solve_cell(
            CellProblem(sigma, sigma * S.value, -(sigma * S.slope) + gamma * P.value - sigma_p * (gamma0 / sigma0), "M_corr")
        ),
        "C": solve_cell(CellProblem(sigma, sigma * A.value, -(sigma * A.slope) + sigma_p * (1.0 / sigma0), "C")),
    }
    if problem.model is Model.MODEL2:
        return out, 0.0, 0.0

    Q, R, V = correctors["Q"], correctors["R"], correctors["V"]
    gamma_q = (gamma * Q.value).mean()
    C1 = -sources1["d_xx"] / sigma0
    C2 = -(v / sigma0) * (gamma * Q.value * P.slope).mean() + W0 * gamma_q / (gamma0 * sigma0)

    g_l = sigma * R.value + gamma * S.value * ((sigma0 / gamma0) * v) + sigma_p * C1
    h_l = (
        -(sigma * (Q.value + R.slope))
        + sigma_p * (W0 / sigma0)
        + gamma * Q.value * (sigma0 / gamma0)
        - sigma0 * C1
    )
    out["L"] = solve_cell(CellProblem(sigma, g_l, h_l, "L"))

    g_n = sigma * (V.value + P.value * C2) + gamma * (R.value + S.value * (W0 / gamma0)) * v
    h_n = -(sigma * V.slope) + gamma * Q.value * (W0 / gamma0) - sigma0 * C2
    out["N"] = solve_cell(CellProblem(sigma, g_n, h_n, "N"))

    out["O"] = _zero_corrector("O") if v == 0.0 else solve_cell(CellProblem(sigma, gamma * V.value * v, zero, "O"))

    g_b = sigma_p * (gamma_q / (gamma0 * sigma0)) + gamma * (A.value + S.value * (1.0 / gamma0)) * v
    h_b = gamma * Q.value * (1.0 / gamma0) - gamma_q / gamma0
    out["B"] = solve_cell(CellProblem(sigma, g_b, h_b, "B"))
    return out, C1, C2


def second_order_sources(
    problem: NondimProblem,
    correctors: Dict[str, Corrector],
    order0: Dict[str, float],
    C1: float,
    C2: float,
) -> Dict[str, float]:
    """Coefficients of the E(T0) and B(f) sources of the second-order mean field."""
    sigma, gamma = problem.sigma, problem.gamma
    gamma0, sigma0 = order0["gamma0"], order0["sigma0"]
    c = {name: correctors[name] for name in ("P", "Q", "R", "S", "V", "A", "L", "M_corr", "N", "O", "B", "C")}
    sigma_p = (sigma * c["P"].value).mean()
    gamma_q = (gamma * c["Q"].value).mean()

    def s_mean(name: str) -> float:
        return (sigma * c[name].value).mean()

    def s_slope(name: str) -> float:
        return (sigma * c[name].slope).mean()

    def g_mean(name: str) -> float:
        return (gamma * c[name].value).mean()

    return {
        "e_xxx": s_mean("R") + s_slope("L") + sigma_p * C1,
        "e_txx": s_mean("S") + s_slope("M_corr"),
        "e_tx": -g_mean("R"),
        "e_tt": -g_mean("S"),
        "e_xx": s_mean("V") + s_slope("N") + gamma_q * (sigma0 / gamma0) * C1 + sigma_p * C2,
        "e_x": s_slope("O") + gamma_q * (sigma0 / gamma0) * C2,
        "e_t": -g_mean("V"),
        "b_xx": s_mean("A") + s_slope("C"),
        "b_x": s_slope("B") + sigma_p * gamma_q / (gamma0 * sigma0),
        "b_t": -g_mean("A"),
        "b_0": gamma_q ** 2 / gamma0 ** 2,
    }


def nonreciprocity_model1(pipeline: "CellPipeline") -> Dict[str, float]:
    """
    Single-parameter non-reciprocity coefficient with its closed form.

    gamma constant: N_sigma = e_xxx, closed form 2 v gamma0 <P^2>.
    sigma constant: N_gamma = -<gamma R>, closed form (2 sigma0 / v) <Q^2>.
    """
    problem = pipeline.problem
    if problem.model is not Model.MODEL1:
        raise PipelineError("nonreciprocity_model1 needs a model1 laminate")
    coeffs = pipeline.coefficients
    v = problem.v
    corr = pipeline.correctors
    if problem.gamma.is_constant() and problem.sigma.is_constant():
        return {"name": "uniform", "assembled": 0.0, "closed_form": 0.0}
    if problem.gamma.is_constant():
        P = corr.require("P").value
        closed = 2.0 * v * coeffs.gamma0 * integrate_product(P, P)
        return {"name": "N_sigma", "assembled": float(coeffs.e_xxx), "closed_form": closed}
    if problem.sigma.is_constant():
        Q = corr.require("Q").value
        closed = 0.0 if v == 0.0 else 2.0 * coeffs.sigma0 / v * integrate_product(Q, Q)
        return {"name": "N_gamma", "assembled": float(coeffs.e_tx), "closed_form": closed}
    raise PipelineError(
        "both sigma and gamma are modulated; use second_order_sources for the full E(T0) coefficients"
    )


# model 2


def _density_primitive(problem: NondimProblem) -> Tuple[UnitCellFunction, float]:
    rho = problem.rho
    rho0 = rho.mean()
    return (rho - rho0).antiderivative(), rho0


def n_adv_reduced(problem: NondimProblem, P: UnitCellFunction) -> float:
    """
    Closed form of N_adv in terms of I(y) = int_0^y (rho - rho0).

    Written with sigma0 inside the variance bracket so that it holds for any
    sigma scale; for <1/sigma> = 1 it is the familiar normalized expression.
    """
    sigma, c, v = problem.sigma, float(problem.c), problem.v
    primitive, rho0 = _density_primitive(problem)
    inv_sigma = 1.0 / sigma
    sigma0 = 1.0 / inv_sigma.mean()
    bracket = (primitive * primitive * inv_sigma).mean() - sigma0 * (primitive * inv_sigma).mean() ** 2
    return (
        2.0 * c * sigma0 * v / rho0 * bracket
        + 2.0 * c * v * (problem.rho * P * P).mean()
        - 4.0 * c * v * (P * primitive).mean()
    )


def model2_pipeline(
    problem: NondimProblem,
    base: Dict[str, Corrector],
    order0: Dict[str, float],
) -> Tuple[Dict[str, Corrector], Dict[str, float]]:
    """Density-modulation correctors and second-order coefficients."""
    if problem.model is not Model.MODEL2 or problem.rho is None:
        raise PipelineError("model2_pipeline needs a model2 laminate with rho and c")
    sigma, rho, v, c = problem.sigma, problem.rho, problem.v, float(problem.c)
    sigma0 = order0["sigma0"]
    rho0 = rho.mean()
    zero = UnitCellFunction.constant(0.0)
    P, S, A, M, C = (base[k] for k in ("P", "S", "A", "M_corr", "C"))
    delta_rho = rho - rho0

    out: Dict[str, Corrector] = {}
    if v == 0.0:
        for name in ("R_adv", "L_adv", "N_adv_corr", "B_adv"):
            out[name] = _zero_corrector(name)
    else:
        out["R_adv"] = solve_cell(CellProblem(sigma, P.value * (v * c * rho0), delta_rho * (c * v), "R_adv"))
        r_adv = out["R_adv"]
        out["L_adv"] = solve_cell(
            CellProblem(
                sigma,
                S.value * (v * sigma0) + sigma * r_adv.value,
                delta_rho * P.value * (c * v) - sigma * r_adv.slope,
                "L_adv",
            )
        )
        out["N_adv_corr"] = solve_cell(CellProblem(sigma, r_adv.value * (rho0 * c * v), zero, "N_adv_corr"))
        out["B_adv"] = solve_cell(CellProblem(sigma, zero, (A.slope * (rho0 * c) + S.slope) * (-v), "B_adv"))

    r_adv, l_adv, n_adv, b_adv = (out[k] for k in ("R_adv", "L_adv", "N_adv_corr", "B_adv"))
    rho_s = (rho * S.value).mean()
    rho_r = (rho * r_adv.value).mean()
    rho_a = (rho * A.value).mean()
    coeffs = {
        "adv_txx": -(sigma0 / rho0) * rho_s + (sigma * S.value).mean() + (sigma * M.slope).mean(),
        "adv_xx": -c * v * rho_r + (sigma * n_adv.slope).mean(),
        "N_adv": (
            -(sigma0 / rho0) * rho_r
            - v * (sigma0 / rho0) * rho_s
            + (sigma * r_adv.value).mean()
            + (sigma * l_adv.slope).mean()
        ),
        "adv_f_t": -rho_s / rho0 - c * rho_a,
        "adv_f_xx": (sigma * C.slope).mean() + (sigma * A.value).mean(),
        "adv_f_x": -rho_r / rho0 - c * v * rho_a + (sigma * b_adv.slope).mean() - (v / rho0) * rho_s,
        "rho0": rho0,
    }
    coeffs["N_adv_reduced"] = 0.0 if v == 0.0 else n_adv_reduced(problem, P.value)
    return out, coeffs


# closed forms


def bilayer_closed_forms(bilayer: BilayerSpec) -> Dict[str, Optional[float]]:
    """Dimensional beta1, beta2 (conductivity contrast) and beta3 (density contrast)."""
    sa, sb, phi = bilayer.sigma_a, bilayer.sigma_b, bilayer.phi
    weight = (1.0 - phi) ** 2 * phi ** 2
    mixed = sa * (1.0 - phi) + sb * phi
    beta1 = (sa - sb) ** 2 * weight / (12.0 * mixed ** 2)
    beta2 = (sa - sb) ** 2 * weight / (12.0 * sa * sb * mixed)
    beta3 = None
    if bilayer.rho_a is not None:
        beta3 = (bilayer.rho_a - bilayer.rho_b) ** 2 * weight / 12.0
    return {"beta1": beta1, "beta2": beta2, "beta3": beta3}


def _betas(problem: NondimProblem, correctors: Dict[str, Corrector]) -> Dict[str, Optional[float]]:
    P = correctors["P"].value
    sigma = problem.sigma
    scales = problem.scales
    out: Dict[str, Optional[float]] = {
        "beta1": (P * P).mean(),
        "beta2": (P * P / sigma).mean() / scales.sigma_star,
        "beta3": None,
    }
    if problem.rho is not None and sigma.is_constant():
        S_prime = correctors["S"].slope
        sigma_c = sigma.mean()
        out["beta3"] = (scales.rho_star * sigma_c / float(problem.c)) ** 2 * (S_prime * S_prime).mean()
    return out


# driver


def homogenize(spec: LaminateSpec, scales: Optional[ScaleSet] = None, kappa_star: float = 1.0) -> CellPipeline:
    """Full corrector pipeline for one laminate."""
    if scales is None:
        scales = ScaleSet.default_for(spec, kappa_star=kappa_star)
    problem = nondimensionalize(spec, scales)
    _log.debug("homogenize model=%s v=%.6g eta=%.6g pieces=%d", problem.model.value, problem.v, problem.eta, problem.sigma.n_pieces)

    corr: Dict[str, Corrector] = {}
    corr.update(correctors_order1(problem))
    order0 = effective_order0(problem, corr)
    corr.update(correctors_order2(problem, corr, order0))
    sources1 = first_order_sources(problem, corr, order0)
    third, C1, C2 = correctors_order3(problem, corr, order0, sources1)
    corr.update(third)

    coeffs = EffectiveCoefficients(
        model=problem.model.value,
        v=problem.v,
        eta=problem.eta,
        h=problem.h,
        gamma0=order0["gamma0"],
        sigma0=order0["sigma0"],
        W0=order0["W0"],
        c=problem.c,
        **sources1,
    )
    if problem.model is Model.MODEL1:
        coeffs.C1, coeffs.C2 = C1, C2
        for key, value in second_order_sources(problem, corr, order0, C1, C2).items():
            setattr(coeffs, key, value)
    else:
        adv_corr, adv_coeffs = model2_pipeline(problem, corr, order0)
        corr.update(adv_corr)
        for key, value in adv_coeffs.items():
            setattr(coeffs, key, value)
    for key, value in _betas(problem, corr).items():
        setattr(coeffs, key, value)

    sigma_const = problem.sigma.is_constant()
    gamma_const = problem.gamma.is_constant()
    pipeline = CellPipeline(
        spec=spec,
        scales=scales,
        problem=problem,
        correctors=CorrectorSet(**corr),
        coefficients=coeffs,
        sigma_only=gamma_const and not sigma_const,
        gamma_only=sigma_const and not gamma_const,
        rho_only=problem.model is Model.MODEL2 and sigma_const and not gamma_const,
    )
    if problem.model is Model.MODEL1 and (sigma_const or gamma_const):
        nr = nonreciprocity_model1(pipeline)
        if nr["name"] == "N_sigma":
            coeffs.N_sigma = nr["assembled"]
        elif nr["name"] == "N_gamma":
            coeffs.N_gamma = nr["assembled"]
    return pipeline


def dimensional_order0(pipeline: CellPipeline) -> Dict[str, float]:
    """gamma0, sigma0, W0 and v_m W0 in SI units."""
    coeffs, scales = pipeline.coefficients, pipeline.scales
    profile = pipeline.spec.profile
    gamma0 = coeffs.gamma0 * scales.gamma_star
    sigma0 = coeffs.sigma0 * scales.sigma_star
    W0_dim = (profile.gamma / profile.sigma).mean() * sigma0 - gamma0
    return {
        "gamma0": gamma0,
        "sigma0": sigma0,
        "W0": W0_dim,
        "v_m_W0": pipeline.spec.v_m * W0_dim,
        "v_m_W0_from_scaled": coeffs.W0 * scales.sigma_star * scales.kappa_star,
    }


def sample_correctors(correctors: CorrectorSet, resolution: int = 201) -> pd.DataFrame:
    y = np.linspace(0.0, 1.0, resolution, endpoint=False)
    columns: Dict[str, np.ndarray] = {"y": y}
    for name, corrector in correctors.available().items():
        columns[name] = corrector.value(y)
        columns[f"{name}_prime"] = corrector.slope(y)
    return pd.DataFrame(columns)
