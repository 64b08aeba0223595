"""
Homogenized effective equations and their dispersion relations.

A one-dimensional linear effective PDE is stored in the form

    coeff_t dT/dtau + coeff_x dT/dX + coeff_xx d2T/dX2 + coeff_xxx d3T/dX3
        + coeff_txx d3T/dtau dX2 = F

with SI coefficients. Plane waves exp(i(Omega tau - kappa X)) then satisfy

    Omega = (coeff_x kappa - i coeff_xx kappa^2 - coeff_xxx kappa^3) / (coeff_t - coeff_txx kappa^2).
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from cell import CellPipeline, EffectiveCoefficients, dimensional_order0, homogenize
from laminate import LaminateSpec, Model, ScaleSet

_log = logging.getLogger(__name__)

NondimCoefficients = Tuple[float, float, float, float, float]

# (time order, space order) of each stored coefficient
_TERM_ORDERS = {
    "coeff_t": (1, 0),
    "coeff_x": (0, 1),
    "coeff_xx": (0, 2),
    "coeff_xxx": (0, 3),
    "coeff_txx": (1, 2),
}


class EffectiveVariantError(ValueError):
    def __init__(self, variant: str, reason: str):
        self.variant = variant
        self.reason = reason
        super().__init__(f"variant {variant}: {reason}")


class Variant(str, Enum):
    ORDER0_BOTH = "order0_both"
    ORDER1_BOTH = "order1_both"
    SIGMA_ONLY_ORDER2 = "sigma_only_order2"
    MODEL2_RHO_ONLY_ORDER2 = "model2_rho_only_order2"
    CASCADE_GENERAL = "cascade_general"

    @property
    def order(self) -> int:
        if self is Variant.ORDER0_BOTH:
            return 0
        if self is Variant.ORDER1_BOTH:
            return 1
        return 2


@dataclass(frozen=True)
class EffectivePde:
    coeff_t: float
    coeff_x: float
    coeff_xx: float
    coeff_xxx: float
    coeff_txx: float
    variant: Variant
    h: float = 0.0
    v_m: float = 0.0
    source: Optional[Callable[[np.ndarray, float], np.ndarray]] = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if not self.coeff_t > 0.0:
            raise EffectiveVariantError(self.variant.value, f"coeff_t must be positive, got {self.coeff_t!r}")
        if not self.coeff_xx < 0.0:
            raise EffectiveVariantError(self.variant.value, f"coeff_xx must be negative (diffusive), got {self.coeff_xx!r}")

    @property
    def order(self) -> int:
        return self.variant.order

    def to_dict(self) -> Dict[str, Any]:
        return {
            "variant": self.variant.value,
            "order": self.order,
            "coeff_t": self.coeff_t,
            "coeff_x": self.coeff_x,
            "coeff_xx": self.coeff_xx,
            "coeff_xxx": self.coeff_xxx,
            "coeff_txx": self.coeff_txx,
            "h": self.h,
            "v_m": self.v_m,
        }


def energy_rate_coefficient(pde: EffectivePde) -> float:
    """Factor D in dE/dtau = -D int (dT/dX)^2 for an unforced run."""
    return -pde.coeff_xx


# variant selection and assembly


def _is_small(value: Optional[float], reference: float) -> bool:
    return value is None or abs(value) <= 1e-10 * max(1.0, abs(reference))


def select_variant(pipeline: CellPipeline, order: int) -> Variant:
    if order not in (0, 1, 2):
        raise EffectiveVariantError(str(order), "order must be 0, 1 or 2")
    if order == 0:
        return Variant.ORDER0_BOTH
    if order == 1:
        return Variant.ORDER1_BOTH
    if pipeline.problem.model is Model.MODEL2:
        return Variant.MODEL2_RHO_ONLY_ORDER2
    if pipeline.problem.gamma.is_constant():
        return Variant.SIGMA_ONLY_ORDER2
    return Variant.CASCADE_GENERAL


def _check_model1_sigma_only(coeffs: EffectiveCoefficients) -> None:
    if coeffs.model != Model.MODEL1.value:
        raise EffectiveVariantError(Variant.SIGMA_ONLY_ORDER2.value, "needs model1 coefficients")
    if coeffs.e_xxx is None:
        raise EffectiveVariantError(Variant.SIGMA_ONLY_ORDER2.value, "second-order coefficients missing")
    scale = max(abs(coeffs.sigma0), abs(coeffs.gamma0))
    for name in ("W0", "e_tx", "e_tt", "e_t", "e_x", "d_xx", "d_x"):
        if not _is_small(getattr(coeffs, name), scale):
            raise EffectiveVariantError(
                Variant.SIGMA_ONLY_ORDER2.value,
                f"{name}={getattr(coeffs, name):.3e} is not zero; capacity is modulated (use the cascade)",
            )


def nondimensional_coefficients(coeffs: EffectiveCoefficients, variant: Union[Variant, str]) -> NondimCoefficients:
    """(a_t, a_x, a_xx, a_xxx, a_txx) of the truncated mean-field equation in scaled variables."""
    variant = Variant(variant)
    eta = coeffs.eta
    if variant is Variant.ORDER0_BOTH:
        return coeffs.gamma0, -coeffs.W0, -coeffs.sigma0, 0.0, 0.0
    if variant is Variant.ORDER1_BOTH:
        d_x = coeffs.d_x or 0.0
        d_xx = coeffs.d_xx or 0.0
        return coeffs.gamma0, -coeffs.W0 - eta * d_x, -coeffs.sigma0 - eta * d_xx, 0.0, 0.0
    if variant is Variant.SIGMA_ONLY_ORDER2:
        _check_model1_sigma_only(coeffs)
        eta2 = eta * eta
        return (
            coeffs.gamma0,
            0.0,
            -(coeffs.sigma0 + eta2 * coeffs.e_xx),
            -eta2 * coeffs.e_xxx,
            -eta2 * coeffs.e_txx,
        )
    if variant is Variant.MODEL2_RHO_ONLY_ORDER2:
        if coeffs.model != Model.MODEL2.value or coeffs.N_adv is None:
            raise EffectiveVariantError(variant.value, "needs model2 coefficients")
        eta2 = eta * eta
        return (
            coeffs.gamma0,
            0.0,
            -(coeffs.sigma0 + eta2 * coeffs.adv_xx),
            -eta2 * coeffs.N_adv,
            -eta2 * coeffs.adv_txx,
        )
    raise EffectiveVariantError(
        variant.value, "both parameters are modulated; integrate the three-level cascade instead"
    )


def _to_dimensional(values: NondimCoefficients, scales: ScaleSet) -> Dict[str, float]:
    """A scaled coefficient of d_t^a d_x^b carries sigma* kappa*^2 / (kappa*^(2a+b) alpha*^a)."""
    out = {}
    for (name, (a, b)), value in zip(_TERM_ORDERS.items(), values):
        factor = scales.sigma_star * scales.kappa_star ** 2 / (scales.kappa_star ** (2 * a + b) * scales.alpha_star ** a)
        out[name] = float(value) * factor
    return out


def assemble_pde(
    coeffs: EffectiveCoefficients,
    scales: ScaleSet,
    variant: Union[Variant, str],
    v_m: Optional[float] = None,
) -> EffectivePde:
    variant = Variant(variant)
    dimensional = _to_dimensional(nondimensional_coefficients(coeffs, variant), scales)
    if v_m is None:
        v_m = coeffs.v * scales.v_star
    return EffectivePde(variant=variant, h=coeffs.h, v_m=v_m, **dimensional)


def effective_pde(spec: LaminateSpec, order: int = 2, kappa_star: float = 1.0) -> EffectivePde:
    pipeline = homogenize(spec, kappa_star=kappa_star)
    variant = select_variant(pipeline, order)
    return assemble_pde(pipeline.coefficients, pipeline.scales, variant, v_m=spec.v_m)


def closed_form_pde(pipeline: CellPipeline, variant: Union[Variant, str]) -> EffectivePde:
    """
    Single-parameter equations written directly with beta1, beta2 (conductivity
    modulation) or beta3 (density modulation) in SI units.
    """
    variant = Variant(variant)
    spec = pipeline.spec
    h, v = spec.h, spec.v_m
    coeffs = pipeline.coefficients
    order0 = dimensional_order0(pipeline)
    if variant is Variant.SIGMA_ONLY_ORDER2:
        if not spec.is_gamma_constant or spec.model is not Model.MODEL1:
            raise EffectiveVariantError(variant.value, "needs a model1 laminate with constant capacity")
        gamma = order0["gamma0"]
        b1, b2 = float(coeffs.beta1), float(coeffs.beta2)
        return EffectivePde(
            coeff_t=gamma,
            coeff_x=0.0,
            coeff_xx=-(order0["sigma0"] + h * h * v * v * gamma * gamma * b2),
            coeff_xxx=-2.0 * h * h * v * gamma * b1,
            coeff_txx=-h * h * gamma * b1,
            variant=variant,
            h=h,
            v_m=v,
        )
    if variant is Variant.MODEL2_RHO_ONLY_ORDER2:
        if spec.model is not Model.MODEL2 or not spec.is_sigma_constant or coeffs.beta3 is None:
            raise EffectiveVariantError(variant.value, "needs a model2 laminate with constant conductivity")
        sigma = order0["sigma0"]
        c = float(spec.profile.c_specific)
        rho0 = spec.profile.rho.mean()
        b3 = float(coeffs.beta3)
        return EffectivePde(
            coeff_t=order0["gamma0"],
            coeff_x=0.0,
            coeff_xx=-(sigma + h * h * v * v * c * c / sigma * b3),
            coeff_xxx=-2.0 * h * h * v * c / rho0 * b3,
            coeff_txx=-h * h * c / rho0 * b3,
            variant=variant,
            h=h,
            v_m=v,
        )
    raise EffectiveVariantError(variant.value, "no closed form for this variant")


# dispersion


def pde_dispersion(pde: EffectivePde, kappa: Any) -> np.ndarray:
    kappa = np.asarray(kappa, dtype=float)
    k2 = kappa * kappa
    numerator = pde.coeff_x * kappa - 1j * pde.coeff_xx * k2 - pde.coeff_xxx * k2 * kappa
    return numerator / (pde.coeff_t - pde.coeff_txx * k2)


@dataclass(frozen=True)
class EffectiveDispersion:
    order: int
    variant: Variant
    pde: EffectivePde

    def __call__(self, kappa: Any) -> Union[complex, np.ndarray]:
        omega = pde_dispersion(self.pde, kappa)
        return complex(omega) if omega.ndim == 0 else omega


def dispersion(
    source: Union[EffectivePde, CellPipeline],
    kappa: Any = None,
    order: int = 2,
) -> Union[EffectiveDispersion, np.ndarray]:
    """
    Effective dispersion relation. With kappa given the fixed-frame Omega array
    is returned, otherwise the closure.
    """
    if isinstance(source, CellPipeline):
        variant = select_variant(source, order)
        pde = assemble_pde(source.coefficients, source.scales, variant, v_m=source.spec.v_m)
    else:
        pde = source
    relation = EffectiveDispersion(order=pde.order, variant=pde.variant, pde=pde)
    if kappa is None:
        return relation
    return pde_dispersion(pde, kappa)


def effective_prediction(spec: LaminateSpec, order: int = 2) -> EffectiveDispersion:
    """Omega(kappa) of the highest single-equation model available at the requested order."""
    pipeline = homogenize(spec)
    variant = select_variant(pipeline, order)
    if variant is Variant.CASCADE_GENERAL:
        _log.debug("no single order-2 equation for this laminate; predicting with order 1")
        variant = Variant.ORDER1_BOTH
    pde = assemble_pde(pipeline.coefficients, pipeline.scales, variant, v_m=spec.v_m)
    return EffectiveDispersion(order=variant.order, variant=variant, pde=pde)


def dispersion_table(
    relation: EffectiveDispersion,
    kappa: Sequence[float],
    frames: Sequence[str] = ("fixed", "moving"),
) -> pd.DataFrame:
    """branch,kappa,re_omega,im_omega,residual,frame,order with branch 0 and zero residual."""
    kappa = np.asarray(kappa, dtype=float)
    omega = pde_dispersion(relation.pde, kappa)
    parts = []
    for frame in frames:
        values = omega if frame == "fixed" else omega - relation.pde.v_m * kappa
        parts.append(
            pd.DataFrame(
                {
                    "branch": 0,
                    "kappa": kappa,
                    "re_omega": values.real,
                    "im_omega": values.imag,
                    "residual": 0.0,
                    "frame": frame,
                    "order": relation.order,
                }
            )
        )
    return pd.concat(parts, ignore_index=True)


def compare_dispersion(exact: pd.DataFrame, effective: pd.DataFrame, branch: int = 0) -> pd.DataFrame:
    """Per-kappa error of an effective table against an exact branch, matched on (kappa, frame)."""
    left = exact[exact["branch"] == branch][["kappa", "frame", "re_omega", "im_omega"]]
    right = effective[["kappa", "frame", "re_omega", "im_omega"] + (["order"] if "order" in effective else [])]
    merged = pd.merge(
        left.round({"kappa": 12}),
        right.round({"kappa": 12}),
        on=["kappa", "frame"],
        suffixes=("_exact", "_effective"),
        how="inner",
    )
    exact_omega = merged["re_omega_exact"].to_numpy() + 1j * merged["im_omega_exact"].to_numpy()
    eff_omega = merged["re_omega_effective"].to_numpy() + 1j * merged["im_omega_effective"].to_numpy()
    abs_error = np.abs(exact_omega - eff_omega)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel_error = np.where(np.abs(exact_omega) > 0.0, abs_error / np.abs(exact_omega), 0.0)
    merged["abs_error"] = abs_error
    merged["rel_error"] = rel_error
    return merged.sort_values(["frame", "kappa"]).reset_index(drop=True)


# three-level cascade


@dataclass(frozen=True)
class Term:
    """coefficient * d_t^time d_x^space applied to a field."""

    time: int
    space: int
    coefficient: float


@dataclass(frozen=True)
class CascadeLevel:
    index: int
    operator: Tuple[float, float, float]
    field_sources: Dict[int, Tuple[Term, ...]]
    forcing: Tuple[Term, ...]


@dataclass(frozen=True)
class Cascade:
    """
    gamma0 dT_n/dt - W0 dT_n/dx - sigma0 d2T_n/dx2 = sum over lower levels of
    their source terms, for n = 0, 1, 2, in scaled variables. The mean field is
    T0 + eta T1 + eta^2 T2.
    """

    levels: Tuple[CascadeLevel, CascadeLevel, CascadeLevel]
    eta: float
    model: str
    scales: Optional[ScaleSet] = None

    def combined_single_parameter(self) -> NondimCoefficients:
        """
        Folds the levels into one equation accurate to eta^2. Fails when the
        second-order source holds d2/dt2 or d2/dtdx terms (capacity modulation).
        """
        eta = self.eta
        a = {"t": self.levels[0].operator[0], "x": self.levels[0].operator[1], "xx": self.levels[0].operator[2], "xxx": 0.0, "txx": 0.0}
        key = {(1, 0): "t", (0, 1): "x", (0, 2): "xx", (0, 3): "xxx", (1, 2): "txx"}
        for level in self.levels[1:]:
            weight = eta ** level.index
            for term in level.field_sources.get(0, ()):
                if term.coefficient == 0.0:
                    continue
                slot = key.get((term.time, term.space))
                if slot is None:
                    if abs(term.coefficient) <= 1e-12:
                        continue
                    raise EffectiveVariantError(
                        Variant.CASCADE_GENERAL.value,
                        f"term d_t^{term.time} d_x^{term.space} has no single-equation counterpart",
                    )
                a[slot] -= weight * term.coefficient
        return a["t"], a["x"], a["xx"], a["xxx"], a["txx"]


def cascade_solvers_spec(coeffs: EffectiveCoefficients, scales: Optional[ScaleSet] = None) -> Cascade:
    operator = (coeffs.gamma0, -coeffs.W0, -coeffs.sigma0)
    if coeffs.model == Model.MODEL1.value:
        if coeffs.e_xxx is None:
            raise EffectiveVariantError(Variant.CASCADE_GENERAL.value, "second-order coefficients missing")
        first = (Term(0, 2, coeffs.d_xx), Term(0, 1, coeffs.d_x))
        second_on_t0 = (
            Term(0, 3, coeffs.e_xxx),
            Term(1, 2, coeffs.e_txx),
            Term(1, 1, coeffs.e_tx),
            Term(2, 0, coeffs.e_tt),
            Term(0, 2, coeffs.e_xx),
            Term(0, 1, coeffs.e_x),
            Term(1, 0, coeffs.e_t),
        )
        forcing1 = (Term(0, 0, coeffs.a_f),)
        forcing2 = (
            Term(0, 2, coeffs.b_xx),
            Term(0, 1, coeffs.b_x),
            Term(1, 0, coeffs.b_t),
            Term(0, 0, coeffs.b_0),
        )
    else:
        if coeffs.N_adv is None:
            raise EffectiveVariantError(Variant.CASCADE_GENERAL.value, "model2 coefficients missing")
        first = (Term(0, 2, 0.0), Term(0, 1, 0.0))
        second_on_t0 = (
            Term(1, 2, coeffs.adv_txx),
            Term(0, 2, coeffs.adv_xx),
            Term(0, 3, coeffs.N_adv),
        )
        forcing1 = (Term(0, 0, 0.0),)
        forcing2 = (
            Term(1, 0, coeffs.adv_f_t),
            Term(0, 2, coeffs.adv_f_xx),
            Term(0, 1, coeffs.adv_f_x),
        )
    levels = (
        CascadeLevel(0, operator, {}, (Term(0, 0, 1.0),)),
        CascadeLevel(1, operator, {0: first}, forcing1),
        CascadeLevel(2, operator, {1: first, 0: second_on_t0}, forcing2),
    )
    return Cascade(levels=levels, eta=coeffs.eta, model=coeffs.model, scales=scales)


def coefficients_report(pipeline: CellPipeline) -> Dict[str, Any]:
    """Scaled coefficients plus the dimensional leading-order ones, for the homogenize JSON."""
    report = {
        "scaled": pipeline.coefficients.to_dict(),
        "scales": pipeline.scales.to_dict(),
        "dimensional": dimensional_order0(pipeline),
    }
    beta = {k: getattr(pipeline.coefficients, k) for k in ("beta1", "beta2", "beta3")}
    report["dimensional"].update({k: v for k, v in beta.items() if v is not None})
    return report
