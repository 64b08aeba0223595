"""
Independent oracles for the homogenization and dispersion code.

Quadrature here never calls the exact piecewise-polynomial integrator: it
samples functions pointwise on dyadic midpoint ladders inside each piece.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
from scipy.stats import linregress

from bloch import Frame, find_branch
from cell import CellPipeline, bilayer_closed_forms, dimensional_order0, homogenize, nonreciprocity_model1
from constants import (
    BETA_RTOL,
    DEFAULT_AUDIT_SEEDS,
    EXAMPLE_BOTH,
    EXAMPLE_MODEL2,
    EXAMPLE_SIGMA_ONLY,
    IDENTITY_ATOL,
    IDENTITY_RTOL,
    ORDER_WINDOW_KAPPA_H,
    ORDER_WINDOW_POINTS,
    PHI_FIT_RTOL,
    PHI_MIN_SAMPLES,
    QUADRATURE_LEVELS,
    TAYLOR_MIN_ORDER,
)
from effective import effective_prediction
from laminate import (
    BilayerSpec,
    LaminateSpec,
    MaterialProfile,
    Model,
    ScaleSet,
    UnitCellFunction,
    make_bilayer,
)

_log = logging.getLogger(__name__)

TAYLOR_TARGET_ORDER = 3.0


@dataclass(frozen=True)
class OracleReport:
    name: str
    lhs: float
    rhs: float
    abs_error: float
    rel_error: float
    tolerance: float
    passed: bool
    provenance: str = ""
    atol: float = IDENTITY_ATOL

    @classmethod
    def compare(
        cls,
        name: str,
        lhs: float,
        rhs: float,
        provenance: str = "",
        rtol: float = IDENTITY_RTOL,
        atol: float = IDENTITY_ATOL,
    ) -> "OracleReport":
        lhs, rhs = float(lhs), float(rhs)
        abs_error = abs(lhs - rhs)
        scale = max(abs(lhs), abs(rhs))
        rel_error = abs_error / scale if scale > 0.0 else 0.0
        passed = bool(np.isfinite(abs_error)) and (rel_error <= rtol or abs_error <= atol)
        return cls(name, lhs, rhs, abs_error, rel_error, rtol, passed, provenance, atol)

    @classmethod
    def pointwise(
        cls,
        name: str,
        difference: UnitCellFunction,
        reference: UnitCellFunction,
        provenance: str = "",
        rtol: float = IDENTITY_RTOL,
        atol: float = IDENTITY_ATOL,
    ) -> "OracleReport":
        """max |lhs - rhs| over the cell against max |rhs|."""
        abs_error = difference.max_abs()
        scale = reference.max_abs()
        rel_error = abs_error / scale if scale > 0.0 else 0.0
        passed = bool(np.isfinite(abs_error)) and (rel_error <= rtol or abs_error <= atol)
        return cls(name, scale + abs_error, scale, abs_error, rel_error, rtol, passed, provenance, atol)

    @classmethod
    def vanishing(cls, name: str, value: float, scale: float, provenance: str = "", rtol: float = IDENTITY_RTOL) -> "OracleReport":
        """|value| small against a reference magnitude."""
        return cls.compare(name, abs(float(scale)) + abs(float(value)), abs(float(scale)), provenance, rtol=rtol)

    @classmethod
    def at_least(cls, name: str, value: float, bound: float, slack: float, provenance: str = "") -> "OracleReport":
        """One-sided check value >= bound - slack."""
        shortfall = max(0.0, bound - float(value))
        return cls(name, float(value), bound, shortfall, shortfall / abs(bound) if bound else 0.0, 0.0, shortfall <= slack, provenance, slack)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "abs_error": self.abs_error,
            "rel_error": self.rel_error,
            "tolerance": self.tolerance,
            "atol": self.atol,
            "pass": self.passed,
            "provenance": self.provenance,
        }


def summarize(reports: Sequence[OracleReport]) -> Dict[str, int]:
    failed = sum(1 for r in reports if not r.passed)
    return {"total": len(reports), "passed": len(reports) - failed, "failed": failed}


# quadrature oracle


@dataclass(frozen=True)
class QuadratureEstimate:
    value: float
    error: float
    converged: bool
    levels: int


def _midpoint_sum(fn: Callable[[np.ndarray], np.ndarray], edges: np.ndarray, n: int) -> float:
    total = 0.0
    offsets = (np.arange(n) + 0.5) / n
    for left, right in zip(edges[:-1], edges[1:]):
        width = right - left
        total += width * float(np.mean(np.asarray(fn(left + width * offsets), dtype=float)))
    return total


def quadrature_moment(
    fn: Union[UnitCellFunction, Callable[[np.ndarray], np.ndarray]],
    levels: int = QUADRATURE_LEVELS,
    edges: Optional[Sequence[float]] = None,
    rtol: float = 1e-13,
) -> QuadratureEstimate:
    """
    Cell mean of fn by composite midpoint sums with 2^k nodes per piece and
    Richardson extrapolation in h^2. The error estimate is the last change of
    the extrapolated diagonal.
    """
    if edges is None:
        edges = fn.edges if isinstance(fn, UnitCellFunction) else (0.0, 1.0)
    edges = np.asarray(edges, dtype=float)
    table: List[List[float]] = []
    previous = math.inf
    for k in range(levels + 1):
        row = [_midpoint_sum(fn, edges, 2 ** k)]
        for j in range(1, k + 1):
            factor = 4.0 ** j
            row.append(row[j - 1] + (row[j - 1] - table[k - 1][j - 1]) / (factor - 1.0))
        table.append(row)
        estimate = row[-1]
        error = abs(estimate - previous)
        if k >= 2 and error <= rtol * max(1.0, abs(estimate)):
            return QuadratureEstimate(estimate, error, True, k)
        previous = estimate
    _log.warning("quadrature ladder did not converge: last change %.3e", error)
    return QuadratureEstimate(table[-1][-1], error, False, levels)


def product_moment(*functions: UnitCellFunction, levels: int = QUADRATURE_LEVELS) -> QuadratureEstimate:
    """Quadrature of a pointwise product on the union of the factors' breakpoints."""
    edges = np.unique(np.concatenate([f.edges for f in functions]))

    def integrand(y: np.ndarray) -> np.ndarray:
        out = np.ones_like(y)
        for f in functions:
            out = out * f(y)
        return out

    return quadrature_moment(integrand, levels=levels, edges=edges)


def fitted_order(h: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of log(error) against log(h)."""
    h = np.asarray(h, dtype=float)
    errors = np.asarray(errors, dtype=float)
    mask = errors > 0.0
    if np.count_nonzero(mask) < 2:
        return math.inf
    return float(linregress(np.log(h[mask]), np.log(errors[mask])).slope)


# identities


def identity_report(pipeline: CellPipeline) -> List[OracleReport]:
    """Integration-by-parts and pointwise identities valid for this laminate."""
    problem = pipeline.problem
    corr = pipeline.correctors
    coeffs = pipeline.coefficients
    sigma, gamma = problem.sigma, problem.gamma
    sigma0, gamma0 = coeffs.sigma0, coeffs.gamma0
    P = corr.require("P")
    S = corr.require("S")
    A = corr.require("A")
    reports: List[OracleReport] = []
    add = reports.append

    def mean(f: UnitCellFunction) -> float:
        return f.mean()

    flux = sigma * (P.slope + 1.0)
    add(OracleReport.pointwise("sigma(P'+1) = sigma0", flux - sigma0, flux, "flux of the P problem is constant"))
    add(OracleReport.compare("sigma0 = <1/sigma>^-1", sigma0, 1.0 / mean(1.0 / sigma), "harmonic mean"))

    inv_primitive = (1.0 / sigma).antiderivative()
    identity = UnitCellFunction.constant(1.0).antiderivative()
    explicit_p = inv_primitive * sigma0 - identity - sigma0 * inv_primitive.mean() + 0.5
    add(OracleReport.pointwise("P explicit", P.value - explicit_p, P.value, "P from int 1/sigma"))

    for name, corrector in corr.available().items():
        scale = corrector.value.max_abs()
        add(OracleReport.vanishing(f"<{name}> = 0", corrector.value.mean(), scale, "zero-mean corrector"))
        jumps = np.abs(corrector.value.jumps())
        add(OracleReport.vanishing(f"{name} continuous", float(jumps.max(initial=0.0)), scale, "corrector continuity"))

    add(
        OracleReport.compare(
            "<sigma S'> = <gamma P> - (gamma0/sigma0) <sigma P>",
            mean(sigma * S.slope),
            mean(gamma * P.value) - gamma0 / sigma0 * mean(sigma * P.value),
            "integration by parts of S against P",
        )
    )
    add(
        OracleReport.compare(
            "<sigma A'> = <sigma P>/sigma0",
            mean(sigma * A.slope),
            mean(sigma * P.value) / sigma0,
            "integration by parts of A against P",
        )
    )

    if problem.model is Model.MODEL1:
        reports.extend(_model1_identities(pipeline))
    else:
        reports.extend(_model2_identities(pipeline))
    return reports


def _model1_identities(pipeline: CellPipeline) -> List[OracleReport]:
    problem, corr, coeffs = pipeline.problem, pipeline.correctors, pipeline.coefficients
    sigma, gamma, v = problem.sigma, problem.gamma, problem.v
    sigma0, gamma0, W0 = coeffs.sigma0, coeffs.gamma0, coeffs.W0
    P, Q, R, S, V = (corr.require(k) for k in ("P", "Q", "R", "S", "V"))
    out: List[OracleReport] = []
    add = out.append

    add(OracleReport.compare("W0 = v <gamma P'>", W0, v * (gamma * P.slope).mean(), "integration by parts of Q against P"))
    add(
        OracleReport.compare(
            "<sigma R'> by parts",
            (sigma * R.slope).mean(),
            v * (gamma * P.value * P.slope).mean()
            + (sigma * Q.value * P.slope).mean()
            + W0 / sigma0 * (sigma * P.value).mean()
            - (sigma * Q.slope * P.value).mean(),
            "integration by parts of R against P",
        )
    )
    add(
        OracleReport.compare(
            "<sigma V'> = v <gamma Q P'>",
            (sigma * V.slope).mean(),
            v * (gamma * Q.value * P.slope).mean(),
            "integration by parts of V against P",
        )
    )

    gamma_const = gamma.is_constant()
    sigma_const = sigma.is_constant()
    if gamma_const and not sigma_const:
        L, M, N = corr.require("L"), corr.require("M_corr"), corr.require("N")
        p2 = (P.value * P.value).mean()
        add(
            OracleReport.compare(
                "<sigma L'> by parts",
                (sigma * L.slope).mean(),
                (sigma * R.value * P.slope).mean()
                - (sigma * R.slope * P.value).mean()
                - sigma0 * v * (S.slope * P.value).mean()
                + (sigma * R.slope).mean() * (sigma * P.value).mean() / sigma0,
                "integration by parts of L against P, constant capacity",
            )
        )
        add(OracleReport.compare("<sigma R' P> = -v gamma0 <P^2>", (sigma * R.slope * P.value).mean(), -v * gamma0 * p2, "constant capacity"))
        add(OracleReport.compare("<sigma P' R> = -<sigma R>", (sigma * P.slope * R.value).mean(), -(sigma * R.value).mean(), "constant capacity"))
        add(OracleReport.pointwise("S' = -P/sigma0", S.slope + P.value * (gamma0 / sigma0), P.value * (gamma0 / sigma0), "constant capacity"))
        add(
            OracleReport.compare(
                "<sigma M'> by parts",
                (sigma * M.slope).mean(),
                (sigma * S.value * P.slope).mean()
                - (sigma * S.slope * P.value).mean()
                + gamma0 * p2
                - gamma0 * (sigma * P.value * P.value).mean() / sigma0,
                "integration by parts of M against P, constant capacity",
            )
        )
        add(OracleReport.compare("<sigma S> + <sigma M'> = gamma0 <P^2>", coeffs.e_txx, gamma0 * p2, "constant capacity"))
        add(
            OracleReport.compare(
                "<sigma N'> = -v gamma0 <P R'>",
                (sigma * N.slope).mean(),
                -v * gamma0 * (P.value * R.slope).mean(),
                "integration by parts of N against P, constant capacity",
            )
        )
        add(
            OracleReport.compare(
                "<sigma N'> = v^2 <P^2/sigma>",
                (sigma * N.slope).mean(),
                v * v * gamma0 * gamma0 * (P.value * P.value / sigma).mean(),
                "constant capacity",
            )
        )
        add(OracleReport.vanishing("<P/sigma> = 0", (P.value / sigma).mean(), (P.value / sigma).max_abs(), "1/sigma = (P'+1)/sigma0"))
        sources = abs(coeffs.d_xx) + abs(coeffs.d_x)
        add(OracleReport.vanishing("first-order sources vanish", sources, v * gamma0 * P.value.max_abs(), "constant capacity"))
    if sigma_const and not gamma_const:
        gq = (gamma * Q.value).mean()
        gq_scale = (gamma * Q.value).max_abs()
        add(OracleReport.vanishing("<gamma Q> = 0", gq, gq_scale, "constant conductivity"))
        add(OracleReport.pointwise("R' = -2Q", R.slope + Q.value * 2.0, Q.value * 2.0, "constant conductivity"))
        if v != 0.0:
            rebuilt = -(Q.slope * (sigma0 / v)) + gamma0
            add(OracleReport.pointwise("gamma = gamma0 - sigma0 Q'/v", gamma - rebuilt, gamma, "constant conductivity"))
        add(OracleReport.vanishing("a_f = 0", coeffs.a_f, gq_scale / gamma0, "constant conductivity"))
    if gamma_const or sigma_const:
        nr = nonreciprocity_model1(pipeline)
        add(OracleReport.compare(f"{nr['name']} closed form", nr["assembled"], nr["closed_form"], "single-parameter modulation"))
        if v > 0.0 and nr["name"] != "uniform":
            add(OracleReport.compare(f"{nr['name']} > 0", float(nr["assembled"] > 0.0), 1.0, "positivity for v > 0"))
    return out


def _model2_identities(pipeline: CellPipeline) -> List[OracleReport]:
    problem, corr, coeffs = pipeline.problem, pipeline.correctors, pipeline.coefficients
    sigma, rho, v, c = problem.sigma, problem.rho, problem.v, float(problem.c)
    out: List[OracleReport] = []
    add = out.append
    add(OracleReport.compare("model2 W0 = 0", coeffs.W0, 0.0, "density modulation"))
    add(OracleReport.compare("N_adv reduced form", coeffs.N_adv, coeffs.N_adv_reduced, "assembled versus reduced"))
    rho0 = coeffs.rho0
    P = corr.require("P").value
    if rho.is_constant():
        add(OracleReport.compare("N_adv = 2 c v rho0 <P^2>", coeffs.N_adv, 2.0 * c * v * rho0 * (P * P).mean(), "constant density"))
    if sigma.is_constant():
        primitive = (rho - rho0).antiderivative()
        variance = (primitive * primitive).mean() - primitive.mean() ** 2
        add(
            OracleReport.compare(
                "N_adv = (2 c v / rho0) Var(int delta rho)",
                coeffs.N_adv,
                2.0 * c * v / rho0 * variance,
                "constant conductivity",
            )
        )
    return out


# random laminates


def random_laminate(
    rng: np.random.Generator,
    model: Union[Model, str] = Model.MODEL1,
    freeze: Optional[str] = None,
    h: float = 0.1,
    min_pieces: int = 2,
    max_pieces: int = 6,
) -> LaminateSpec:
    """
    Piecewise-constant laminate with 2-6 pieces, values log-uniform in [0.1, 10]
    and scaled speed log-uniform in [1e-3, 1]. freeze in {"sigma", "gamma", "rho"}
    makes that profile constant.
    """
    model = Model.parse(model.value if isinstance(model, Model) else model)
    n = int(rng.integers(min_pieces, max_pieces + 1))
    inner = np.sort(rng.uniform(0.0, 1.0, n - 1))
    while np.any(np.diff(np.concatenate(([0.0], inner, [1.0]))) < 1e-3):
        inner = np.sort(rng.uniform(0.0, 1.0, n - 1))
    edges = np.concatenate(([0.0], inner, [1.0]))

    def draw(frozen: bool) -> np.ndarray:
        if frozen:
            return np.full(n, 10.0 ** rng.uniform(-1.0, 1.0))
        return 10.0 ** rng.uniform(-1.0, 1.0, n)

    sigma = UnitCellFunction.piecewise_constant(edges, draw(freeze == "sigma"))
    if model is Model.MODEL2:
        rho = UnitCellFunction.piecewise_constant(edges, draw(freeze == "rho"))
        c = 10.0 ** rng.uniform(-1.0, 1.0)
        profile = MaterialProfile.from_density(sigma, rho, c)
    else:
        gamma = UnitCellFunction.piecewise_constant(edges, draw(freeze == "gamma"))
        profile = MaterialProfile(sigma=sigma, gamma=gamma)
    draft = LaminateSpec(profile=profile, h=h, v_m=0.0, model=model)
    v = 10.0 ** rng.uniform(-3.0, 0.0)
    v_m = v * ScaleSet.default_for(draft).v_star
    return LaminateSpec(profile=profile, h=h, v_m=v_m, model=model)


_AUDIT_FAMILIES = (
    (Model.MODEL1, None),
    (Model.MODEL1, "gamma"),
    (Model.MODEL1, "sigma"),
    (Model.MODEL2, None),
    (Model.MODEL2, "sigma"),
    (Model.MODEL2, "rho"),
)


def identity_audit(seeds: Union[int, Iterable[int]] = DEFAULT_AUDIT_SEEDS) -> List[OracleReport]:
    """identity_report over random laminates of every family, one draw per family and seed."""
    seed_list = range(seeds) if isinstance(seeds, int) else list(seeds)
    reports: List[OracleReport] = []
    for seed in seed_list:
        rng = np.random.default_rng(seed)
        for model, freeze in _AUDIT_FAMILIES:
            spec = random_laminate(rng, model=model, freeze=freeze)
            label = f"seed={seed} {model.value} freeze={freeze or 'none'}"
            for report in identity_report(homogenize(spec)):
                reports.append(_relabel(report, f"{label}: {report.name}"))
    return reports


def _relabel(report: OracleReport, name: str) -> OracleReport:
    return OracleReport(name, report.lhs, report.rhs, report.abs_error, report.rel_error, report.tolerance, report.passed, report.provenance, report.atol)


# bilayer audits


def beta_audit(bilayer: BilayerSpec) -> List[OracleReport]:
    """Closed-form beta values against corrector moments and quadrature."""
    pipeline = homogenize(make_bilayer(bilayer))
    coeffs = pipeline.coefficients
    closed = bilayer_closed_forms(bilayer)
    P = pipeline.correctors.require("P").value
    reports = [
        OracleReport.compare("beta1 closed form = <P^2>", closed["beta1"], coeffs.beta1, "bilayer", rtol=BETA_RTOL),
        OracleReport.compare(
            "beta1 quadrature", coeffs.beta1, product_moment(P, P).value, "midpoint ladder", rtol=BETA_RTOL
        ),
        OracleReport.compare("beta2 closed form = <P^2/sigma>/sigma*", closed["beta2"], coeffs.beta2, "bilayer", rtol=BETA_RTOL),
    ]
    if closed["beta3"] is not None and coeffs.beta3 is not None:
        reports.append(
            OracleReport.compare("beta3 closed form = (rho*)^2 <S'^2>", closed["beta3"], coeffs.beta3, "bilayer", rtol=BETA_RTOL)
        )
    return reports


def order0_reproduction(bilayer: BilayerSpec) -> List[OracleReport]:
    values = dimensional_order0(homogenize(make_bilayer(bilayer)))
    return [
        OracleReport.compare("sigma0 = 29.7", values["sigma0"], 29.7, "worked bilayer, 0.1 absolute", rtol=0.0, atol=0.1),
        OracleReport.compare(
            "v_m W0 two routes", values["v_m_W0"], values["v_m_W0_from_scaled"], "dimensional versus scaled"
        ),
    ]


def _exact_omega(bilayer: BilayerSpec, kappa: float, points: int = 9) -> complex:
    branch = find_branch(bilayer, kappa_grid=np.linspace(0.0, kappa, points)).in_frame(Frame.FIXED)
    if not branch.converged[-1]:
        _log.warning("exact root at kappa=%.4g, h=%.4g did not converge", kappa, bilayer.h)
    return complex(branch.omega[-1])


def taylor_errors(bilayer: BilayerSpec, kappa: float, h_ladder: Sequence[float], order: int = 2) -> np.ndarray:
    errors = []
    for h in h_ladder:
        scaled = bilayer.replace(h=h)
        exact = _exact_omega(scaled, kappa)
        predicted = complex(effective_prediction(make_bilayer(scaled), order)(kappa))
        errors.append(abs(exact - predicted) / abs(exact))
    return np.asarray(errors)


def taylor_consistency(
    bilayer: BilayerSpec,
    kappa: float = 1.0,
    h_ladder: Sequence[float] = (0.1, 0.05, 0.025, 0.0125),
) -> OracleReport:
    """Observed order in h of the order-2 dispersion error at fixed kappa."""
    spec = make_bilayer(bilayer)
    if bilayer.model is Model.MODEL1 and not spec.is_gamma_constant:
        raise ValueError("taylor_consistency needs constant capacity (model1) or a model2 laminate")
    if bilayer.model is Model.MODEL2 and not spec.is_sigma_constant:
        raise ValueError("taylor_consistency needs constant conductivity for model2")
    errors = taylor_errors(bilayer, kappa, h_ladder)
    order = fitted_order(h_ladder, errors)
    _log.info("taylor consistency %s: errors %s order %.3f", bilayer.model.value, np.array2string(errors, precision=3), order)
    return OracleReport.at_least(
        f"taylor order {bilayer.model.value} kappa={kappa:g}",
        order,
        TAYLOR_TARGET_ORDER,
        TAYLOR_TARGET_ORDER - TAYLOR_MIN_ORDER,
        "exact versus order-2 dispersion",
    )


def order_errors(
    bilayer: BilayerSpec,
    orders: Sequence[int] = (0, 1, 2),
    kappa_h: Sequence[float] = ORDER_WINDOW_KAPPA_H,
    points: int = ORDER_WINDOW_POINTS,
) -> Dict[int, float]:
    """Max relative error |Omega_exact - Omega_order| / |Omega_exact| over the kappa h window."""
    lo, hi = kappa_h
    kappa = np.linspace(lo / bilayer.h, hi / bilayer.h, points)
    # continuation from kappa = 0 keeps the branch on the least damped root
    lead = np.linspace(0.0, kappa[0], 5)[:-1]
    branch = find_branch(bilayer, kappa_grid=np.concatenate([lead, kappa])).in_frame(Frame.FIXED)
    exact = branch.omega[lead.size:]
    converged = branch.converged[lead.size:]
    if not np.all(converged):
        _log.warning("exact branch unconverged at %d of %d points", np.count_nonzero(~converged), converged.size)
    spec = make_bilayer(bilayer)
    errors = {}
    for order in orders:
        predicted = effective_prediction(spec, order)(kappa)
        with np.errstate(invalid="ignore"):
            rel = np.abs(exact - predicted) / np.abs(exact)
        errors[order] = float(np.max(np.where(converged, rel, np.inf)))
    return errors


def order_improvement(bilayer: BilayerSpec, kappa_h: Sequence[float] = ORDER_WINDOW_KAPPA_H) -> OracleReport:
    """Order 2 fits the exact branch strictly better than order 0, with no order getting worse."""
    spec = make_bilayer(bilayer)
    if (bilayer.model is Model.MODEL1 and not spec.is_gamma_constant) or (
        bilayer.model is Model.MODEL2 and not spec.is_sigma_constant
    ):
        raise ValueError("order_improvement needs a single modulated parameter")
    errors = order_errors(bilayer, kappa_h=kappa_h)
    slack = 1.0 + 1e-9
    monotone = errors[1] <= errors[0] * slack and errors[2] <= errors[1] * slack
    passed = bool(np.isfinite(errors[2])) and errors[2] < errors[0] and monotone
    _log.info("order improvement %s: %s", bilayer.model.value, errors)
    return OracleReport(
        f"order-2 beats order-0 {bilayer.model.value} kappa h in [{kappa_h[0]:g}, {kappa_h[1]:g}]",
        errors[2],
        errors[0],
        max(0.0, errors[2] - errors[0]),
        errors[2] / errors[0] if errors[0] > 0.0 else math.inf,
        1.0,
        passed,
        "max relative error, orders 0, 1, 2",
        0.0,
    )


# degree-4 law of N_adv in the volume fraction


def _normalized_contrasts(bilayer: BilayerSpec) -> Dict[str, float]:
    """Contrasts of 1/sigma and rho relative to their means, plus scaled c and v."""
    pipeline = homogenize(make_bilayer(bilayer))
    problem = pipeline.problem
    inv = 1.0 / problem.sigma
    inv_mean = inv.mean()
    rho_mean = problem.rho.mean()
    a, b = inv(0.5 * bilayer.phi), inv(0.5 * (1.0 + bilayer.phi))
    ra, rb = problem.rho(0.5 * bilayer.phi), problem.rho(0.5 * (1.0 + bilayer.phi))
    return {
        "d_inv_sigma": (a - b) / inv_mean,
        "d_rho": (ra - rb) / rho_mean,
        "c": float(problem.c),
        "v": problem.v,
    }


def _normalized_bilayer(phi: float, contrasts: Dict[str, float]) -> LaminateSpec:
    ds, dr = contrasts["d_inv_sigma"], contrasts["d_rho"]
    edges = [0.0, phi, 1.0]
    sigma = UnitCellFunction.piecewise_constant(edges, [1.0 / (1.0 + (1.0 - phi) * ds), 1.0 / (1.0 - phi * ds)])
    rho = UnitCellFunction.piecewise_constant(edges, [1.0 + (1.0 - phi) * dr, 1.0 - phi * dr])
    profile = MaterialProfile.from_density(sigma, rho, contrasts["c"])
    return LaminateSpec(profile=profile, h=1.0, v_m=contrasts["v"], model=Model.MODEL2)


def _admissible_phi(contrasts: Dict[str, float]) -> tuple:
    lo, hi = 0.0, 1.0
    for d in (contrasts["d_inv_sigma"], contrasts["d_rho"]):
        if d > 1.0:
            hi = min(hi, 1.0 / d)
        elif d < -1.0:
            lo = max(lo, 1.0 + 1.0 / d)
    return lo, hi


def phi_polynomial_audit(bilayer: BilayerSpec, samples: int = 13) -> List[OracleReport]:
    """
    N_adv over a volume-fraction family that keeps <1/sigma> = 1, <rho> = 1 and the
    normalized contrasts fixed. It is then a degree-4 polynomial in phi,
    2 c v (d_rho - d_inv_sigma)^2 phi^2 (1 - phi)^2 / 12.
    """
    if samples < PHI_MIN_SAMPLES:
        raise ValueError(f"need at least {PHI_MIN_SAMPLES} volume fractions")
    contrasts = _normalized_contrasts(bilayer)
    lo, hi = _admissible_phi(contrasts)
    margin = 0.05 * (hi - lo)
    phis = np.linspace(lo + margin, hi - margin, samples)
    scales = ScaleSet(kappa_star=1.0, sigma_star=1.0, gamma_star=1.0, rho_star=1.0)
    values = np.array([homogenize(_normalized_bilayer(phi, contrasts), scales=scales).coefficients.N_adv for phi in phis])

    fit = np.polynomial.Polynomial.fit(phis, values, 4).convert()
    residual = float(np.max(np.abs(fit(phis) - values)))
    norm = float(np.linalg.norm(fit.coef))
    c, v = contrasts["c"], contrasts["v"]
    law = 2.0 * c * v * (contrasts["d_rho"] - contrasts["d_inv_sigma"]) ** 2 * phis ** 2 * (1.0 - phis) ** 2 / 12.0
    reports = [
        OracleReport.compare("N_adv(phi) degree-4 residual", residual, 0.0, "least squares", rtol=0.0, atol=PHI_FIT_RTOL * max(norm, 1e-300)),
        OracleReport.compare(
            "N_adv(phi) closed law",
            float(np.max(np.abs(values - law))),
            0.0,
            "normalized bilayer family",
            rtol=0.0,
            atol=IDENTITY_RTOL * max(float(np.max(np.abs(law))), IDENTITY_ATOL),
        ),
    ]
    if contrasts["d_rho"] != contrasts["d_inv_sigma"]:
        reports.append(OracleReport.compare("N_adv(phi) not identically zero", float(norm > 0.0), 1.0, "polynomial norm"))
    return reports


# audit matrix


def audit_matrix(seeds: int = DEFAULT_AUDIT_SEEDS, include_dispersion: bool = True) -> List[OracleReport]:
    both = BilayerSpec(**EXAMPLE_BOTH)
    sigma_only = BilayerSpec(**EXAMPLE_SIGMA_ONLY)
    density = BilayerSpec(model=Model.MODEL2, **EXAMPLE_MODEL2)
    reports: List[OracleReport] = []
    reports.extend(order0_reproduction(both))
    reports.extend(identity_report(homogenize(make_bilayer(both))))
    reports.extend(beta_audit(sigma_only))
    reports.extend(beta_audit(density))
    reports.extend(phi_polynomial_audit(density))
    reports.extend(identity_audit(seeds))
    if include_dispersion:
        reports.append(taylor_consistency(sigma_only))
        reports.append(taylor_consistency(density))
        reports.append(order_improvement(sigma_only))
        reports.append(order_improvement(density))
    counts = summarize(reports)
    _log.info("audit matrix: %d checks, %d failed", counts["total"], counts["failed"])
    return reports
