"""Named validation suites runnable from the command line.

Each suite re-derives its expected values independently (closed forms,
brute-force sums, direct substitution) and reports a margin: how far the
worst observed value sits from its threshold, positive meaning pass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .asymptotics import verify_l1_identity
from .autocov import AutocovSeq, max_deviation, sample_autocov
from .estimation import (
    degeneracy_check,
    estimate_continuous_from_autocov,
    estimate_discrete,
)
from .linalg import definiteness, expm_sym, logm_spd, spectral_norm
from .processes import (
    ModelSpec,
    lamperti_forward,
    lamperti_inverse,
    noise_variance,
    ou_autocov,
    recover_noise,
    reconstruct_from_noise,
    simulate_var1,
    var1_autocov,
)
from .riccati import (
    CareCoefficients,
    build_coeffs_continuous,
    build_coeffs_discrete,
    care_residual,
    solve_care,
)
from .rng import stream

__all__ = ["CheckResult", "SuiteResult", "VALIDATION_SUITES", "run_suite", "available_suites"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    margin: float
    detail: str = ""


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    checks: tuple

    def to_dict(self) -> dict:
        return {
            "suite": self.name,
            "passed": self.passed,
            "checks": [
                {
                    "name": c.name,
                    "passed": c.passed,
                    "margin": c.margin,
                    "detail": c.detail,
                }
                for c in self.checks
            ],
        }


def _bound_check(name: str, value: float, bound: float, detail: str = "") -> CheckResult:
    return CheckResult(
        name=name,
        passed=value <= bound,
        margin=bound - value,
        detail=detail or f"value {value:.3g} vs bound {bound:.3g}",
    )


def _reference_model() -> ModelSpec:
    return ModelSpec.var1(np.array([[0.5, 0.1], [0.1, 0.4]]), np.eye(2))


def suite_care_analytic() -> SuiteResult:
    """Scalar AR(1) with closed-form autocovariances: exact coefficients."""
    spec = ModelSpec.var1([[0.5]], [[1.0]])
    gammas = var1_autocov(spec, 3)
    coeffs = build_coeffs_discrete(gammas, noise_variance(spec, 3), 3)
    sol = solve_care(coeffs)
    checks = (
        _bound_check("B", abs(coeffs.b[0, 0] - 7.0 / 6.0), 1e-10),
        _bound_check("C", abs(coeffs.c[0, 0] - 22.0 / 3.0), 1e-10),
        _bound_check("D", abs(coeffs.d[0, 0] - 2.0 / 3.0), 1e-10),
        _bound_check("solution", abs(sol.x[0, 0] - 0.5), 1e-10),
    )
    return SuiteResult("care-analytic", all(c.passed for c in checks), checks)


def suite_care_continuous_analytic() -> SuiteResult:
    """Scalar diffusion with closed-form autocovariances at horizon 1."""
    dt = 1e-3
    lags = np.arange(0, 1.0 + dt / 2, dt)
    acov = AutocovSeq(lags, (np.exp(-lags) / 2.0).reshape(-1, 1, 1))
    coeffs = build_coeffs_continuous(acov, np.array([[1.0]]), 1.0)
    result = estimate_continuous_from_autocov(acov, np.array([[1.0]]), 1.0)
    target = float(np.exp(-1.0))
    checks = (
        _bound_check("C", abs(coeffs.c[0, 0] - target), 1e-4),
        _bound_check("D", abs(coeffs.d[0, 0] - target), 1e-4),
        _bound_check("drift", abs(result.estimate[0, 0] - 1.0), 1e-3),
    )
    return SuiteResult("care-continuous-analytic", all(c.passed for c in checks), checks)


def suite_care_random() -> SuiteResult:
    """Random SPD instances: residual, symmetry, PSD-ness."""
    rng = stream(20240, 0)
    checks = []
    for trial in range(25):
        n = int(rng.integers(1, 5))
        q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        c = (q * rng.uniform(0.3, 3.0, n)) @ q.T
        q2, _ = np.linalg.qr(rng.standard_normal((n, n)))
        d = (q2 * rng.uniform(0.3, 3.0, n)) @ q2.T
        b = rng.standard_normal((n, n))
        cf = CareCoefficients(
            b=b, c=c, d=0.5 * (d + d.T), horizon=1.0, provenance="discrete",
            pd_report_c=definiteness(c), pd_report_d=definiteness(d),
        )
        sol = solve_care(cf)
        tol = 1e-8 * max(1.0, spectral_norm(d))
        checks.append(
            _bound_check(f"residual[{trial}]", sol.residual_norm, tol)
        )
        checks.append(
            _bound_check(
                f"psd[{trial}]", -float(np.linalg.eigvalsh(sol.x).min()), 1e-9
            )
        )
    return SuiteResult("care-random", all(c.passed for c in checks), tuple(checks))


def suite_riccati_residual_discrete() -> SuiteResult:
    """Reference model: I - coeff solves the equation at every horizon."""
    spec = _reference_model()
    gammas = var1_autocov(spec, 9)
    theta = np.eye(2) - spec.coeff
    checks = []
    for t in range(1, 9):
        coeffs = build_coeffs_discrete(gammas, noise_variance(spec, t), t)
        checks.append(_bound_check(f"t={t}", care_residual(coeffs, theta), 1e-9))
    return SuiteResult(
        "riccati-residual-discrete", all(c.passed for c in checks), tuple(checks)
    )


def suite_riccati_residual_continuous() -> SuiteResult:
    """Diffusion models: the drift solves the quadrature equation."""
    checks = []
    dt = 1e-3
    for t in (0.5, 1.0, 2.0):
        lags = np.arange(0, t + dt / 2, dt)
        acov = AutocovSeq(lags, (np.exp(-lags) / 2.0).reshape(-1, 1, 1))
        coeffs = build_coeffs_continuous(acov, np.array([[t]]), t)
        checks.append(
            _bound_check(f"scalar t={t}", care_residual(coeffs, np.array([[1.0]])), 1e-5)
        )
    drift = np.array([[1.0, 0.3], [0.3, 1.5]])
    sigma = np.array([[1.0, 0.2], [0.2, 0.8]])
    spec = ModelSpec.ou(drift, sigma)
    for t in (0.5, 1.0, 2.0):
        lags = np.arange(0, t + dt / 2, dt)
        acov = ou_autocov(spec, lags)
        coeffs = build_coeffs_continuous(acov, noise_variance(spec, t), t)
        checks.append(
            _bound_check(f"matrix t={t}", care_residual(coeffs, drift), 1e-5)
        )
    return SuiteResult(
        "riccati-residual-continuous", all(c.passed for c in checks), tuple(checks)
    )


def suite_l1_identity() -> SuiteResult:
    """Coefficient-error map equals direct coefficient deltas exactly."""
    rng = stream(20241, 0)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 3))
        t = int(rng.integers(1, 5))
        base = rng.standard_normal((t + 1, n, n))
        base[0] = 0.5 * (base[0] + base[0].T)
        pert = rng.standard_normal((t + 1, n, n))
        pert[0] = 0.5 * (pert[0] + pert[0].T)
        lags = np.arange(t + 1, dtype=float)
        worst = max(
            worst,
            verify_l1_identity(AutocovSeq(lags, base), AutocovSeq(lags, base + pert), t),
        )
    checks = (_bound_check("max discrepancy", worst, 1e-12),)
    return SuiteResult("l1-identity", all(c.passed for c in checks), checks)


def suite_lamperti_roundtrip() -> SuiteResult:
    """inverse(forward(path)) reproduces the path to 1e-12."""
    rng = stream(20242, 0)
    spec = _reference_model()
    path = simulate_var1(spec, 50, 0, rng)
    scaling = np.array([[0.2, 0.05], [0.05, 0.15]])
    back = lamperti_inverse(lamperti_forward(path, scaling), scaling)
    rel = np.abs(back.values - path.values).max() / max(np.abs(path.values).max(), 1.0)
    checks = (_bound_check("relative roundtrip error", rel, 1e-12),)
    return SuiteResult("lamperti-roundtrip", all(c.passed for c in checks), checks)


def suite_reconstruction_decay() -> SuiteResult:
    """Truncated noise reconstruction decays with the window as bounded."""
    spec = _reference_model()
    path = simulate_var1(spec, 300, 0, stream(20243, 0))
    drift = -logm_spd(spec.coeff)
    noise = recover_noise(path, spec.coeff)
    max_state_norm = float(np.max(np.linalg.norm(path.values, axis=0)))
    checks = []
    prev = None
    for window in (5, 10, 20, 40):
        rec = reconstruct_from_noise(noise, drift, window)
        idx = np.arange(window + 1, path.n_points)
        bound = spectral_norm(expm_sym(-(window + 1) * drift)) * max_state_norm
        err_max = float(
            np.max(np.linalg.norm(path.values[:, idx] - rec.values, axis=0))
        )
        checks.append(_bound_check(f"bound window={window}", err_max, bound))
        if prev is not None:
            checks.append(
                CheckResult(
                    f"monotone window={window}",
                    err_max <= prev,
                    prev - err_max,
                )
            )
        prev = err_max
    return SuiteResult(
        "reconstruction-decay", all(c.passed for c in checks), tuple(checks)
    )


def suite_gate_fallback() -> SuiteResult:
    """Zero-noise data trips the gates and returns the zero matrix."""
    spec = ModelSpec.var1([[0.5]], [[0.0]])
    path = simulate_var1(spec, 200, 0, stream(20244, 0))
    result = estimate_discrete(path, noise_variance(spec, 3), 3)
    checks = (
        CheckResult("gate tripped", not result.gate_passed, 1.0 if not result.gate_passed else -1.0),
        _bound_check("estimate is zero", float(np.abs(result.estimate).max()), 0.0),
    )
    return SuiteResult("gate-fallback", all(c.passed for c in checks), checks)


def suite_degeneracy() -> SuiteResult:
    """Constructed repeated-roots series flagged; generic AR(1) not."""
    phi1, phi2 = 0.5, 0.9
    omega = float(np.arccos((phi1 + phi2) / 2.0))
    lags = np.arange(8, dtype=float)
    acov = AutocovSeq(lags, np.cos(omega * lags).reshape(-1, 1, 1))
    degen = degeneracy_check(
        acov, lambda t: float(np.cos(omega * abs(t))) * (1.0 - phi1 * phi2), range(0, 4)
    )
    spec = ModelSpec.var1([[0.5]], [[1.0]])
    generic = degeneracy_check(
        var1_autocov(spec, 6), lambda t: 1.0 if t == 0 else 0.0, range(0, 3)
    )
    checks = (
        CheckResult("constructed flagged", degen.is_degenerate,
                     1.0 if degen.is_degenerate else -1.0, degen.reason),
        _bound_check(
            "coefficient quadratic residual",
            degen.quadratic2_max_residual if degen.quadratic2_max_residual is not None else 1.0,
            1e-8,
        ),
        CheckResult("generic not flagged", not generic.is_degenerate,
                     1.0 if not generic.is_degenerate else -1.0, generic.reason),
    )
    return SuiteResult("degeneracy", all(c.passed for c in checks), checks)


def suite_bounds() -> SuiteResult:
    """Coefficient perturbations dominated by the worst autocovariance error."""
    spec = _reference_model()
    t = 3
    truth = var1_autocov(spec, t)
    v = noise_variance(spec, t)
    coeffs_true = build_coeffs_discrete(truth, v, t)
    worst = -np.inf
    for rep in range(20):
        path = simulate_var1(spec, 2000, 0, stream(20245, rep))
        est = sample_autocov(path, t)
        coeffs_est = build_coeffs_discrete(est, v, t)
        m = max_deviation(est, truth)
        slack = 1e-12
        worst = max(
            worst,
            spectral_norm(coeffs_est.d - coeffs_true.d) - (4.0 * m + slack),
            spectral_norm(coeffs_est.c - coeffs_true.c) - (t**2 * m + slack),
            spectral_norm(coeffs_est.b - coeffs_true.b) - (2.0 * t * m + slack),
        )
    checks = (_bound_check("worst inequality slack", worst, 0.0),)
    return SuiteResult("bounds", all(c.passed for c in checks), checks)


VALIDATION_SUITES = {
    "care-analytic": suite_care_analytic,
    "care-continuous-analytic": suite_care_continuous_analytic,
    "care-random": suite_care_random,
    "riccati-residual-discrete": suite_riccati_residual_discrete,
    "riccati-residual-continuous": suite_riccati_residual_continuous,
    "l1-identity": suite_l1_identity,
    "lamperti-roundtrip": suite_lamperti_roundtrip,
    "reconstruction-decay": suite_reconstruction_decay,
    "gate-fallback": suite_gate_fallback,
    "degeneracy": suite_degeneracy,
    "bounds": suite_bounds,
}


def available_suites() -> list[str]:
    return sorted(VALIDATION_SUITES)


def run_suite(name: str) -> SuiteResult:
    if name not in VALIDATION_SUITES:
        raise KeyError(
            f"unknown suite {name!r}; available: {', '.join(available_suites())}"
        )
    return VALIDATION_SUITES[name]()
