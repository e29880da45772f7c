"""
Monitores numéricos de las cotas de la teoría sobre trayectorias registradas

Las cotas de los lemas usan constantes uniformes G y q; aquí se sustituyen
por los máximos acumulados G_t = max_{τ≤t}‖g_τ‖ y q̄_t = max_{τ≤t} q_τ, lo
cual es válido porque las inducciones solo consumen cotas sobre prefijos.
Se asume modo analítico con retroalimentación de error activa.
"""
import logging
from typing import Sequence

import numpy as np

from ldadam.errors import ConfigurationError
from ldadam.linalg import Matrix, orthogonal_complete
from ldadam.optim.ldadam import SNAPSHOT_MAX_DIM
from ldadam.theory.records import MonitorReport, TrajectoryRecord, Violation

logger = logging.getLogger(__name__)

RELATIVE_SLACK = 1e-9
PSD_TOL = 1e-9


def _running_maxima(trajectory: Sequence[TrajectoryRecord]):
    G, q_bar = 0.0, 0.0
    for record in trajectory:
        G = max(G, record.grad_norm)
        q_bar = max(q_bar, record.q)
        yield record, G, q_bar


def lemma1_monitor(trajectory: Sequence[TrajectoryRecord], beta1: float) -> MonitorReport:
    """
    ‖b_t‖ ≤ G_t/(1−q̄_t) y ‖e_{t+1}‖ ≤ q̄_t·G_t/((1−β₁)(1−q̄_t))

    Con q̄_t = 0 la segunda cota exige e = 0 (solo la holgura absoluta).
    """
    report = MonitorReport(name='lemma1')
    for record, G, q_bar in _running_maxima(trajectory):
        report.checked += 1
        if q_bar >= 1.0:
            report.violations.append(Violation(record.t, 'q_bar', q_bar, 1.0))
            continue
        slack = RELATIVE_SLACK * (G / (1.0 - q_bar) + G / (1.0 - beta1))
        b_bound = G / (1.0 - q_bar)
        if record.b_norm > b_bound + slack:
            report.violations.append(Violation(record.t, 'b_norm', record.b_norm, b_bound))
        e_bound = q_bar * G / ((1.0 - beta1) * (1.0 - q_bar))
        if record.e_norm > e_bound + slack:
            report.violations.append(Violation(record.t, 'e_norm', record.e_norm, e_bound))
    if not report.passed:
        logger.warning(f"⚠️ lemma1: {len(report.violations)} violaciones en {report.checked} pasos")
    return report


def vhat_bound(G: float, q_bar: float, beta1: float, beta2: float) -> float:
    """(1+β₂)/(1−β₂) · ((1−(1−q̄)β₁)/((1−β₁)(1−q̄)))² · G²"""
    factor = (1.0 - (1.0 - q_bar) * beta1) / ((1.0 - beta1) * (1.0 - q_bar))
    return (1.0 + beta2) / (1.0 - beta2) * factor ** 2 * G ** 2


def lemma4_monitor(trajectory: Sequence[TrajectoryRecord], beta1: float, beta2: float) -> MonitorReport:
    """‖v̂_t‖_max ≤ vhat_bound(G_t, q̄_t) y v̂_max no decreciente"""
    report = MonitorReport(name='lemma4')
    previous = 0.0
    for record, G, q_bar in _running_maxima(trajectory):
        report.checked += 1
        if q_bar >= 1.0:
            report.violations.append(Violation(record.t, 'q_bar', q_bar, 1.0))
            continue
        bound = vhat_bound(G, q_bar, beta1, beta2)
        slack = RELATIVE_SLACK * (bound + G / (1.0 - beta1))
        if record.vhat_max > bound + slack:
            report.violations.append(Violation(record.t, 'vhat_max', record.vhat_max, bound))
        if record.vhat_max < previous:
            report.violations.append(Violation(record.t, 'vhat_monotone', record.vhat_max, previous))
        previous = record.vhat_max
    if not report.passed:
        logger.warning(f"⚠️ lemma4: {len(report.violations)} violaciones en {report.checked} pasos")
    return report


# ==================== PRECONDICIONADOR Γ ====================#
def gamma_matrix(P: Matrix, vhat: np.ndarray, epsilon: float) -> Matrix:
    """Γ = Q·Diag^{-1/2}(v̂ + ε, ‖v̂‖_min + ε)·Qᵀ con Q = completado ortogonal de P"""
    d, r = P.shape
    Q = orthogonal_complete(P)
    diagonal = np.concatenate([vhat + epsilon, np.full(d - r, float(np.min(vhat)) + epsilon)])
    return (Q * diagonal ** -0.5) @ Q.T


def gamma_delta_sums(snapshots: Sequence[tuple[Matrix, np.ndarray]],
                     epsilon: float) -> tuple[float, float, float]:
    """
    (Σ‖ΔΓ_t‖, Σ‖ΔΓ_t‖², min λ(ΔΓ_t)) con ΔΓ_t = Γ_{t−1} − Γ_t y Γ₀ = ε^{-1/2}·I

    snapshots son los pares (P_t, v̂ᵘ_t) de una capa vectorial, desde t = 1.
    """
    if not snapshots:
        return 0.0, 0.0, 0.0
    d = snapshots[0][0].shape[0]
    if d > SNAPSHOT_MAX_DIM:
        raise ConfigurationError(f"El monitor Γ está limitado a d ≤ {SNAPSHOT_MAX_DIM} (d={d})")

    previous = np.eye(d) / np.sqrt(epsilon)
    sum_norm, sum_norm_sq, min_eig = 0.0, 0.0, np.inf
    for P, vhat in snapshots:
        current = gamma_matrix(P, np.asarray(vhat, dtype=np.float64).ravel(), epsilon)
        delta = previous - current
        eigenvalues = np.linalg.eigvalsh(0.5 * (delta + delta.T))
        norm = float(np.max(np.abs(eigenvalues)))
        sum_norm += norm
        sum_norm_sq += norm ** 2
        min_eig = min(min_eig, float(eigenvalues[0]))
        previous = current
    return sum_norm, sum_norm_sq, min_eig


def gamma_delta_monitor(snapshots: Sequence[tuple[Matrix, np.ndarray]], epsilon: float) -> MonitorReport:
    """
    Verifica ΔΓ_t ⪰ −1e-9·I, Σ‖ΔΓ_t‖ ≤ 2/√ε y Σ‖ΔΓ_t‖² ≤ 2/ε

    details guarda sum_norm, sum_norm_sq y min_eigenvalue.
    """
    sum_norm, sum_norm_sq, min_eig = gamma_delta_sums(snapshots, epsilon)
    report = MonitorReport(name='gamma_delta', checked=len(snapshots))
    report.details = {'sum_norm': sum_norm, 'sum_norm_sq': sum_norm_sq,
                      'min_eigenvalue': min_eig if snapshots else 0.0}
    last_t = len(snapshots)
    bound_norm = 2.0 / np.sqrt(epsilon)
    bound_sq = 2.0 / epsilon
    psd_floor = -PSD_TOL
    if snapshots and min_eig < psd_floor:
        report.violations.append(Violation(last_t, 'min_eigenvalue', min_eig, psd_floor))
    if sum_norm > bound_norm * (1.0 + RELATIVE_SLACK):
        report.violations.append(Violation(last_t, 'sum_norm', sum_norm, bound_norm))
    if sum_norm_sq > bound_sq * (1.0 + RELATIVE_SLACK):
        report.violations.append(Violation(last_t, 'sum_norm_sq', sum_norm_sq, bound_sq))
    return report
