"""
Monitores de la teoría: cotas de los lemas, Γ_t telescópico y constantes

La sonda de tasa vive en ldadam.theory.probes (depende del bucle de entrenamiento).
"""
from ldadam.theory.records import MonitorReport, TrajectoryRecord, Violation
from ldadam.theory.constants import (
    TheoryConstants,
    capture_pairs,
    compute_constants,
    constants_from_trajectory,
    estimate_sigma2,
    nonconvex_rate_bound,
    pl_base_step_size,
    pl_rate_bound,
    resolve_sigma2,
    theorem1_step_size,
    theorem2_step_size,
)
from ldadam.theory.monitors import (
    gamma_delta_monitor,
    gamma_delta_sums,
    gamma_matrix,
    lemma1_monitor,
    lemma4_monitor,
    vhat_bound,
)

__all__ = [
    'MonitorReport', 'TheoryConstants', 'TrajectoryRecord', 'Violation',
    'capture_pairs', 'compute_constants', 'constants_from_trajectory', 'estimate_sigma2',
    'gamma_delta_monitor', 'gamma_delta_sums', 'gamma_matrix', 'lemma1_monitor', 'lemma4_monitor',
    'nonconvex_rate_bound', 'pl_base_step_size', 'pl_rate_bound',
    'resolve_sigma2', 'theorem1_step_size', 'theorem2_step_size', 'vhat_bound',
]
