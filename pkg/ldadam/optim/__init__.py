"""
Optimizadores: LDAdam, Adam/AMSGrad, GaLore y calendarios de learning rate
"""
from ldadam.optim.adam import AdamState, adam_step, amsgrad_step
from ldadam.optim.config import AdamConfig, GaLoreConfig, OptimizerConfig, Schedule
from ldadam.optim.galore import GaLoreState, galore_step, new_galore_state
from ldadam.optim.layerwise import Adam, GaLore, LDAdam, LayerwiseOptimizer, StepReport, build_optimizer
from ldadam.optim.ldadam import (
    LDAdamState,
    StepDiagnostics,
    ldadam_accumulate,
    ldadam_fit_subspace,
    ldadam_init,
    ldadam_intermediate_first_moment,
    ldadam_intermediate_second_moment,
    ldadam_step,
    new_state,
    resolve_side,
)
from ldadam.optim.schedules import schedule_lr

__all__ = [
    'Adam', 'AdamConfig', 'AdamState', 'GaLore', 'GaLoreConfig', 'GaLoreState', 'LDAdam',
    'LDAdamState', 'LayerwiseOptimizer', 'OptimizerConfig', 'Schedule', 'StepDiagnostics',
    'StepReport', 'adam_step', 'amsgrad_step', 'build_optimizer', 'galore_step',
    'ldadam_accumulate', 'ldadam_fit_subspace', 'ldadam_init', 'ldadam_intermediate_first_moment',
    'ldadam_intermediate_second_moment', 'ldadam_step', 'new_galore_state', 'new_state',
    'resolve_side', 'schedule_lr',
]
