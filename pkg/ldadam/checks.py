"""
Batería de propiedades que ejecuta el subcomando `check`

Cada chequeo retorna un CheckResult; los chequeos "soft" (direccionales,
empíricos) se reportan como advertencia y no cuentan como falla.
`full=True` usa los tamaños de corrida de aceptación.
"""
import copy
import logging
import math
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from ldadam.accounting import PUBLISHED_ESTIMATES, get_model_spec, memory_bytes, optimizer_state_tokens
from ldadam.errors import LDAdamError
from ldadam.experiment import compare, parse_experiment_config, run_experiment
from ldadam.linalg import block_power_iteration_step, gram_schmidt, residual_ratio, truncated_svd
from ldadam.optim import (
    AdamState,
    GaLoreConfig,
    LDAdam,
    OptimizerConfig,
    adam_step,
    galore_step,
    ldadam_accumulate,
    ldadam_step,
    new_galore_state,
    new_state,
)
from ldadam.problems import (
    LogisticProblem,
    MLPProblem,
    QuadraticProblem,
    RosenbrockProblem,
    finite_diff_check,
    random_spd,
)
from ldadam.rng import STREAM_DATA, STREAM_INIT, STREAM_NOISE, make_rng
from ldadam.theory import gamma_delta_monitor, lemma1_monitor, lemma4_monitor
from ldadam.theory.probes import rate_probe
from ldadam.trainer import train

logger = logging.getLogger(__name__)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    soft: bool = False
    seconds: float = 0.0

    @property
    def failed(self) -> bool:
        return not self.passed and not self.soft

    def line(self) -> str:
        status = "✅" if self.passed else ("⚠️" if self.soft else "❌")
        return f"{status} {self.name}: {self.detail} ({self.seconds:.2f} s)"


# ==================== FUNCIONES AUXILIARES ====================#
def _relative(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(b))), 1e-300)
    return float(np.max(np.abs(a - b))) / scale


def _quadratic(d: int, kappa: float, seed: int, noise_sigma: float = 0.0, shapes=None) -> QuadraticProblem:
    rng = make_rng(seed, STREAM_DATA)
    H = random_spd(d, kappa, rng)
    return QuadraticProblem(H, rng.standard_normal(d), noise_sigma, shapes)


# ==================== CHEQUEOS ====================#
def check_gradient_oracles(full: bool) -> CheckResult:
    points = 10 if full else 3
    cases = [
        ("quadratic", _quadratic(8, 10.0, 1), 1e-6),
        ("logistic", LogisticProblem(64, 5, seed=2, batch_size=8), 1e-5),
        ("rosenbrock", RosenbrockProblem(4), 1e-5),
        ("mlp", MLPProblem([4, 6, 3], n_samples=32, seed=3, batch_size=8), 1e-4),
    ]
    worst = {}
    for name, problem, _ in cases:
        rng = make_rng(11, STREAM_INIT)
        errors = []
        for _ in range(points):
            theta = [p + 0.5 * rng.standard_normal(p.shape) for p in problem.initial_point(rng)]
            errors.append(finite_diff_check(problem, theta))
        worst[name] = max(errors)
    passed = all(worst[name] <= tol for name, _, tol in cases)
    detail = ", ".join(f"{name}={worst[name]:.1e}" for name in worst)
    return CheckResult("gradient_oracles", passed, detail)


def check_scalar_layer_adam(full: bool) -> CheckResult:
    """Capa 1×64 con r=1, ρ=0: LDAdam práctico coincide con Adam"""
    steps = 1000 if full else 200
    problem = _quadratic(64, 10.0, 5, noise_sigma=1.0, shapes=[(1, 64)])
    config = OptimizerConfig(beta1=0.9, beta2=0.999, rank=1, rho=0.0, mode='practical')
    state = new_state((1, 64), config)
    reference = AdamState.zeros((1, 64))
    theta = problem.initial_point(make_rng(5, STREAM_INIT))[0]
    theta_ref = theta.copy()
    noise = make_rng(5, STREAM_NOISE)
    worst = 0.0
    for _ in range(steps):
        g = problem.stochastic_gradient([theta], noise)[0]
        ldadam_accumulate(state, g)
        ldadam_step(state, theta, 1e-2)
        adam_step(reference, theta_ref, g, 1e-2, config.beta1, config.beta2, config.epsilon)
        worst = max(worst, _relative(theta, theta_ref))
    return CheckResult("scalar_layer_adam", worst <= 1e-12, f"max rel = {worst:.1e} en {steps} pasos")


def check_fixed_row_split(full: bool) -> CheckResult:
    """Base fija [I_r; 0] sin retroalimentación: filas 1..r siguen a Adam, el resto no cambia"""
    steps = 1000 if full else 200
    d, r = 32, 4
    problem = _quadratic(d, 10.0, 6, noise_sigma=1.0)
    config = OptimizerConfig(beta1=0.9, beta2=0.999, rank=r, projection='fixed',
                             error_feedback=False, mode='practical')
    state = new_state((d, 1), config)
    theta = problem.initial_point(make_rng(6, STREAM_INIT))[0]
    frozen = theta[r:].copy()
    head = theta[:r].copy()
    reference = AdamState.zeros((r, 1))
    noise = make_rng(6, STREAM_NOISE)
    worst = 0.0
    for _ in range(steps):
        g = problem.stochastic_gradient([theta], noise)[0]
        ldadam_accumulate(state, g)
        ldadam_step(state, theta, 1e-2)
        adam_step(reference, head, g[:r].copy(), 1e-2, config.beta1, config.beta2, config.epsilon)
        worst = max(worst, _relative(theta[:r], head))
    untouched = np.array_equal(theta[r:], frozen)
    passed = worst <= 1e-12 and untouched
    return CheckResult("fixed_row_split", passed, f"max rel = {worst:.1e}, resto intacto = {untouched}")


def check_galore_fixed_equivalence(full: bool) -> CheckResult:
    """𝒯 = 1 con gradientes en una dirección fija: GaLore = LDAdam de base fija sin retroalimentación"""
    steps = 500 if full else 100
    n, m = 8, 3
    rng = make_rng(9, STREAM_DATA)
    u = gram_schmidt(rng.standard_normal((n, 1)))
    u = u * np.sign(u[np.argmax(np.abs(u[:, 0])), 0])
    ld_config = OptimizerConfig(beta1=0.9, beta2=0.999, rank=1, projection='fixed',
                                fixed_basis=u.tolist(), error_feedback=False, side='left')
    ga_config = GaLoreConfig(rank=1, frequency=1, side='left')
    ld_state = new_state((n, m), ld_config)
    ga_state = new_galore_state((n, m), ga_config)
    theta = rng.standard_normal((n, m))
    theta_ga = theta.copy()
    worst = 0.0
    for _ in range(steps):
        g = u @ rng.standard_normal((1, m))
        ldadam_accumulate(ld_state, g)
        ldadam_step(ld_state, theta, 1e-2)
        galore_step(ga_state, theta_ga, g, 1e-2, ga_config.beta1, ga_config.beta2, ga_config.epsilon)
        worst = max(worst, _relative(theta, theta_ga))
    return CheckResult("galore_fixed_equivalence", worst <= 1e-12, f"max rel = {worst:.1e}")


def check_error_feedback_identity(full: bool) -> CheckResult:
    """(1−β₁)·e_{t+1} = b_t − P_t·m_t en cada paso"""
    steps = 2000 if full else 300
    d, r = 64, 8
    problem = _quadratic(d, 10.0, 4, noise_sigma=1.0)
    config = OptimizerConfig(rank=r, mode='analytical', projection='power_iteration')
    beta1 = config.beta1
    state = new_state((d, 1), config)
    theta = problem.initial_point(make_rng(4, STREAM_INIT))[0]
    noise = make_rng(4, STREAM_NOISE)
    worst = 0.0
    for _ in range(steps):
        P_m = state.P @ state.m if state.P is not None else np.zeros((d, 1))
        ldadam_accumulate(state, problem.stochastic_gradient([theta], noise)[0])
        b = beta1 * P_m + (1.0 - beta1) * state.A
        ldadam_step(state, theta, 1e-2)
        lhs = (1.0 - beta1) * state.A
        P_m_new = state.P @ state.m
        scale = np.linalg.norm(b) + np.linalg.norm(P_m_new) + np.linalg.norm(lhs)
        worst = max(worst, float(np.linalg.norm(lhs - (b - P_m_new))) / max(scale, 1e-300))
    return CheckResult("error_feedback_identity", worst <= 1e-12, f"max rel = {worst:.1e} en {steps} pasos")


def check_lemma_monitors(full: bool) -> CheckResult:
    """Cotas de los lemas, ortonormalidad y v ≥ 0 sobre corridas aleatorias en modo analítico"""
    runs = 20 if full else 4
    steps = 500 if full else 200
    violations, orth_worst, negative = 0, 0.0, False
    for seed in range(1, runs + 1):
        if seed % 2:
            problem = _quadratic(16, 10.0, seed, noise_sigma=0.5)
        else:
            problem = LogisticProblem(128, 16, seed=seed, batch_size=16)
        config = OptimizerConfig(rank=4, mode='analytical')
        optimizer = LDAdam(config, problem.param_shapes)

        def inspect(report):
            nonlocal orth_worst, negative
            orth_worst = max(orth_worst, report.orthonormality_error)
            negative = negative or any(np.any(s.v < 0.0) for s in optimizer.states)

        params = problem.initial_point(make_rng(seed, STREAM_INIT))
        result = train(problem, optimizer, params, steps, make_rng(seed, STREAM_NOISE), lr=1e-2, on_step=inspect)
        if result.diverged:
            return CheckResult("lemma_monitors", False, f"divergencia en la corrida {seed}: {result.error}")
        for report in (lemma1_monitor(result.records, config.beta1),
                       lemma4_monitor(result.records, config.beta1, config.beta2)):
            violations += len(report.violations)

    passed = violations == 0 and orth_worst <= 1e-10 and not negative
    detail = f"{runs} corridas, {violations} violaciones, max|PᵀP−I| = {orth_worst:.1e}, v<0: {negative}"
    return CheckResult("lemma_monitors", passed, detail)


def check_gamma_delta(full: bool) -> CheckResult:
    runs = 5 if full else 2
    failures = []
    for seed in range(1, runs + 1):
        problem = _quadratic(16, 10.0, 100 + seed, noise_sigma=0.5)
        config = OptimizerConfig(rank=2, mode='analytical', epsilon=1e-8)
        optimizer = LDAdam(config, problem.param_shapes)
        params = problem.initial_point(make_rng(seed, STREAM_INIT))
        result = train(problem, optimizer, params, 200, make_rng(seed, STREAM_NOISE), lr=1e-2,
                       capture_snapshots=True)
        report = gamma_delta_monitor(result.snapshots.get(0, []), config.epsilon)
        if result.diverged or not report.passed or report.checked == 0:
            failures.append(seed)
    return CheckResult("gamma_delta", not failures, f"{runs} corridas, fallas en semillas {failures or '-'}")


def check_power_iteration(full: bool) -> CheckResult:
    """50 iteraciones en caliente alcanzan el residuo óptimo de la SVD"""
    rng = make_rng(21, STREAM_DATA)
    n, m, r = 64, 96, 8
    U = gram_schmidt(rng.standard_normal((n, n)))
    V = gram_schmidt(rng.standard_normal((m, n)))
    sigma = np.concatenate([np.geomspace(10.0, 5.0, r), np.geomspace(1.0, 0.1, n - r)])
    B = (U * sigma) @ V.T
    P = gram_schmidt(rng.standard_normal((n, r)))
    for _ in range(50):
        P = block_power_iteration_step(B, P)
    gap = abs(residual_ratio(B, P) - residual_ratio(B, truncated_svd(B, r)))
    return CheckResult("power_iteration", gap <= 1e-6, f"|q − q_svd| = {gap:.1e}")


def check_microbatch_associativity(full: bool) -> CheckResult:
    """
    accumulate(g¹); accumulate(g²); accumulate(g³) frente a accumulate(g¹+g²+g³)

    Sin retroalimentación el acumulador parte de cero y la igualdad es bit a
    bit; con retroalimentación se compara un paso desde el mismo estado.
    """
    steps = 500 if full else 100
    problem = MLPProblem([6, 8, 4], n_samples=64, seed=8, batch_size=8)
    noise = make_rng(8, STREAM_NOISE)

    config = OptimizerConfig(rank=2, error_feedback=False)
    split, joint = LDAdam(config, problem.param_shapes), LDAdam(config, problem.param_shapes)
    params_split = problem.initial_point(make_rng(8, STREAM_INIT))
    params_joint = [p.copy() for p in params_split]
    bitwise = True
    for _ in range(steps):
        batches = [problem.stochastic_gradient(params_split, noise) for _ in range(3)]
        for grads in batches:
            split.accumulate(grads)
        joint.accumulate([(a + b) + c for a, b, c in zip(*batches)])
        split.step(params_split, 1e-3)
        joint.step(params_joint, 1e-3)
        bitwise = bitwise and all(np.array_equal(a, b) for a, b in zip(params_split, params_joint))

    config_ef = OptimizerConfig(rank=2)
    optimizer = LDAdam(config_ef, problem.param_shapes)
    params = problem.initial_point(make_rng(9, STREAM_INIT))
    worst = 0.0
    for _ in range(steps):
        batches = [problem.stochastic_gradient(params, noise) for _ in range(3)]
        clone, clone_params = copy.deepcopy(optimizer), [p.copy() for p in params]
        for grads in batches:
            optimizer.accumulate(grads)
        clone.accumulate([(a + b) + c for a, b, c in zip(*batches)])
        optimizer.step(params, 1e-3)
        clone.step(clone_params, 1e-3)
        worst = max(worst, max(_relative(a, b) for a, b in zip(clone_params, params)))

    passed = bitwise and worst <= 1e-12
    return CheckResult("microbatch_associativity", passed, f"bit a bit sin EF = {bitwise}, max rel con EF = {worst:.1e}")


def check_determinism(full: bool) -> CheckResult:
    data = {
        'name': 'determinism',
        'seed': 3,
        'problem': {'kind': 'quadratic', 'd': 16, 'noise_sigma': 0.5, 'seed': 3},
        'optimizer': {'kind': 'ldadam', 'rank': 4},
        'steps': 500 if full else 100,
        'micro_batches': 3,
        'lr': 1e-2,
    }
    config = parse_experiment_config(data)
    with tempfile.TemporaryDirectory() as tmp:
        first, second = Path(tmp) / 'a.csv', Path(tmp) / 'b.csv'
        run_experiment(config, first)
        run_experiment(config, second)
        identical = first.read_bytes() == second.read_bytes()
    return CheckResult("determinism", identical, "CSV idénticos" if identical else "CSV distintos")


def check_memory_parity(full: bool) -> CheckResult:
    """Cifras publicadas reproducibles a ±0.01 GB; las marcadas no reproducibles se reportan, no se comparan"""
    mismatches = []
    excluded = []
    for estimate in PUBLISHED_ESTIMATES:
        if not estimate.reproducible:
            excluded.append(f"{estimate.model}/{estimate.optimizer} ({estimate.note})")
            continue
        model = get_model_spec(estimate.model)
        computed = memory_bytes(optimizer_state_tokens(model, estimate.optimizer, estimate.rank)).gb
        if abs(computed - estimate.gb) > 0.01 + 1e-9:
            mismatches.append(f"{estimate.model}/{estimate.optimizer}: {computed} vs {estimate.gb}")
    detail = "; ".join(mismatches) or "cifras reproducidas"
    if excluded:
        detail += f"; no reproducibles: {', '.join(excluded)}"
    return CheckResult("memory_parity", not mismatches, detail)


def check_pl_convergence(full: bool) -> CheckResult:
    """Cuadrática determinista d=64, r=8, κ=100: brecha ≤ 1e-8 en 5000 pasos con algún lr de la grilla"""
    problem = _quadratic(64, 100.0, 12)
    config = OptimizerConfig(rank=8, mode='analytical')
    gaps = {}
    for lr in (1.0, 0.3, 0.1):
        optimizer = LDAdam(config, problem.param_shapes)
        params = problem.initial_point(make_rng(12, STREAM_INIT))
        result = train(problem, optimizer, params, 5000, make_rng(12, STREAM_NOISE), lr=lr)
        gaps[lr] = math.inf if result.diverged else result.final_loss - problem.f_star
        if gaps[lr] <= 1e-8:
            break
    best = min(gaps, key=gaps.get)
    return CheckResult("pl_convergence", gaps[best] <= 1e-8, f"lr={best}: brecha {gaps[best]:.1e}")


def check_pl_rate_trend(full: bool) -> CheckResult:
    """Con ruido, la brecha final en T=8192 es menor que en T=512 en al menos 4 de 5 semillas"""
    problem = _quadratic(64, 10.0, 13, noise_sigma=1.0)
    probe = rate_probe(problem, OptimizerConfig(rank=8), horizons=(512, 8192), seeds=(1, 2, 3, 4, 5))
    wins = sum(late < early for early, late in zip(probe.gaps[512], probe.gaps[8192]))
    return CheckResult("pl_rate_trend", wins >= 4, f"{wins}/5 semillas, pendiente {probe.slope:.2f}")


def check_directional_ordering(full: bool) -> CheckResult:
    """Orden empírico sobre el MLP maestro; solo advertencia si no se cumple"""
    base = {
        'seed': 1,
        'problem': {'kind': 'mlp', 'widths': [32, 64, 32], 'n_samples': 256, 'batch_size': 32, 'seed': 1},
        'steps': 1000,
        'lr': 1e-3,
    }

    def table(rank: int):
        configs = [
            parse_experiment_config({**base, 'name': 'ldadam', 'optimizer': {'kind': 'ldadam', 'rank': rank}}),
            parse_experiment_config({**base, 'name': 'ldadam_no_ef',
                                     'optimizer': {'kind': 'ldadam', 'rank': rank, 'error_feedback': False}}),
            parse_experiment_config({**base, 'name': 'galore',
                                     'optimizer': {'kind': 'galore', 'rank': rank, 'frequency': 200}}),
            parse_experiment_config({**base, 'name': 'adam', 'optimizer': {'kind': 'adam'}}),
        ]
        rows = compare(configs, seeds=[1, 2, 3, 4, 5]).rows
        return {row.experiment: row.median for row in rows}

    low = table(4)
    full_rank = table(32)
    ordering = low['ldadam'] <= low['ldadam_no_ef'] and low['ldadam'] <= low['galore']
    close = all(full_rank[k] <= 2.0 * full_rank['adam'] for k in ('ldadam', 'ldadam_no_ef', 'galore'))
    detail = (f"r=4: ldadam {low['ldadam']:.3e}, sin EF {low['ldadam_no_ef']:.3e}, galore {low['galore']:.3e}; "
              f"r=32 dentro de 2× de Adam: {close}")
    return CheckResult("directional_ordering", ordering and close, detail, soft=True)


QUICK_CHECKS: list[Callable[[bool], CheckResult]] = [
    check_gradient_oracles,
    check_scalar_layer_adam,
    check_fixed_row_split,
    check_galore_fixed_equivalence,
    check_error_feedback_identity,
    check_lemma_monitors,
    check_gamma_delta,
    check_power_iteration,
    check_microbatch_associativity,
    check_determinism,
    check_memory_parity,
    check_pl_convergence,
]
FULL_ONLY_CHECKS: list[Callable[[bool], CheckResult]] = [
    check_pl_rate_trend,
    check_directional_ordering,
]


def run_checks(full: bool = False) -> list[CheckResult]:
    """Ejecuta la batería; una excepción dentro de un chequeo lo marca como fallido"""
    checks = QUICK_CHECKS + (FULL_ONLY_CHECKS if full else [])
    results = []
    for check in checks:
        started = time.perf_counter()
        try:
            result = check(full)
        except (LDAdamError, ArithmeticError, ValueError) as e:
            logger.error(f"❌ {check.__name__} lanzó {type(e).__name__}: {e}")
            result = CheckResult(check.__name__.removeprefix('check_'), False, f"{type(e).__name__}: {e}")
        result.seconds = time.perf_counter() - started
        logger.info(result.line())
        results.append(result)
    return results
