"""
Problemas de prueba a escala de escritorio
"""
from ldadam.problems.base import Params, Problem, flatten, unflatten
from ldadam.problems.checks import finite_diff_check, rayleigh_bounds_check, unbiasedness_check
from ldadam.problems.logistic import LogisticProblem, logistic_problem
from ldadam.problems.mlp import MLPProblem, mlp_problem
from ldadam.problems.quadratic import QuadraticProblem, quadratic_problem, random_spd
from ldadam.problems.rosenbrock import RosenbrockProblem, rosenbrock_problem
from ldadam.rng import make_rng

__all__ = [
    'LogisticProblem', 'MLPProblem', 'Params', 'Problem', 'QuadraticProblem', 'RosenbrockProblem',
    'finite_diff_check', 'flatten', 'logistic_problem', 'make_rng', 'mlp_problem',
    'quadratic_problem', 'random_spd', 'rayleigh_bounds_check', 'rosenbrock_problem',
    'unbiasedness_check', 'unflatten',
]
