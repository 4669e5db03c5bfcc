"""Impulsive Goodwin's oscillator: simulation, 1-cycles and their local stability."""
from .model import Modulation, validate
from .numerics import ATRACURIUM, ChainPlant, ScalarFunction, divided_difference, eig3, expm_oracle, opitz_apply
from .poincare import CycleSpec, FixedPoint, detect_cycle, fixed_point_analytic, fixed_point_numeric, iterate, map_Q
from .stability import StabilityReport, stability_report

__version__ = "0.1.0"
