"""
Holoflow - equilibria, definite directions and limit sets of holomorphic flows z' = F(z)
"""

__version__ = '1.0.0'

from .flow_analyzer import FlowAnalyzer
from .function_model import FunctionModel
from .expression_parser import parse
from .taylor_jet import taylor_jet
from .equilibrium_finder import Region, Circle, find_equilibria, winding_count, order_of
from .equilibrium_classifier import definite_directions, classify_simple, blowup, blowup_linearization
from .flow_integrator import FlowIntegrator, IntegrationConfig, integrate, poincare_return
from .limit_set_classifier import classify_orbit, fed_witness, pb_report, resolve_center
from .analysis_report import AnalysisReport

__all__ = [
    'FlowAnalyzer',
    'FunctionModel',
    'parse',
    'taylor_jet',
    'Region',
    'Circle',
    'find_equilibria',
    'winding_count',
    'order_of',
    'definite_directions',
    'classify_simple',
    'blowup',
    'blowup_linearization',
    'FlowIntegrator',
    'IntegrationConfig',
    'integrate',
    'poincare_return',
    'classify_orbit',
    'fed_witness',
    'pb_report',
    'resolve_center',
    'AnalysisReport',
]
