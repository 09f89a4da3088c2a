"""Analytic optimal-control synthesis for screening-at-entry control of an
SIS epidemic in a fixed-size population, with independent verification
oracles."""

from .model import Branch, DerivedModel, Ordering, RawParameters, Regime, SubCase, derive
from .flow import ControlSchedule, Trajectory, flow_const, simulate, time_to_reach
from .curves import (RegionLabel, SynthesisDiagram, classify_point, t_Gamma,
                     t_never_screen, t_S, t_sigma)
from .synthesis import OptimalPlan, feedback, hit_first_switch, hit_last_switch, plan
from .value import J_w, J_w_partials, W, W_gradient, hjb_residual, value_report
from .pontryagin import Extremal, backward_extremal, extremal_field, hamiltonian
from .oracle import DPTable, OracleReport, brute_force, compare, dp_grid

__version__ = "0.1.0"
