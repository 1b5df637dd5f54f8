"""Simplified physical-design flow: synthetic netlists, annealing placement,
route estimation, buffering/sizing optimization, static timing, and
power/area reporting."""

from .netlist import (FanoutDist, Gate, Netlist, Pin, Reg, generate_netlist,
                      load_netlist, save_netlist)
from .placement import Floorplan, Placement, make_floorplan, place, clear_placement_cache
from .sta import TimingReport, annotate_timing, sta
from .flow import (DesignResult, FlowConfig, OptimizedDesign, RoutedDesign,
                   RoutedNet, f_ach, optimize, power_area, rc_contribution,
                   route_estimate, run_flow, RESULT_COLUMNS)

__all__ = [
    "FanoutDist", "Gate", "Netlist", "Pin", "Reg", "generate_netlist",
    "load_netlist", "save_netlist", "Floorplan", "Placement", "make_floorplan",
    "place", "clear_placement_cache", "TimingReport", "annotate_timing", "sta",
    "DesignResult", "FlowConfig", "OptimizedDesign", "RoutedDesign",
    "RoutedNet", "f_ach", "optimize", "power_area", "rc_contribution",
    "route_estimate", "run_flow", "RESULT_COLUMNS",
]
