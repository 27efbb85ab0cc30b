"""Online generalized network design under (dis)economies-of-scale costs."""

from gnd.costs import DoSCost, PowerCost, REPCost
from gnd.instance import Graph, Instance, Request, Resource
from gnd.online import OnlineSolver, SolverConfig, run_dos, run_power, run_rep
from gnd.fractional import run_fractional

__all__ = [
    "DoSCost",
    "PowerCost",
    "REPCost",
    "Graph",
    "Instance",
    "Request",
    "Resource",
    "OnlineSolver",
    "SolverConfig",
    "run_power",
    "run_dos",
    "run_rep",
    "run_fractional",
]

__version__ = "0.1.0"
