"""
Pipeline modules for orchestrating experiment runs
"""
from .orchestrator import COMMANDS, ExperimentPipeline

__all__ = ["COMMANDS", "ExperimentPipeline"]
