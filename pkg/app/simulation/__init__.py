from app.simulation.synth import generate_dataset
from app.simulation.runner import run_method, simulate, SimulationResult

__all__ = ["generate_dataset", "run_method", "simulate", "SimulationResult"]
