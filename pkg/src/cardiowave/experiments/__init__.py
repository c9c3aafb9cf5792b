from .studies import (anisotropy_study, conduction_velocity, convergence_study,
                      cost_comparison, cv_vs_tau_study, orientation_benchmark,
                      spiral_test, verify_speed, virtual_electrode_run)

__all__ = [
    "anisotropy_study", "conduction_velocity", "convergence_study",
    "cost_comparison", "cv_vs_tau_study", "orientation_benchmark",
    "spiral_test", "verify_speed", "virtual_electrode_run",
]
