from sdforest.simgen.f0_functions import FourierF0, RandomTreeF0, make_fourier_f0, make_random_tree_f0
from sdforest.simgen.generators import (draw_nonlinear_process, draw_process, gen_linear, gen_nonlinear, perturb_dense,
                                        transform_diagnostic)
from sdforest.simgen.sim_model import ConfoundingProcess, PerturbationDraws, SimSpec, SyntheticDataset, TransformDiagnostic

__all__ = [
    "ConfoundingProcess", "FourierF0", "PerturbationDraws", "RandomTreeF0", "SimSpec", "SyntheticDataset", "TransformDiagnostic",
    "draw_nonlinear_process", "draw_process", "gen_linear", "gen_nonlinear", "make_fourier_f0", "make_random_tree_f0",
    "perturb_dense", "transform_diagnostic",
]
