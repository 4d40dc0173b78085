# __init__.py for the causal package

from .joint import FiniteJoint, HypothesisTable, random_joint, random_hypothesis
from .bound import (BoundReport, expected_outcome_loss, factual_loss, counterfactual_loss,
                    treatment_effect_loss, delta_term, verify_bound, check_loss_inequality,
                    proof_quadruples, run_bound_trials)
from .monte_carlo import JointSampler, MonteCarloReport, mc_estimate_losses
