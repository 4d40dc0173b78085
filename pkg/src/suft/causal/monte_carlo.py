"""
Monte Carlo estimates of the bound quantities, used to cross-check the exact enumerators.

Each draw samples T ~ q, X ~ P(X | T) and one potential outcome for every treatment given X
(independently). Per-draw contributions are chosen so that their expectations equal the
enumerated quantities:

    factual:        L(y_T, phi(x; T))
    counterfactual: L(y_1, phi(x; 1))          if T = j is a control
                    1/N sum_j L(y_j, phi(x; j)) if T = 1
    psi, delta:     the same split with L(phi_j, phi_1) and L(y_j, y_1)

so every estimate is a plain sample mean with a standard error from the sample variance.
"""

from dataclasses import dataclass

import numpy as np

from suft.common.errors import DomainError, SamplingError
from suft.common.losses import loss_from_name
from suft.causal.bound import BoundReport


class JointSampler:
    """
    Draws samples from a FiniteJoint.

    The treatment probabilities can be overridden, for instance with empirical proportions of
    behavior policies in a replay buffer. Overridden probabilities must keep every arm reachable.

    Attributes:
        joint (FiniteJoint): Source distribution.
        q (np.ndarray): Treatment probabilities used for sampling.

    Raises:
        SamplingError: If a treatment arm has zero probability.
    """

    def __init__(self, joint, q=None):
        self.joint = joint
        q = joint.q if q is None else np.asarray(q, dtype=float)
        if q.shape != (joint.n_treatments,):
            raise DomainError(f'JointSampler: q must have {joint.n_treatments} entries, got {q.shape}')
        if np.any(q <= 0):
            arm = int(np.flatnonzero(q <= 0)[0]) + 1
            raise SamplingError(f'JointSampler: treatment arm {arm} has zero probability')
        self.q = q / q.sum()

    def sample(self, n, rng):
        """
        Draws ``n`` samples.

        Returns:
            tuple: (t_index, x_index, outcomes) where t_index and x_index have shape (n,)
            (0-based) and outcomes has shape (n, N+1) holding one potential outcome per treatment.
        """
        joint = self.joint
        n_t, n_x = joint.n_treatments, len(joint.xs)
        t_index = rng.choice(n_t, size=n, p=self.q)
        x_index = np.empty(n, dtype=np.int64)
        for ti in range(n_t):
            mask = t_index == ti
            x_index[mask] = rng.choice(n_x, size=int(mask.sum()), p=joint.px[ti])
        outcomes = np.empty((n, n_t))
        for xi in range(n_x):
            mask = x_index == xi
            count = int(mask.sum())
            if count == 0:
                continue
            for ti in range(n_t):
                values, probs = joint.outcome_distribution_at(ti, xi)
                outcomes[mask, ti] = values[rng.choice(values.size, size=count, p=probs)]
        return t_index, x_index, outcomes


@dataclass(frozen=True)
class MonteCarloReport:
    """
    Sample-mean estimates of the bound quantities and their standard errors.

    Attributes:
        estimate (BoundReport): Estimated factual, counterfactual, psi and delta.
        stderr (dict): Standard error per quantity name; infinite when n_samples is 1.
        n_samples (int): Number of draws.
    """
    estimate: BoundReport
    stderr: dict
    n_samples: int

    def agrees_with(self, exact, n_sigma=3.0, atol=1e-9):
        """True when every estimate lies within n_sigma standard errors (plus atol) of ``exact``."""
        for name in ('factual', 'counterfactual', 'psi', 'delta'):
            gap = abs(getattr(self.estimate, name) - getattr(exact, name))
            if gap > n_sigma * self.stderr[name] + atol:
                return False
        return True


def mc_estimate_losses(sampler, phi, loss, n_samples, rng_seed):
    """
    Monte Carlo estimate of the bound quantities.

    Args:
        sampler (JointSampler or FiniteJoint): Sampling source; a FiniteJoint is wrapped with its own q.
        phi (HypothesisTable): Hypothesis values.
        loss (LossFn or str): Pointwise loss.
        n_samples (int): Number of draws, at least 1.
        rng_seed (int): Seed; identical seeds give identical estimates.

    Returns:
        MonteCarloReport
    """
    if n_samples < 1:
        raise DomainError(f'mc_estimate_losses: n_samples must be >= 1 ({n_samples})')
    if not isinstance(sampler, JointSampler):
        sampler = JointSampler(sampler)
    loss = loss_from_name(loss)
    joint = sampler.joint
    table = phi.as_array(joint)
    rng = np.random.default_rng(rng_seed)
    t_index, x_index, outcomes = sampler.sample(n_samples, rng)

    rows = np.arange(n_samples)
    phi_all = table[:, x_index].T  # (n_samples, N+1)
    phi_t = phi_all[rows, t_index]
    y_t = outcomes[rows, t_index]
    factual = loss(y_t, phi_t)

    target = t_index == 0
    own_1 = loss(outcomes[:, 0], phi_all[:, 0])
    controls_own = loss(outcomes[:, 1:], phi_all[:, 1:]).mean(axis=1)
    counterfactual = np.where(target, controls_own, own_1)

    psi_target = loss(phi_all[:, [0]], phi_all[:, 1:]).mean(axis=1)
    psi_control = loss(phi_t, phi_all[:, 0])
    psi = np.where(target, psi_target, psi_control)

    delta_target = loss(outcomes[:, [0]], outcomes[:, 1:]).mean(axis=1)
    delta_control = loss(y_t, outcomes[:, 0])
    delta = np.where(target, delta_target, delta_control)

    samples = dict(factual=factual, counterfactual=counterfactual, psi=psi, delta=delta)
    stderr = {}
    for name, values in samples.items():
        if n_samples > 1:
            stderr[name] = float(values.std(ddof=1) / np.sqrt(n_samples))
        else:
            stderr[name] = float('inf')
    estimate = BoundReport(**{name: float(values.mean()) for name, values in samples.items()})
    return MonteCarloReport(estimate=estimate, stderr=stderr, n_samples=n_samples)
