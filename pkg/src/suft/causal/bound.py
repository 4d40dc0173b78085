"""
Exact enumeration of the factual, counterfactual, treatment-effect and delta losses.

Description:
    Every quantity is an exact weighted sum over the finite supports of a FiniteJoint, so
    the inequality

        factual <= counterfactual + psi + delta

    can be checked with nothing but double-precision rounding in the way. Treatment 1 is
    the target; each control treatment j in 2..N+1 contributes with weight q_j on its own
    observation distribution and with weight q_1 / N on the target's. For N = 1 these are
    exactly the binary-treatment weights.

    delta_term is the only place in the package where outcome-versus-outcome losses are
    computed. It does not depend on the hypothesis.
"""

import logging
from dataclasses import dataclass

import numpy as np

from suft.common.losses import loss_from_name
from suft.causal.joint import random_joint, random_hypothesis

logger = logging.getLogger(__name__)

INEQUALITY_TOLERANCE = 1e-12
RELATIVE_BOUND_TOLERANCE = 1e-9


@dataclass(frozen=True)
class BoundReport:
    """
    The four bound quantities for one (joint, hypothesis, loss) triple.

    Attributes:
        factual (float): Combined factual loss.
        counterfactual (float): Combined counterfactual loss.
        psi (float): Combined treatment-effect loss.
        delta (float): Hypothesis-free outcome-gap term.
        pointwise_violations (int): Number of proof quadruples failing the loss inequality.
    """
    factual: float
    counterfactual: float
    psi: float
    delta: float
    pointwise_violations: int = 0

    @property
    def slack(self):
        return self.counterfactual + self.psi + self.delta - self.factual

    @property
    def tolerance(self):
        return RELATIVE_BOUND_TOLERANCE * max(1.0, self.factual)

    @property
    def holds(self):
        return self.slack >= -self.tolerance

    def as_dict(self):
        return dict(factual=self.factual, counterfactual=self.counterfactual, psi=self.psi,
                    delta=self.delta, slack=self.slack, holds=self.holds,
                    pointwise_violations=self.pointwise_violations)


def _cross_expectation(values_a, probs_a, values_b, probs_b, loss):
    # E_{a}E_{b}[L(a, b)] for independent finite a, b
    return float(probs_a @ loss(values_a[:, None], values_b[None, :]) @ probs_b)


def _outcome_loss_table(joint, phi_table, loss):
    """ell[t-1, i] = E_{y ~ P(Y_t | xs[i])}[L(y, phi(xs[i]; t))]."""
    table = np.empty_like(phi_table)
    for ti in range(joint.n_treatments):
        for xi in range(len(joint.xs)):
            values, probs = joint.outcome_distribution_at(ti, xi)
            table[ti, xi] = float(probs @ loss(values, phi_table[ti, xi]))
    return table


def expected_outcome_loss(joint, phi, x, t, loss):
    """
    Expected loss of phi(x; t) against the potential outcome Y_t given X = x.

    Args:
        joint (FiniteJoint): The distribution.
        phi (HypothesisTable): Hypothesis values.
        x: Observation identifier.
        t (int): Treatment in 1..N+1.
        loss (LossFn or str): Pointwise loss.

    Returns:
        float: sum_y P(y | x, t) * L(y, phi(x; t)).

    Raises:
        DomainError: If x or t is unknown.
    """
    loss = loss_from_name(loss)
    values, probs = joint.outcome_distribution(x, t)
    return float(probs @ loss(values, phi.value(x, t)))


def factual_loss(joint, phi, loss):
    """q_1 * eps^1_F + sum_j q_j * eps^j_F, each arm evaluated on its own observations."""
    loss = loss_from_name(loss)
    ell = _outcome_loss_table(joint, phi.as_array(joint), loss)
    return float(sum(joint.q[ti] * (joint.px[ti] @ ell[ti]) for ti in range(joint.n_treatments)))


def counterfactual_loss(joint, phi, loss):
    """
    sum_j (q_j * eps^{1,j}_CF + q_1 / N * eps^j_CF).

    eps^{1,j}_CF evaluates phi(.; 1) on observations drawn under control j, and eps^j_CF
    evaluates phi(.; j) on observations drawn under the target treatment.
    """
    loss = loss_from_name(loss)
    ell = _outcome_loss_table(joint, phi.as_array(joint), loss)
    q, px, n = joint.q, joint.px, joint.n_controls
    total = 0.0
    for ji in range(1, joint.n_treatments):
        total += q[ji] * (px[ji] @ ell[0]) + q[0] / n * (px[0] @ ell[ji])
    return float(total)


def treatment_effect_loss(joint, phi, loss):
    """sum_j (q_j * E_{P^j_X}[L(phi_j, phi_1)] + q_1 / N * E_{P^1_X}[L(phi_1, phi_j)])."""
    loss = loss_from_name(loss)
    table = phi.as_array(joint)
    q, px, n = joint.q, joint.px, joint.n_controls
    total = 0.0
    for ji in range(1, joint.n_treatments):
        total += q[ji] * (px[ji] @ loss(table[ji], table[0]))
        total += q[0] / n * (px[0] @ loss(table[0], table[ji]))
    return float(total)


def delta_term(joint, loss):
    """
    sum_j (q_j * E_{P^j_X}E_{y_j}E_{y_1}[L(y_j, y_1)] + q_1 / N * E_{P^1_X}E_{y_1}E_{y_j}[L(y_1, y_j)]).

    Potential outcomes of different treatments are independent given x.
    """
    loss = loss_from_name(loss)
    q, px, n = joint.q, joint.px, joint.n_controls
    total = 0.0
    for ji in range(1, joint.n_treatments):
        for xi in range(len(joint.xs)):
            v1, p1 = joint.outcome_distribution_at(0, xi)
            vj, pj = joint.outcome_distribution_at(ji, xi)
            total += q[ji] * px[ji, xi] * _cross_expectation(vj, pj, v1, p1, loss)
            total += q[0] / n * px[0, xi] * _cross_expectation(v1, p1, vj, pj, loss)
    return float(total)


def proof_quadruples(joint, phi):
    """
    All (y_a, phi_a, y_b, phi_b) quadruples the bound's proof applies the loss inequality to.

    For every control j, observation x and outcome pair in the supports of Y_1 and Y_j given x,
    both orientations (target vs control and control vs target) are listed.

    Returns:
        np.ndarray: Shape (m, 4).
    """
    table = phi.as_array(joint)
    blocks = []
    for ji in range(1, joint.n_treatments):
        for xi in range(len(joint.xs)):
            v1, _ = joint.outcome_distribution_at(0, xi)
            vj, _ = joint.outcome_distribution_at(ji, xi)
            g1, gj = np.meshgrid(v1, vj, indexing='ij')
            g1, gj = g1.ravel(), gj.ravel()
            f1 = np.full(g1.size, table[0, xi])
            fj = np.full(g1.size, table[ji, xi])
            blocks.append(np.column_stack([g1, f1, gj, fj]))
            blocks.append(np.column_stack([gj, fj, g1, f1]))
    return np.vstack(blocks)


def check_loss_inequality(loss, quadruples):
    """
    Finds quadruples violating L(x, y) - L(x', y') <= L(x, x') + L(y, y').

    Args:
        loss (LossFn or str): Pointwise loss.
        quadruples (array-like): Rows (x, y, x', y').

    Returns:
        list of tuple: Every violating quadruple (with 1e-12 slack), in input order.
    """
    loss = loss_from_name(loss)
    quads = np.asarray(quadruples, dtype=float).reshape(-1, 4)
    if quads.size == 0:
        return []
    x, y, x2, y2 = quads.T
    lhs = loss(x, y) - loss(x2, y2)
    rhs = loss(x, x2) + loss(y, y2)
    bad = lhs > rhs + INEQUALITY_TOLERANCE
    return [tuple(float(v) for v in row) for row in quads[bad]]


def verify_bound(joint, phi, loss):
    """
    Computes all bound quantities and audits the pointwise loss inequality.

    A BoundReport is always returned; a violated bound is reported through
    ``holds`` and ``slack``, never raised. Under L1 ``holds`` is always true.

    Args:
        joint (FiniteJoint): The distribution.
        phi (HypothesisTable): Hypothesis values, total on the joint.
        loss (LossFn or str): L1 for the guaranteed bound, L2 to test whether it still holds.

    Returns:
        BoundReport
    """
    loss = loss_from_name(loss)
    return BoundReport(
        factual=factual_loss(joint, phi, loss),
        counterfactual=counterfactual_loss(joint, phi, loss),
        psi=treatment_effect_loss(joint, phi, loss),
        delta=delta_term(joint, loss),
        pointwise_violations=len(check_loss_inequality(loss, proof_quadruples(joint, phi))),
    )


def run_bound_trials(n_trials, loss, seed=0, max_controls=1, n_controls=None, keep_violations=20):
    """
    Verifies the bound on ``n_trials`` random joints with random hypotheses.

    Args:
        n_trials (int): Number of (joint, hypothesis) draws.
        loss (LossFn or str): Pointwise loss.
        seed (int, optional): Seed of the trial stream. Defaults to 0.
        max_controls (int, optional): Random N is uniform on [1, max_controls]. Defaults to 1.
        n_controls (int, optional): Fixed N, overriding max_controls.
        keep_violations (int, optional): How many violating trials to list. Defaults to 20.

    Returns:
        dict: Summary with trial counts, minimum slack, bound violations and the number of
        trials where the pointwise loss inequality failed.
    """
    loss = loss_from_name(loss)
    rng = np.random.default_rng(seed)
    min_slack = np.inf
    violations = []
    n_violations = 0
    pointwise_trials = 0
    for trial in range(n_trials):
        joint = random_joint(rng, n_controls=n_controls, max_controls=max_controls)
        phi = random_hypothesis(joint, rng)
        report = verify_bound(joint, phi, loss)
        min_slack = min(min_slack, report.slack)
        if report.pointwise_violations:
            pointwise_trials += 1
        if not report.holds:
            n_violations += 1
            if len(violations) < keep_violations:
                violations.append(dict(trial=trial, n_controls=joint.n_controls, **report.as_dict()))
    if n_violations:
        logger.warning(f'bound: {n_violations} of {n_trials} trials violated the bound under {loss.name}')
    return dict(trials=n_trials, loss=loss.name, seed=seed, max_controls=max_controls,
                min_slack=float(min_slack), n_violations=n_violations, violations=violations,
                pointwise_violation_trials=pointwise_trials)
