import itertools

import numpy as np
import pytest

from suft.causal.joint import FiniteJoint, HypothesisTable


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def binary_joint():
    """Two observations, stochastic outcomes, unequal treatment probabilities."""
    return FiniteJoint(
        xs=['a', 'b'],
        q=[0.3, 0.7],
        px_given_t=[[0.6, 0.4], [0.25, 0.75]],
        py_given_x_t={
            ('a', 1): {0.0: 0.5, 2.0: 0.5},
            ('b', 1): {1.0: 0.2, 4.0: 0.8},
            ('a', 2): {-1.0: 0.9, 3.0: 0.1},
            ('b', 2): {2.0: 1.0},
        },
    )


@pytest.fixture
def binary_phi():
    return HypothesisTable({('a', 1): 1.0, ('b', 1): 3.5, ('a', 2): -0.5, ('b', 2): 1.0})


def enumerate_losses(joint, phi, loss):
    """
    Brute-force oracle: walks every (t, x, y_1, ..., y_{N+1}) atom of the joint with
    independent potential outcomes and accumulates the four bound quantities.
    """
    n = joint.n_controls
    factual = counterfactual = psi = delta = 0.0
    for ti in range(n + 1):
        for xi, x in enumerate(joint.xs):
            weight = joint.q[ti] * joint.px[ti, xi]
            dists = [joint.outcome_distribution_at(k, xi) for k in range(n + 1)]
            f = [phi.value(x, k + 1) for k in range(n + 1)]
            for combo in itertools.product(*[range(len(values)) for values, _ in dists]):
                p = weight
                ys = []
                for k, c in enumerate(combo):
                    p *= dists[k][1][c]
                    ys.append(dists[k][0][c])
                factual += p * loss(ys[ti], f[ti])
                if ti == 0:
                    counterfactual += p * sum(loss(ys[j], f[j]) for j in range(1, n + 1)) / n
                    psi += p * sum(loss(f[0], f[j]) for j in range(1, n + 1)) / n
                    delta += p * sum(loss(ys[0], ys[j]) for j in range(1, n + 1)) / n
                else:
                    counterfactual += p * loss(ys[0], f[0])
                    psi += p * loss(f[ti], f[0])
                    delta += p * loss(ys[ti], ys[0])
    return dict(factual=float(factual), counterfactual=float(counterfactual), psi=float(psi), delta=float(delta))


@pytest.fixture
def oracle():
    return enumerate_losses


def gridworld_run_document(lambda_tf=0.0, steps=300, seeds=(0, 1), **agent_overrides):
    agent = {
        'variant': 'DQN',
        'gamma': 0.9,
        'lambda_tf': lambda_tf,
        'loss': 'l2',
        'lr': 0.001,
        'batch_size': 8,
        'buffer_capacity': 100,
        'target_sync_interval': 20,
        'epsilon': {'start': 1.0, 'end': 0.1, 'decay_steps': 100},
        'hidden_sizes': [16],
    }
    agent.update(agent_overrides)
    return {'env': 'gridworld', 'agent': agent, 'steps': steps, 'seeds': list(seeds),
            'output_dir': 'runs/test', 'smoothing_window': 5}


@pytest.fixture
def run_document():
    return gridworld_run_document
