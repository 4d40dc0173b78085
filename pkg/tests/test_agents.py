import os
import subprocess
import sys

import numpy as np
import pytest

import suft
from suft.agents import (AgentConfig, AgentVariant, EpsilonSchedule, DqnAgent, DoubleDqnAgent, VanillaDqnAgent,
                         ActorCriticAgent, supported_agents, make_agent, load_agent)
from suft.common.errors import BufferNotReadyError, ConfigError, DomainError
from suft.envs import EnvSpec, GridWorld
from suft.network import RegressionObjective, grad_check
from suft.replay import ReplayBuffer, Transition
from suft.replay.replay_buffer import TransitionBatch

SPEC = EnvSpec('test', 2, 2, 10)
SRC_DIR = os.path.dirname(os.path.dirname(os.path.abspath(suft.__file__)))


def make_config(variant='DQN', **overrides):
    fields = dict(variant=variant, gamma=0.5, lambda_tf=1.0, loss_kind='l2', batch_size=1, buffer_capacity=10,
                  target_sync_interval=5, hidden_sizes=(), epsilon=EpsilonSchedule(0.0, 0.0, 1))
    fields.update(overrides)
    return AgentConfig(**fields)


def set_linear(net, bias, weight=None):
    """Linear net (no hidden layer): weights are W (n_in x n_out, row-major) then the bias."""
    n_in, n_out = net.layer_sizes
    weight = np.zeros((n_in, n_out)) if weight is None else np.asarray(weight, dtype=float)
    net.weights[...] = np.concatenate([weight.ravel(), np.asarray(bias, dtype=float)])


def single_batch(reward=1.0, terminated=False, action=0, v_behavior=0.0):
    return TransitionBatch(obs=np.array([[1.0, 0.0]]), actions=np.array([action]), rewards=np.array([reward]),
                           next_obs=np.array([[0.0, 1.0]]), terminated=np.array([terminated]),
                           v_behavior=np.array([v_behavior]), policy_ids=np.array([0]))


def random_gridworld_buffer(n, seed=0, capacity=None):
    rng = np.random.default_rng(seed)
    env = GridWorld()
    buffer = ReplayBuffer(capacity or n, env.spec.obs_dim)
    obs = env.reset(seed)
    for _ in range(n):
        action = int(rng.integers(4))
        result = env.step(action)
        buffer.push(Transition(obs, action, result.reward, result.obs, result.terminated, float(rng.normal())))
        obs = env.reset(int(rng.integers(1000))) if result.done else result.obs
    return buffer


def _regression_objective(self, batch, targets, columns=None):
    return RegressionObjective(targets, self.loss, columns=columns)


class TestAgentConfig:
    def test_defaults(self):
        assert AgentConfig.from_dict({'variant': 'DQN'}).lambda_tf == 1.0
        config = AgentConfig.from_dict({'variant': 'ActorCritic'})
        assert config.lambda_tf == 0.6
        assert config.hidden_sizes == (64, 64)
        assert config.epsilon.decay_steps is None
        assert config.epsilon.resolved(20000).decay_steps == 4000

    @pytest.mark.parametrize('document, field_path', [
        ({'variant': 'DQN', 'gamma': 0.0}, 'agent.gamma'),
        ({'variant': 'DQN', 'gamma': 1.5}, 'agent.gamma'),
        ({'variant': 'DQN', 'lambda_tf': -0.1}, 'agent.lambda_tf'),
        ({'variant': 'DQN', 'lr': 0}, 'agent.lr'),
        ({'variant': 'DQN', 'batch_size': True}, 'agent.batch_size'),
        ({'variant': 'DQN', 'loss': 'huber'}, 'agent.loss'),
        ({'variant': 'SARSA'}, 'agent.variant'),
        ({'variant': 'DQN', 'momentum': 0.9}, 'agent.momentum'),
        ({'variant': 'DQN', 'epsilon': {'start': 2.0}}, 'agent.epsilon.start'),
        ({'variant': 'DQN', 'epsilon': {'decay': 10}}, 'agent.epsilon.decay'),
        ({'gamma': 0.9}, 'agent.variant'),
    ])
    def test_invalid_fields(self, document, field_path):
        with pytest.raises(ConfigError) as excinfo:
            AgentConfig.from_dict(document)
        assert excinfo.value.field_path == field_path

    def test_round_trip(self):
        config = make_config('DoubleDQN', loss_kind='l1', hidden_sizes=(8, 4))
        assert AgentConfig.from_dict(config.to_dict()) == config
        assert config.with_lambda(0.0).lambda_tf == 0.0

    def test_epsilon_schedule(self):
        schedule = EpsilonSchedule(1.0, 0.1, 10)
        assert schedule.value(0) == 1.0
        assert schedule.value(5) == pytest.approx(0.55)
        assert schedule.value(50) == pytest.approx(0.1)


class TestAct:
    def test_greedy(self):
        agent = DqnAgent(make_config(), SPEC, np.random.default_rng(0))
        set_linear(agent.online, [0.1, 0.9])
        assert agent.act(np.array([1.0, 0.0]), np.random.default_rng(0), epsilon=0.0) == (1, 0.9)

    def test_exploration_keeps_the_taken_value(self):
        agent = DqnAgent(make_config(), SPEC, np.random.default_rng(0))
        set_linear(agent.online, [0.1, 0.9])
        rng = np.random.default_rng(1)
        actions = []
        for _ in range(4000):
            action, value = agent.act(np.array([1.0, 0.0]), rng, epsilon=1.0)
            assert value == [0.1, 0.9][action]
            actions.append(action)
        assert abs(np.mean(actions) - 0.5) < 0.05

    def test_deterministic(self):
        agent = DqnAgent(make_config(hidden_sizes=(8,)), SPEC, np.random.default_rng(0))
        obs = np.array([0.3, -0.2])
        first = [agent.act(obs, np.random.default_rng(5), epsilon=0.5) for _ in range(3)]
        assert first[0] == first[1] == first[2]

    def test_actor_critic_policy(self):
        agent = ActorCriticAgent(make_config('ActorCritic'), SPEC, np.random.default_rng(0))
        set_linear(agent.actor, [0.0, np.log(3.0)])
        set_linear(agent.critic, [2.5])
        rng = np.random.default_rng(2)
        draws = [agent.act(np.array([1.0, 0.0]), rng) for _ in range(8000)]
        assert all(value == 2.5 for _, value in draws)
        assert abs(np.mean([a for a, _ in draws]) - 0.75) < 0.02


class TestTdTargets:
    @pytest.mark.parametrize('variant', [v.value for v in AgentVariant])
    def test_terminal_transition(self, variant):
        agent = make_agent(make_config(variant, hidden_sizes=(4,)), SPEC, np.random.default_rng(0))
        assert agent.td_targets(single_batch(reward=1.0, terminated=True))[0] == 1.0

    @pytest.mark.parametrize('variant', [v.value for v in AgentVariant])
    def test_negligible_discount(self, variant):
        agent = make_agent(make_config(variant, gamma=1e-300, hidden_sizes=(4,)), SPEC, np.random.default_rng(0))
        assert agent.td_targets(single_batch(reward=0.7))[0] == pytest.approx(0.7)

    def test_variant_formulas(self):
        targets = {}
        for cls in (VanillaDqnAgent, DqnAgent, DoubleDqnAgent):
            agent = cls(make_config(), SPEC, np.random.default_rng(0))
            set_linear(agent.online, [9.0, 1.0])
            if 'target' in agent.networks():
                set_linear(agent.target, [2.0, 5.0])
            targets[cls.__name__] = agent.td_targets(single_batch(reward=1.0))[0]
        assert targets == {'VanillaDqnAgent': 5.5, 'DqnAgent': 3.5, 'DoubleDqnAgent': 2.0}

    def test_double_matches_dqn_when_networks_agree(self, rng):
        config = make_config(hidden_sizes=(6,))
        dqn, double = DqnAgent(config, SPEC, np.random.default_rng(1)), DoubleDqnAgent(config, SPEC, np.random.default_rng(1))
        batch = TransitionBatch(obs=rng.normal(size=(10, 2)), actions=rng.integers(0, 2, size=10),
                                rewards=rng.normal(size=10), next_obs=rng.normal(size=(10, 2)),
                                terminated=np.zeros(10, dtype=bool), v_behavior=np.zeros(10),
                                policy_ids=np.zeros(10, dtype=np.int64))
        np.testing.assert_allclose(dqn.td_targets(batch), double.td_targets(batch))

    def test_actor_critic_bootstraps_from_the_critic(self):
        agent = ActorCriticAgent(make_config('ActorCritic'), SPEC, np.random.default_rng(0))
        set_linear(agent.critic, [0.0], weight=[[1.0], [4.0]])
        assert agent.td_targets(single_batch(reward=1.0))[0] == pytest.approx(3.0)


class TestSuftTerm:
    def test_fresh_values_give_zero(self):
        agent = DqnAgent(make_config(hidden_sizes=(8,)), SPEC, np.random.default_rng(0))
        obs = np.array([0.4, -1.0])
        action, value = agent.act(obs, np.random.default_rng(0), epsilon=1.0)
        batch = TransitionBatch(obs=obs[None], actions=np.array([action]), rewards=np.zeros(1), next_obs=obs[None],
                                terminated=np.zeros(1, dtype=bool), v_behavior=np.array([value]),
                                policy_ids=np.zeros(1, dtype=np.int64))
        assert agent.suft_term(batch) == 0.0

    @pytest.mark.parametrize('loss, expected', [('l1', 3.0), ('l2', 9.0)])
    def test_single_transition(self, loss, expected):
        agent = DqnAgent(make_config(loss_kind=loss), SPEC, np.random.default_rng(0))
        set_linear(agent.online, [5.0, 0.0])
        assert agent.suft_term(single_batch(action=0, v_behavior=2.0)) == pytest.approx(expected)

    def test_value_form(self):
        agent = ActorCriticAgent(make_config('ActorCritic', loss_kind='l1'), SPEC, np.random.default_rng(0))
        set_linear(agent.critic, [5.0])
        assert agent.suft_term(single_batch(v_behavior=2.0)) == pytest.approx(3.0)


class TestUpdate:
    def test_not_ready(self):
        agent = DqnAgent(make_config(batch_size=4), SPEC, np.random.default_rng(0))
        with pytest.raises(BufferNotReadyError):
            agent.update(ReplayBuffer(10, 2), np.random.default_rng(0))

    @pytest.mark.parametrize('variant', [v.value for v in AgentVariant])
    def test_total_loss_decomposition(self, variant):
        buffer = random_gridworld_buffer(200)
        config = make_config(variant, lambda_tf=0.7, hidden_sizes=(16,), batch_size=16)
        agent = make_agent(config, GridWorld().spec, np.random.default_rng(0))
        rng = np.random.default_rng(1)
        for _ in range(20):
            m = agent.update(buffer, rng)
            assert abs(m.total_loss - (m.td_loss + 0.7 * m.suft_term)) <= 1e-12
            assert m.suft_term >= 0 and m.grad_norm >= 0

    def test_zero_lambda_logs_no_suft_term(self):
        buffer = random_gridworld_buffer(100)
        agent = DqnAgent(make_config(lambda_tf=0.0, hidden_sizes=(8,), batch_size=8), GridWorld().spec,
                         np.random.default_rng(0))
        m = agent.update(buffer, np.random.default_rng(0))
        assert m.suft_term == 0.0 and m.total_loss == m.td_loss

    def test_target_sync_and_policy_phases(self):
        buffer = random_gridworld_buffer(100)
        agent = DqnAgent(make_config(hidden_sizes=(8,), batch_size=8, target_sync_interval=5), GridWorld().spec,
                         np.random.default_rng(0))
        rng = np.random.default_rng(0)
        ids = [agent.update(buffer, rng).policy_id for _ in range(12)]
        assert ids == [0, 0, 0, 0, 1, 1, 1, 1, 1, 2, 2, 2]
        assert not np.array_equal(agent.online.weights, agent.target.weights)
        for _ in range(3):
            agent.update(buffer, rng)
        np.testing.assert_array_equal(agent.online.weights, agent.target.weights)

    def test_vanilla_has_no_target(self):
        buffer = random_gridworld_buffer(100)
        agent = VanillaDqnAgent(make_config('VanillaDQN', hidden_sizes=(8,), batch_size=8, target_sync_interval=5),
                                GridWorld().spec, np.random.default_rng(0))
        assert set(agent.networks()) == {'online'}
        assert not hasattr(agent, 'target')
        rng = np.random.default_rng(0)
        ids = [agent.update(buffer, rng).policy_id for _ in range(10)]
        assert ids == [0, 0, 0, 0, 1, 1, 1, 1, 1, 2]

    @pytest.mark.parametrize('variant', ['DQN', 'ActorCritic'])
    def test_gradient_matches_finite_differences(self, variant):
        buffer = random_gridworld_buffer(100)
        agent = make_agent(make_config(variant, hidden_sizes=(12,), batch_size=16, activation='tanh'),
                           GridWorld().spec, np.random.default_rng(0))
        batch = buffer.sample_batch(16, np.random.default_rng(3))
        net = agent.online if variant == 'DQN' else agent.critic
        columns = batch.actions if variant == 'DQN' else None
        objective = agent.critic_objective(batch, agent.td_targets(batch), columns)
        report = grad_check(net, batch.obs, objective)
        assert report.passed and report.max_rel_err < 1e-5

    def test_suft_term_does_not_reach_the_actor(self):
        buffer = random_gridworld_buffer(100)
        config = make_config('ActorCritic', hidden_sizes=(8,), batch_size=8)
        agents = [ActorCriticAgent(config.with_lambda(lam), GridWorld().spec, np.random.default_rng(0))
                  for lam in (0.0, 5.0)]
        for agent in agents:
            agent.update(buffer, np.random.default_rng(1))
        np.testing.assert_array_equal(agents[0].actor.weights, agents[1].actor.weights)
        assert not np.array_equal(agents[0].critic.weights, agents[1].critic.weights)


class TestBaselineEquivalence:
    @pytest.mark.parametrize('variant', ['DQN', 'DoubleDQN', 'ActorCritic'])
    def test_zero_lambda_reproduces_the_baseline(self, variant):
        buffer = random_gridworld_buffer(300)
        config = make_config(variant, lambda_tf=0.0, gamma=0.99, hidden_sizes=(16,), batch_size=16,
                             target_sync_interval=50, lr=1e-3)
        suft_cls = supported_agents[AgentVariant(variant)]
        baseline_cls = type('Baseline' + suft_cls.__name__, (suft_cls,), {'critic_objective': _regression_objective})
        with_suft = suft_cls(config, GridWorld().spec, np.random.default_rng(3))
        baseline = baseline_cls(config, GridWorld().spec, np.random.default_rng(3))
        rng_a, rng_b = np.random.default_rng(4), np.random.default_rng(4)
        for _ in range(1000):
            assert with_suft.update(buffer, rng_a) == baseline.update(buffer, rng_b)
            for name, net in with_suft.networks().items():
                assert np.array_equal(net.weights, baseline.networks()[name].weights)


class TestRecycling:
    def test_stored_values_match_the_acting_network(self):
        env = GridWorld()
        agent = DqnAgent(make_config(gamma=0.99, hidden_sizes=(16,), batch_size=32, buffer_capacity=500,
                                     target_sync_interval=100, epsilon=EpsilonSchedule(1.0, 0.1, 2000)),
                         env.spec, np.random.default_rng(0))
        buffer = ReplayBuffer(500, env.spec.obs_dim)
        act_rng, sample_rng = np.random.default_rng(1), np.random.default_rng(2)
        shadow = []
        obs = env.reset(0)
        for step in range(10000):
            q_values = agent.online.forward(obs).copy()
            action, value = agent.act(obs, act_rng)
            assert value == q_values[action]
            shadow.append(value)
            result = env.step(action)
            buffer.push(Transition(obs, action, result.reward, result.obs, result.terminated, value, agent.policy_id))
            assert len(buffer) <= 500
            assert buffer.stored_v_behavior()[-1] == shadow[-1]
            if len(buffer) >= 32:
                agent.update(buffer, sample_rng)
            obs = env.reset(step) if result.done else result.obs
        np.testing.assert_array_equal(buffer.stored_v_behavior(), shadow[-500:])


class TestDeltaIsDropped:
    TRAINING_PACKAGES = ('agents', 'network', 'replay', 'envs', 'harness')

    def test_training_code_never_imports_the_causal_package(self):
        package_dir = os.path.dirname(os.path.abspath(suft.__file__))
        for sub in self.TRAINING_PACKAGES:
            for root, _, files in os.walk(os.path.join(package_dir, sub)):
                for name in files:
                    if name.endswith('.py'):
                        with open(os.path.join(root, name), encoding='utf-8') as f:
                            source = f.read()
                        assert 'suft.causal' not in source, name
                        assert 'delta_term' not in source, name

    def test_training_runs_without_the_causal_package(self):
        code = ("import sys; sys.modules['suft.causal'] = None\n"
                "from suft.harness.run_config import RunConfig\n"
                "from suft.harness.training import train_run\n"
                "doc = {'env': 'gridworld', 'agent': {'variant': 'DQN', 'batch_size': 4, 'hidden_sizes': [4]}, 'steps': 20}\n"
                "train_run(RunConfig.from_dict(doc), 0)\n")
        env = dict(os.environ, PYTHONPATH=SRC_DIR + os.pathsep + os.environ.get('PYTHONPATH', ''))
        result = subprocess.run([sys.executable, '-c', code], env=env, capture_output=True, text=True)
        assert result.returncode == 0, result.stderr


class TestCheckpoints:
    @pytest.mark.parametrize('variant', ['DoubleDQN', 'ActorCritic'])
    def test_save_and_load(self, variant, tmp_path):
        buffer = random_gridworld_buffer(60)
        agent = make_agent(make_config(variant, hidden_sizes=(8,), batch_size=8, target_sync_interval=3),
                           GridWorld().spec, np.random.default_rng(0))
        rng = np.random.default_rng(0)
        for _ in range(7):
            agent.update(buffer, rng)
        agent.save(str(tmp_path))
        loaded = load_agent(str(tmp_path), GridWorld().spec)
        assert type(loaded) is type(agent)
        assert loaded.config == agent.config
        assert (loaded.update_count, loaded.policy_id) == (7, 2)
        for name, net in agent.networks().items():
            assert loaded.networks()[name].weights.tobytes() == net.weights.tobytes()

    @pytest.mark.parametrize('variant', ['VanillaDQN', 'DQN', 'ActorCritic'])
    def test_resumes_where_it_stopped(self, variant, tmp_path):
        spec = GridWorld().spec
        buffer = random_gridworld_buffer(60)
        config = make_config(variant, hidden_sizes=(8,), batch_size=8, epsilon=EpsilonSchedule(1.0, 0.1, 50))
        agent = make_agent(config, spec, np.random.default_rng(0))
        rng = np.random.default_rng(0)
        obs = GridWorld().reset(0)
        for _ in range(9):
            agent.act(obs, rng)
        for _ in range(4):
            agent.update(buffer, rng)
        agent.save(str(tmp_path))
        loaded = load_agent(str(tmp_path), spec)
        assert loaded.act_count == agent.act_count == 9
        assert set(loaded._optimizer_states) == set(agent._optimizer_states)
        for name, state in agent._optimizer_states.items():
            restored = loaded._optimizer_states[name]
            assert restored.step == state.step == 4
            np.testing.assert_array_equal(restored.m, state.m)
            np.testing.assert_array_equal(restored.v, state.v)

        for resumed in (agent, loaded):
            step_rng = np.random.default_rng(5)
            resumed.act(obs, step_rng)
            resumed.update(buffer, step_rng)
        for name, net in agent.networks().items():
            assert loaded.networks()[name].weights.tobytes() == net.weights.tobytes()

    def test_missing_optimizer_state_restarts_adam(self, tmp_path):
        agent = make_agent(make_config(hidden_sizes=(4,)), GridWorld().spec, np.random.default_rng(0))
        agent.save(str(tmp_path))
        os.remove(tmp_path / 'online.adam.npz')
        loaded = load_agent(str(tmp_path), GridWorld().spec)
        assert loaded._optimizer_states['online'].step == 0

    def test_rejects_other_dimensions(self, tmp_path):
        agent = make_agent(make_config(hidden_sizes=(4,)), SPEC, np.random.default_rng(0))
        agent.save(str(tmp_path))
        with pytest.raises(DomainError):
            load_agent(str(tmp_path), GridWorld().spec)
