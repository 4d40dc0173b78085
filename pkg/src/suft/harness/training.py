"""
Training loop of one seed and the multi-seed sweep around it.

Description:
    One run interleaves act -> env.step -> buffer.push (with the recycled v_behavior and the
    agent's current policy_id) -> update. Four independent random streams are split from the
    seed (weight init, action selection, batch sampling, episode resets), so a run depends
    only on (config, seed).

    The run log holds one line per environment step at which an update ran or an episode
    ended: {step, episode, reward, td_loss, suft_term, total_loss}; ``reward`` is the return of
    the episode that just finished (null otherwise) and the loss fields are null when no
    update ran. Wall time is kept on the RunRecord only and never written to the log.

Notes for Future Development:
    - Seeds run in a thread pool; numpy releases the GIL in the matrix products only, so the
      speedup is modest. Switching to processes needs picklable configs, which they already are.
"""

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from suft.agents.registry import make_agent
from suft.common.errors import DomainError
from suft.common.utilities import make_rngs, worker_count, write_json, write_jsonl
from suft.envs.registry import make_env
from suft.replay.replay_buffer import ReplayBuffer, Transition

logger = logging.getLogger(__name__)

RUN_CONFIG_FILE = 'run_config.json'
RUN_LOG_FILE = 'log.jsonl'
CHECKPOINT_FOLDER = 'checkpoint'
RESET_SEED_BOUND = 2 ** 31


def seed_folder(output_dir, seed):
    return os.path.join(output_dir, f'seed_{seed}')


@dataclass(frozen=True)
class RunRecord:
    """
    Trajectory of one training run.

    Attributes:
        config_hash (str): Hash of the run protocol (see RunConfig.config_hash).
        seed (int): Seed of the run.
        episode_rewards (tuple): Return of every completed episode.
        episode_end_steps (tuple): Environment step at which each episode ended.
        updates (tuple): UpdateMetrics of every update, in order.
        update_steps (tuple): Environment step of every update.
        log (tuple): JSONL rows of the run log.
        wall_time (float): Seconds; excluded from equality.
    """
    config_hash: str
    seed: int
    episode_rewards: tuple = ()
    episode_end_steps: tuple = ()
    updates: tuple = ()
    update_steps: tuple = ()
    log: tuple = ()
    wall_time: float = field(default=0.0, compare=False)

    @property
    def suft_terms(self):
        return np.array([m.suft_term for m in self.updates])

    @property
    def td_losses(self):
        return np.array([m.td_loss for m in self.updates])

    def write_log(self, path):
        write_jsonl(path, self.log)


def check_agent_env(agent, env):
    """
    Raises:
        DomainError: If the agent's networks were built for another observation or action size.
    """
    if (agent.env_spec.obs_dim, agent.env_spec.n_actions) != (env.spec.obs_dim, env.spec.n_actions):
        raise DomainError(f'train_run: agent built for obs_dim={agent.env_spec.obs_dim}, n_actions={agent.env_spec.n_actions} '
                          f'but {env.name} has obs_dim={env.spec.obs_dim}, n_actions={env.spec.n_actions}')


def train_run(config, seed, output_dir=None, agent=None, verbose=False):
    """
    Trains one agent for ``config.steps`` environment steps.

    Args:
        config (RunConfig): Run configuration.
        seed (int): Seed of this run.
        output_dir (str, optional): When given, the log and a checkpoint are written to
            ``<output_dir>/seed_<seed>/``.
        agent (BaseAgent, optional): Pre-built agent; by default one is built from the config.
        verbose (bool, optional): Log progress at INFO instead of DEBUG. Defaults to False.

    Returns:
        RunRecord: The run's trajectory.

    Raises:
        DomainError: If ``agent`` does not fit the environment.
    """
    level = logging.INFO if verbose else logging.DEBUG
    start = time.perf_counter()
    env = make_env(config.env)
    init_rng, act_rng, sample_rng, reset_rng = make_rngs(seed, 4)
    if agent is None:
        agent = make_agent(config.resolved_agent(), env.spec, init_rng)
    check_agent_env(agent, env)
    buffer = ReplayBuffer(agent.config.buffer_capacity, env.spec.obs_dim)

    episode_rewards, episode_end_steps, updates, update_steps, log = [], [], [], [], []
    episode, episode_return = 0, 0.0
    obs = env.reset(int(reset_rng.integers(RESET_SEED_BOUND))) if config.steps else None
    for step in range(1, config.steps + 1):
        action, v_behavior = agent.act(obs, act_rng)
        result = env.step(action)
        buffer.push(Transition(obs=obs, action=action, reward=result.reward, next_obs=result.obs,
                               terminated=result.terminated, v_behavior=v_behavior, policy_id=agent.policy_id))
        episode_return += result.reward
        obs = result.obs

        metrics = None
        if len(buffer) >= config.learning_starts and step % config.train_interval == 0:
            metrics = agent.update(buffer, sample_rng)
            updates.append(metrics)
            update_steps.append(step)

        finished = None
        if result.done:
            finished = episode_return
            episode_rewards.append(finished)
            episode_end_steps.append(step)

        if metrics is not None or finished is not None:
            log.append({
                'step': step,
                'episode': episode,
                'reward': finished,
                'td_loss': None if metrics is None else metrics.td_loss,
                'suft_term': None if metrics is None else metrics.suft_term,
                'total_loss': None if metrics is None else metrics.total_loss,
            })

        if result.done:
            logger.log(level, f'train_run: seed {seed} episode {episode} ended at step {step} with return {finished:.3f}')
            episode += 1
            episode_return = 0.0
            obs = env.reset(int(reset_rng.integers(RESET_SEED_BOUND)))

    record = RunRecord(config_hash=config.config_hash, seed=int(seed), episode_rewards=tuple(episode_rewards),
                       episode_end_steps=tuple(episode_end_steps), updates=tuple(updates),
                       update_steps=tuple(update_steps), log=tuple(log), wall_time=time.perf_counter() - start)
    if output_dir is not None:
        folder = seed_folder(output_dir, seed)
        record.write_log(os.path.join(folder, RUN_LOG_FILE))
        agent.save(os.path.join(folder, CHECKPOINT_FOLDER))
    logger.log(level, f'train_run: seed {seed} finished {len(episode_rewards)} episodes and {len(updates)} updates '
                      f'in {record.wall_time:.1f} s')
    return record


def train_seeds(config, seeds=None, output_dir=None, verbose=False):
    """
    Runs ``train_run`` for every seed in a thread pool capped by SUFT_THREADS.

    Args:
        config (RunConfig): Run configuration.
        seeds (sequence of int, optional): Defaults to config.seeds.
        output_dir (str, optional): When given, run_config.json and per-seed folders are written there.
        verbose (bool, optional): Defaults to False.

    Returns:
        list: RunRecords in seed order.
    """
    seeds = list(config.seeds if seeds is None else seeds)
    if output_dir is not None:
        write_json(os.path.join(output_dir, RUN_CONFIG_FILE), {**config.to_dict(), 'seeds': seeds, 'output_dir': output_dir})
    with ThreadPoolExecutor(max_workers=min(worker_count(), len(seeds))) as pool:
        futures = [pool.submit(train_run, config, seed, output_dir, None, verbose) for seed in seeds]
        return [f.result() for f in futures]


def random_policy_reward(env_name, seeds, episodes=10):
    """
    Mean episode return of the uniform random policy.

    Args:
        env_name (str): Registered environment name.
        seeds (sequence of int): One random stream per seed.
        episodes (int, optional): Episodes per seed. Defaults to 10.

    Returns:
        float: Mean return over all seeds and episodes.
    """
    if episodes < 1 or not len(seeds):
        raise DomainError(f'random_policy_reward: need at least one seed and one episode ({len(seeds)}, {episodes})')
    env = make_env(env_name)
    returns = []
    for seed in seeds:
        action_rng, reset_rng = make_rngs(seed, 2)
        for _ in range(episodes):
            env.reset(int(reset_rng.integers(RESET_SEED_BOUND)))
            total, done = 0.0, False
            while not done:
                result = env.step(int(action_rng.integers(env.spec.n_actions)))
                total += result.reward
                done = result.done
            returns.append(total)
    return float(np.mean(returns))
