"""
Finite-support joint distributions over (X, T, Y_1, ..., Y_{N+1}) and tabulated hypotheses.

Description:
    FiniteJoint holds the treatment probabilities q_t, the per-treatment observation
    distributions P(X | T=t) and, for every observation x and treatment t, a finite
    distribution of the potential outcome Y_t given x. Treatment 1 is the target treatment;
    treatments 2..N+1 are the N control treatments, so N=1 is the binary case.

    Outcome distributions depend on x and t only, never on how treatments were assigned,
    which is how strong ignorability is built into the type.

Notes for Future Development:
    - Objects are immutable after construction; arrays are flagged read-only.
"""

import numpy as np

from suft.common.errors import DomainError

PROBABILITY_TOLERANCE = 1e-12


def _frozen(array):
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


def _check_distribution(probs, what):
    if np.any(~np.isfinite(probs)) or np.any(probs < 0):
        raise DomainError(f'FiniteJoint: {what} has negative or non-finite entries ({probs})')
    if abs(probs.sum() - 1.0) > PROBABILITY_TOLERANCE:
        raise DomainError(f'FiniteJoint: {what} sums to {probs.sum()!r}, not 1')


class FiniteJoint:
    """
    Exact finite joint distribution P(X, T, Y_1, ..., Y_{N+1}).

    Attributes:
        xs (tuple): Observation identifiers.
        n_controls (int): Number N of control treatments.
        q (np.ndarray): Treatment probabilities, q[t-1] = Pr(T=t).
        px (np.ndarray): Shape (N+1, |X|); px[t-1, i] = P(X=xs[i] | T=t).

    Raises:
        DomainError: If any probability vector is invalid, a q_t is not strictly positive,
            or an (x, t) pair has no outcome distribution.
    """

    def __init__(self, xs, q, px_given_t, py_given_x_t):
        """
        Initializes and validates the joint.

        Args:
            xs (sequence): Observation identifiers (hashable, distinct).
            q (sequence of float): Treatment probabilities for t = 1..N+1.
            px_given_t (sequence or dict): Either a sequence of N+1 probability vectors over
                ``xs`` in treatment order, or a dict {t: vector}.
            py_given_x_t (dict): {(x, t): outcome distribution}, where an outcome distribution is
                a dict {value: probability} or a sequence of (value, probability) pairs.
        """
        self.xs = tuple(xs)
        if len(self.xs) == 0:
            raise DomainError('FiniteJoint: xs must not be empty')
        if len(set(self.xs)) != len(self.xs):
            raise DomainError(f'FiniteJoint: observation identifiers must be distinct ({self.xs})')
        self._x_index = {x: i for i, x in enumerate(self.xs)}

        self.q = _frozen(q)
        if self.q.ndim != 1 or self.q.size < 2:
            raise DomainError(f'FiniteJoint: q needs at least two treatments, got {self.q.size}')
        if np.any(self.q <= 0):
            raise DomainError(f'FiniteJoint: every q_t must be strictly positive ({self.q})')
        _check_distribution(self.q, 'q')
        self.n_controls = self.q.size - 1

        if isinstance(px_given_t, dict):
            missing = [t for t in self.treatments if t not in px_given_t]
            if missing:
                raise DomainError(f'FiniteJoint: no observation distribution for treatment {missing[0]}')
            px_given_t = [px_given_t[t] for t in self.treatments]
        px = np.array(px_given_t, dtype=float)
        if px.shape != (self.n_treatments, len(self.xs)):
            raise DomainError(f'FiniteJoint: px_given_t must have shape {(self.n_treatments, len(self.xs))}, got {px.shape}')
        for t in self.treatments:
            _check_distribution(px[t - 1], f'P(X | T={t})')
        self.px = _frozen(px)

        self._outcomes = []
        for t in self.treatments:
            per_x = []
            for x in self.xs:
                if (x, t) not in py_given_x_t:
                    raise DomainError(f'FiniteJoint: no outcome distribution for (x={x!r}, t={t})')
                dist = py_given_x_t[(x, t)]
                pairs = list(dist.items()) if isinstance(dist, dict) else [tuple(p) for p in dist]
                if not pairs:
                    raise DomainError(f'FiniteJoint: empty outcome distribution for (x={x!r}, t={t})')
                values = _frozen([v for v, _ in pairs])
                probs = _frozen([p for _, p in pairs])
                if not np.all(np.isfinite(values)):
                    raise DomainError(f'FiniteJoint: non-finite outcome value for (x={x!r}, t={t})')
                _check_distribution(probs, f'P(Y_{t} | X={x!r})')
                per_x.append((values, probs))
            self._outcomes.append(tuple(per_x))
        self._outcomes = tuple(self._outcomes)

    @property
    def n_treatments(self):
        return self.n_controls + 1

    @property
    def treatments(self):
        return range(1, self.n_treatments + 1)

    def x_index(self, x):
        try:
            return self._x_index[x]
        except (KeyError, TypeError):
            raise DomainError(f'FiniteJoint: unknown observation {x!r}') from None

    def check_treatment(self, t):
        if isinstance(t, bool) or not isinstance(t, (int, np.integer)) or not 1 <= t <= self.n_treatments:
            raise DomainError(f'FiniteJoint: unknown treatment {t!r} (expected 1..{self.n_treatments})')
        return int(t)

    def outcome_distribution(self, x, t):
        """Returns (values, probabilities) of Y_t given X=x as read-only arrays."""
        t = self.check_treatment(t)
        return self._outcomes[t - 1][self.x_index(x)]

    def outcome_distribution_at(self, t_index, x_index):
        """Same as outcome_distribution but with 0-based treatment and observation indices."""
        return self._outcomes[t_index][x_index]


class HypothesisTable:
    """
    Tabulated hypothesis values phi(x; theta_t), one real number per (x, t).

    Attributes:
        values (dict): {(x, t): float}.
    """

    def __init__(self, values):
        self.values = {key: float(value) for key, value in dict(values).items()}

    def value(self, x, t):
        try:
            return self.values[(x, t)]
        except KeyError:
            raise DomainError(f'HypothesisTable: no value for (x={x!r}, t={t!r})') from None

    def as_array(self, joint):
        """
        Lays the table out as an array aligned with ``joint``.

        Returns:
            np.ndarray: Shape (N+1, |X|), entry [t-1, i] = phi(xs[i]; theta_t).

        Raises:
            DomainError: If the table is not total on the joint's domain.
        """
        table = np.empty((joint.n_treatments, len(joint.xs)))
        for t in joint.treatments:
            for i, x in enumerate(joint.xs):
                table[t - 1, i] = self.value(x, t)
        return table

    @classmethod
    def from_function(cls, joint, fn):
        return cls({(x, t): fn(x, t) for t in joint.treatments for x in joint.xs})


def random_joint(rng, n_controls=None, max_controls=1, max_observations=5, max_outcomes=4, value_range=5.0):
    """
    Draws a random finite joint.

    |X| is uniform on [1, max_observations], the support size of every outcome cell is
    uniform on [1, max_outcomes], outcome values are uniform on [-value_range, value_range],
    and every probability vector is drawn from a symmetric Dirichlet with concentration 1.

    Args:
        rng (np.random.Generator): Source of randomness.
        n_controls (int, optional): Fixed N. When None, N is uniform on [1, max_controls].
        max_controls (int, optional): Upper bound for a random N. Defaults to 1 (binary).
        max_observations (int, optional): Defaults to 5.
        max_outcomes (int, optional): Defaults to 4.
        value_range (float, optional): Defaults to 5.0.

    Returns:
        FiniteJoint
    """
    if n_controls is None:
        n_controls = int(rng.integers(1, max_controls + 1))
    n_t = n_controls + 1
    n_x = int(rng.integers(1, max_observations + 1))
    xs = list(range(n_x))
    q = rng.dirichlet(np.ones(n_t))
    px = [rng.dirichlet(np.ones(n_x)) for _ in range(n_t)]
    outcomes = {}
    for t in range(1, n_t + 1):
        for x in xs:
            k = int(rng.integers(1, max_outcomes + 1))
            values = rng.uniform(-value_range, value_range, size=k)
            probs = rng.dirichlet(np.ones(k))
            outcomes[(x, t)] = list(zip(values, probs))
    return FiniteJoint(xs, q, px, outcomes)


def random_hypothesis(joint, rng, value_range=5.0):
    """Uniform random phi values on [-value_range, value_range] for every (x, t) of ``joint``."""
    return HypothesisTable({(x, t): rng.uniform(-value_range, value_range)
                            for t in joint.treatments for x in joint.xs})
