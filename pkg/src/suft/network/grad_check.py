"""
Central finite-difference verification of Mlp.backward.
"""

from dataclasses import dataclass

import numpy as np

from suft.common.errors import DomainError

PASS_THRESHOLD = 1e-5


@dataclass(frozen=True)
class GradCheckReport:
    """
    Attributes:
        max_rel_err (float): Largest |g_a - g_n| / max(1, |g_a|, |g_n|) over checked coordinates.
        worst_index (int): Coordinate attaining max_rel_err (-1 when nothing was checked).
        passed (bool): At least one coordinate checked and max_rel_err < 1e-5.
        n_checked (int): Coordinates compared.
        n_skipped (int): Coordinates skipped because a perturbation crossed an L1 kink.
    """
    max_rel_err: float
    worst_index: int
    passed: bool
    n_checked: int = 0
    n_skipped: int = 0

    def as_dict(self):
        return dict(max_rel_err=self.max_rel_err, worst_index=self.worst_index, passed=self.passed,
                    n_checked=self.n_checked, n_skipped=self.n_skipped)


def _kink_signature(objective, outputs):
    residuals = getattr(objective, 'kink_residuals', None)
    if residuals is None or getattr(getattr(objective, 'loss', None), 'name', 'l2') != 'l1':
        return None
    return np.sign(residuals(outputs))


def grad_check(net, inputs, objective, h=1e-6, analytic=None):
    """
    Compares the analytic gradient with central differences, coordinate by coordinate.

    For L1 objectives a coordinate is skipped when either perturbation flips the sign of a
    residual (a base point sitting on a kink has sign 0 there, so every coordinate that moves
    it is skipped). A check that compares no coordinate at all does not pass.

    Args:
        net (Mlp): Network; its weights are restored after the check.
        inputs (array-like): Batch of shape (B, n_in).
        objective: Batch objective (see Mlp.loss_and_gradient).
        h (float, optional): Step size, > 0. Defaults to 1e-6.
        analytic (np.ndarray, optional): Gradient to verify; defaults to net.backward(inputs, objective).

    Returns:
        GradCheckReport
    """
    if h <= 0:
        raise DomainError(f'grad_check: h must be > 0 ({h})')
    if analytic is None:
        analytic = net.backward(inputs, objective)
    analytic = np.asarray(analytic, dtype=np.float64)
    base_signature = _kink_signature(objective, net.forward(inputs))

    weights = net.weights
    max_err, worst, checked, skipped = 0.0, -1, 0, 0
    for i in range(net.n_params):
        original = weights[i]
        weights[i] = original + h
        out_plus = net.forward(inputs)
        weights[i] = original - h
        out_minus = net.forward(inputs)
        weights[i] = original
        if base_signature is not None:
            if not (np.array_equal(_kink_signature(objective, out_plus), base_signature)
                    and np.array_equal(_kink_signature(objective, out_minus), base_signature)):
                skipped += 1
                continue
        numeric = (objective.value(out_plus) - objective.value(out_minus)) / (2 * h)
        err = abs(analytic[i] - numeric) / max(1.0, abs(analytic[i]), abs(numeric))
        checked += 1
        if err > max_err or worst < 0:
            max_err, worst = err, i
    return GradCheckReport(float(max_err), worst, bool(checked > 0 and max_err < PASS_THRESHOLD), checked, skipped)
