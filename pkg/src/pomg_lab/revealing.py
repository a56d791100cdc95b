"""Weakly-revealing condition checkers.

A model is single-step revealing at level alpha when every per-step emission
matrix keeps its S-th singular value at or above alpha: observations then
carry enough information to pin down the latent state statistically. The
m-step generalization stacks the next m observations under every action
window into the m-step emission-action matrix and applies the same test,
which also covers overcomplete models (fewer observations than states).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np

from .errors import GateError, SolverError
from .model import PomgModel

ALPHA_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class MStepMatrix:
    """Dense (A^(m-1) * O^m) x S matrix for one step.

    Row index flattens the tuple (a_1..a_{m-1}, o_1..o_m) of joint action
    and joint observation indices row-major, earlier elements varying
    slowest. Column s holds the conditional law of the next m observations
    given state s at step h and the row's action window.
    """

    h: int
    m: int
    matrix: np.ndarray


# ---------------------------------------------------------------------------
# smallest singular value
# ---------------------------------------------------------------------------

def _jacobi_eigenvalues(sym: np.ndarray, sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations."""
    a = sym.copy()
    n = a.shape[0]
    if n == 1:
        return a.diagonal().copy()
    scale = float(np.sqrt((a * a).sum()))
    if scale == 0.0:
        return np.zeros(n)
    for _ in range(sweeps):
        off = float(np.sqrt(max((a * a).sum() - (a.diagonal() ** 2).sum(), 0.0)))
        if off <= 1e-15 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-18 * scale:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
    return np.sort(a.diagonal())


def sigma_s_min(matrix: np.ndarray) -> float:
    """Smallest singular value of a tall matrix (column count S <= rows).

    Computed as the square root of the smallest eigenvalue of the S x S
    Gram matrix, found by cyclic Jacobi rotations. Squaring halves the
    attainable precision, so values below ~1e-8 should be read as zero.
    """
    mat = np.asarray(matrix, dtype=float)
    if mat.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    rows, cols = mat.shape
    if rows < cols:
        raise GateError(
            f"matrix is {rows}x{cols}; the smallest-singular-value check needs at "
            f"least as many rows as columns"
        )
    if not np.isfinite(mat).all():
        raise SolverError("matrix has non-finite entries")
    gram = mat.T @ mat
    smallest = float(_jacobi_eigenvalues(gram)[0])
    return float(np.sqrt(max(smallest, 0.0)))


# ---------------------------------------------------------------------------
# m-step emission-action matrices
# ---------------------------------------------------------------------------

def build_m_step_matrix(model: PomgModel, h: int, m: int) -> MStepMatrix:
    """The m-step emission-action matrix at step h (h counted from 1).

    Entry ((a_window, o_window), s) is the probability of observing the
    joint observation window o_window over steps h..h+m-1, starting from
    state s, when the joint action window a_window is executed. Computed by
    exact forward recursion from a point mass on each s; m=1 returns the
    stored emission matrix itself.
    """
    spec = model.spec
    if m < 1:
        raise ValueError("window m must be >= 1")
    if not 1 <= h <= spec.horizon:
        raise ValueError(f"step h={h} outside 1..{spec.horizon}")
    if h + m - 1 > spec.horizon:
        raise GateError(
            f"window m={m} at step h={h} runs past the horizon {spec.horizon}"
        )
    s_count = spec.num_states
    a_count = spec.num_joint_actions
    o_count = spec.num_joint_observations
    n_action_windows = a_count ** (m - 1)
    n_obs_windows = o_count ** m
    out = np.zeros((n_action_windows * n_obs_windows, s_count))

    for a_flat in range(n_action_windows):
        # Decode the action window, earlier steps varying slowest.
        window = []
        rem = a_flat
        for t in range(m - 1):
            power = a_count ** (m - 2 - t)
            window.append(rem // power)
            rem %= power

        # beliefs[:, s] is the unnormalized state distribution given start s.
        row_base = a_flat * n_obs_windows
        frontier = [(0, np.eye(s_count), ())]
        while frontier:
            t, beliefs, obs_prefix = frontier.pop()
            emit = model.emit[h - 1 + t]
            for o in range(o_count):
                masses = emit[o, :][:, None] * beliefs
                prefix = obs_prefix + (o,)
                if t + 1 < m:
                    next_beliefs = model.trans[h - 1 + t][:, :, window[t]] @ masses
                    frontier.append((t + 1, next_beliefs, prefix))
                else:
                    o_flat = 0
                    for idx in prefix:
                        o_flat = o_flat * o_count + idx
                    out[row_base + o_flat, :] = masses.sum(axis=0)
    return MStepMatrix(h=h, m=m, matrix=out)


def per_step_sigmas(model: PomgModel, m: int = 1) -> List[Tuple[int, float]]:
    """(h, sigma_S of the m-step matrix at h) for every valid h."""
    spec = model.spec
    if m < 1:
        raise ValueError("window m must be >= 1")
    if m > spec.horizon:
        raise GateError(f"window m={m} exceeds the horizon {spec.horizon}")
    values = []
    for h in range(1, spec.horizon - m + 2):
        values.append((h, sigma_s_min(build_m_step_matrix(model, h, m).matrix)))
    return values


def check_single_step(model: PomgModel, alpha: float) -> bool:
    """True iff every per-step emission matrix has sigma_S >= alpha - 1e-9.

    Requires at least as many joint observations as states; the overcomplete
    case can never pass and faults instead.
    """
    spec = model.spec
    if spec.num_joint_observations < spec.num_states:
        raise GateError(
            f"single-step check needs an undercomplete model (joint observations "
            f">= states), got O={spec.num_joint_observations} < S={spec.num_states}"
        )
    worst = min(sigma_s_min(emit) for emit in model.emit)
    return worst >= alpha - ALPHA_SLACK


def check_multi_step(model: PomgModel, m: int, alpha: float) -> bool:
    """True iff sigma_S of every m-step matrix is >= alpha - 1e-9."""
    values = per_step_sigmas(model, m)
    return min(sigma for _, sigma in values) >= alpha - ALPHA_SLACK


def single_step_predicate(alpha: float) -> Callable[[PomgModel], bool]:
    def predicate(model: PomgModel) -> bool:
        return check_single_step(model, alpha)

    return predicate


def multi_step_predicate(m: int, alpha: float) -> Callable[[PomgModel], bool]:
    def predicate(model: PomgModel) -> bool:
        return check_multi_step(model, m, alpha)

    return predicate
