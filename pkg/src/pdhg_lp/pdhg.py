"""Core primal-dual hybrid gradient step and iterate bookkeeping.

One iteration from (x, y) with step size s and primal weight w:

    x+ = proj_[l,u](x - (s/w) (c - K'y))
    y+ = proj_Y  (y + (s w) (q - K (2 x+ - x)))

where Y clips the first m1 dual coordinates at zero.  K(2x+ - x) is formed
as 2 K x+ - K x with K x cached on the state, so a step costs exactly one
matvec and one rmatvec.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import NonFiniteIterate, NonPositiveInput, NonPositiveQuadraticForm


@dataclass(frozen=True)
class StepState:
    """Step size s and primal weight w; eta/sigma are the split step sizes."""

    step_size: float
    primal_weight: float
    initial_step_size: float = None

    def __post_init__(self):
        if not (self.step_size > 0 and np.isfinite(self.step_size)):
            raise NonPositiveInput(f"step_size must be positive, got {self.step_size}")
        if not (self.primal_weight > 0 and np.isfinite(self.primal_weight)):
            raise NonPositiveInput(f"primal_weight must be positive, got {self.primal_weight}")
        if self.initial_step_size is None:
            object.__setattr__(self, "initial_step_size", self.step_size)

    @property
    def eta(self):
        return self.step_size / self.primal_weight

    @property
    def sigma(self):
        return self.step_size * self.primal_weight


@dataclass
class IterateState:
    """Mutable per-epoch iterate state.

    Running sums implement the weighted average used for restarts; ``kx``
    caches K @ x and must be dropped whenever x changes by any route other
    than ``pdhg_step`` (restart, rescale).
    """

    x: np.ndarray
    y: np.ndarray
    sum_x: np.ndarray = None
    sum_y: np.ndarray = None
    sum_weight: float = 0.0
    inner_count: int = 0
    total_count: int = 0
    epoch_index: int = 0
    kx: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.float64)
        if self.sum_x is None:
            self.sum_x = np.zeros_like(self.x)
        if self.sum_y is None:
            self.sum_y = np.zeros_like(self.y)

    @classmethod
    def initial(cls, saddle):
        """Start at the origin projected into the box, dual at zero."""
        x0 = np.clip(np.zeros(saddle.num_primal), saddle.l, saddle.u)
        return cls(x=x0, y=np.zeros(saddle.num_dual))

    def average(self):
        """Weighted average of the iterates seen this epoch.

        Falls back to the current point when the epoch has no completed
        iterations yet.
        """
        if self.sum_weight <= 0.0:
            return self.x.copy(), self.y.copy()
        return self.sum_x / self.sum_weight, self.sum_y / self.sum_weight

    def invalidate_cache(self):
        self.kx = None


def project_primal(x, l, u):
    return np.clip(x, l, u)


def project_dual(y, m1):
    out = y.copy()
    if m1:
        np.maximum(out[:m1], 0.0, out=out[:m1])
    return out


def pdhg_step(state, saddle, step, avg_weight=1.0):
    """Advance the iterate by one PDHG step (in place).

    ``avg_weight`` is this iterate's weight in the running average; the
    commit is skipped and NonFiniteIterate raised if the new point is not
    finite, so the state always holds the last good iterate.
    """
    k = saddle.K
    with np.errstate(over="ignore", invalid="ignore"):
        if state.kx is None:
            state.kx = k.matvec(state.x)
        grad = saddle.c - k.rmatvec(state.y)
        x_new = np.clip(state.x - step.eta * grad, saddle.l, saddle.u)
        kx_new = k.matvec(x_new)
        y_new = project_dual(
            state.y + step.sigma * (saddle.q - (2.0 * kx_new - state.kx)), saddle.m1
        )
    if not (np.all(np.isfinite(x_new)) and np.all(np.isfinite(y_new))):
        raise NonFiniteIterate(
            f"iterate became non-finite at total iteration {state.total_count + 1}"
        )
    commit_step(state, x_new, y_new, kx_new, avg_weight)
    return state


def commit_step(state, x_new, y_new, kx_new, avg_weight):
    """Install an already-computed step and update averages/counters."""
    state.x = x_new
    state.y = y_new
    state.kx = kx_new
    state.sum_x += avg_weight * x_new
    state.sum_y += avg_weight * y_new
    state.sum_weight += avg_weight
    state.inner_count += 1
    state.total_count += 1


def ps_norm(z1, z2, step, mode="omega", matrix=None):
    """Distance between points z = (x, y) in the step-dependent metric.

    mode="omega" returns sqrt((w ||dx||^2 + ||dy||^2 / w) / s), the norm
    induced by the diagonal part of the PPM preconditioner.  mode="full"
    returns the full quadratic form

        (w ||dx||^2 + ||dy||^2 / w) / s + 2 dy' K dx

    (no square root), which is what one PDHG step is nonexpansive in; it can
    go nonpositive when s ||K|| >= 1, which is reported as an error rather
    than clamped.
    """
    x1, y1 = z1
    x2, y2 = z2
    dx = np.asarray(x1, dtype=np.float64) - np.asarray(x2, dtype=np.float64)
    dy = np.asarray(y1, dtype=np.float64) - np.asarray(y2, dtype=np.float64)
    s = step.step_size
    w = step.primal_weight
    diag = (w * (dx @ dx) + (dy @ dy) / w) / s
    if mode == "omega":
        return float(np.sqrt(diag))
    if mode == "full":
        if matrix is None:
            raise NonPositiveInput("mode='full' needs the constraint matrix")
        value = diag + 2.0 * float(dy @ matrix.matvec(dx))
        if value < 0.0:
            raise NonPositiveQuadraticForm(
                f"P_s form is negative ({value!r}); step size too large for this matrix"
            )
        return float(value)
    raise NonPositiveInput(f"unknown ps_norm mode {mode!r}")
