"""Cone-shaped space-time embedding and sample-spacing selection.

An embedding turns a raster cube into supervised pairs: the target is the
field at (t, x*) and the features are the field values in the truncated past
cone of that point, at most `past_frames` frames back and within the cone of
slope `cone_speed`, flattened in lexicographic order (time-major ascending,
then space ascending). Consecutive targets are `spacing` frames apart, which
controls how dependent the examples are; the selection rules pick the
smallest spacing whose residual dependence is negligible for the matching
generalization bound.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConeOutOfBoundsError,
    ConstraintViolationError,
    InvalidParameterError,
    NoFeasibleSpacingError,
)

__all__ = [
    "EmbeddingSpec",
    "TrainingSet",
    "cone_offsets",
    "cone_index_set",
    "build_training_set",
    "forecast_features",
    "select_a_t",
]


@dataclass(frozen=True)
class EmbeddingSpec:
    """Sampling geometry of the embedding.

    spacing      : frames between consecutive targets (a_t multiples of dt)
    past_frames  : cone depth in frames (p_t multiples of dt)
    cone_speed   : slope of the cone in space/time
    dt, dx       : lattice steps
    pixel        : integer pixel index of the target column x*
    t0           : time coordinate of the cube's first frame
    """

    spacing: int
    past_frames: int
    cone_speed: float
    dt: float
    dx: float
    pixel: int
    t0: float = 0.0

    def __post_init__(self):
        if self.past_frames < 1:
            raise ConstraintViolationError("past_frames must be >= 1")
        if self.spacing < self.past_frames + 1:
            raise ConstraintViolationError("spacing must be >= past_frames + 1")
        if not (self.dt > 0 and self.dx > 0 and self.cone_speed > 0):
            raise InvalidParameterError("dt, dx, cone_speed must be > 0")


@dataclass(frozen=True)
class TrainingSet:
    """Embedded examples: inputs is (m x a_pc), outputs has length m."""

    inputs: np.ndarray
    outputs: np.ndarray
    m: int
    a_pc: int

    def __post_init__(self):
        if self.inputs.shape != (self.m, self.a_pc):
            raise InvalidParameterError("inputs shape must be (m, a_pc)")
        if self.outputs.shape != (self.m,):
            raise InvalidParameterError("outputs length must be m")


def cone_offsets(spec):
    """Integer (frames_back, pixel_offset) pairs of the truncated past cone.

    Ordered lexicographically in (time ascending, space ascending): the
    deepest frame comes first. Enumerated from the cone inequality, never
    from a closed-form count.
    """
    out = []
    for j in range(spec.past_frames, 0, -1):
        half = int(math.floor(spec.cone_speed * j * spec.dt / spec.dx + 1e-12))
        for l in range(-half, half + 1):
            out.append((j, l))
    return out


def cone_index_set(t, x_star, spec):
    """Lattice coordinates (time, space) of the cone behind (t, x_star)."""
    return [
        (t - j * spec.dt, x_star + l * spec.dx) for j, l in cone_offsets(spec)
    ]


def _check_table_constraints(spec, n_samples):
    half = n_samples // 2
    if not spec.spacing <= half:
        raise ConstraintViolationError(
            f"spacing {spec.spacing} exceeds floor(N/2) = {half}"
        )
    if not spec.past_frames < half - 1:
        raise ConstraintViolationError(
            f"past_frames {spec.past_frames} must be < floor(N/2) - 1"
        )


def _gather(cube, row, spec, offsets):
    cols = []
    for j, l in offsets:
        r = row - j
        p = spec.pixel + l
        if r < 0 or r >= cube.n_t or p < 0 or p >= cube.n_x:
            raise ConeOutOfBoundsError(
                f"cone index (frame {r}, pixel {p}) outside the lattice"
            )
        cols.append(cube.values[r, p])
    return np.array(cols)


def build_training_set(cube, spec):
    """Embed the cube: m = floor(N/spacing) examples with N = n_t - 1.

    Example i targets frame i*spacing; its features are the cone values in
    lexicographic order. Raises when the hyperparameter box is violated or a
    cone leaves the lattice (the first offending index is reported).
    """
    n_samples = cube.n_t - 1
    _check_table_constraints(spec, n_samples)
    offsets = cone_offsets(spec)
    a_pc = len(offsets)
    m = n_samples // spec.spacing
    inputs = np.empty((m, a_pc))
    outputs = np.empty(m)
    for i in range(1, m + 1):
        row = i * spec.spacing
        inputs[i - 1] = _gather(cube, row, spec, offsets)
        outputs[i - 1] = cube.values[row, spec.pixel]
    return TrainingSet(inputs=inputs, outputs=outputs, m=m, a_pc=a_pc)


def forecast_features(cube, spec):
    """Cone features of the one-frame-ahead point above the last frame."""
    return _gather(cube, cube.n_t, spec, cone_offsets(spec))


def _rule_holds(rule, decay, dt, past_frames, n_samples, k_blocks, a_t,
                delta, grid_size, theta_eval):
    lam = decay.rate
    if rule == "typeI":
        slack = 3.0 * math.sqrt(n_samples / a_t)
        gap = k_blocks * a_t - past_frames
        if decay.kind == "exponential":
            return -lam * dt * gap + slack < 0
        return -lam * math.log(dt * gap) + slack < 0
    if rule == "typeII":
        drift = math.log(a_t / (2.0 * n_samples))
        gap = a_t - past_frames
        if decay.kind == "exponential":
            return -lam * dt * gap - drift <= 0
        return -lam * math.log(dt * gap) - drift <= 0
    if rule == "theta_threshold":
        m = n_samples // a_t
        return theta_eval((a_t - past_frames) * dt) <= delta / (4.0 * grid_size * m)
    raise InvalidParameterError(f"unknown rule {rule!r}")


def select_a_t(rule, decay, dt, past_frames, n_samples, k_blocks=1,
               delta=None, grid_size=None, theta_eval=None):
    """Smallest admissible spacing satisfying the selection rule.

    rule "typeI" and "typeII" use only the decay rate (exponential decay
    compares the rate times the time gap, power decay the rate times the log
    gap) against the rule's slack term. rule "theta_threshold" needs delta
    and grid_size and accepts the smallest spacing with
    theta_tilde(gap) <= delta/(4*grid_size*m), m = floor(N/spacing) coupled
    to the candidate. theta_eval defaults to decay.evaluate.
    """
    if n_samples < 4:
        raise InvalidParameterError("need at least 4 frames")
    if past_frames < 1:
        raise InvalidParameterError("past_frames must be >= 1")
    if rule == "theta_threshold" and (delta is None or grid_size is None):
        raise InvalidParameterError("theta_threshold needs delta and grid_size")
    if theta_eval is None:
        theta_eval = decay.evaluate
    for a_t in range(past_frames + 1, n_samples // 2 + 1):
        if _rule_holds(rule, decay, dt, past_frames, n_samples, k_blocks, a_t,
                       delta, grid_size, theta_eval):
            return a_t
    raise NoFeasibleSpacingError(
        f"no spacing in [{past_frames + 1}, {n_samples // 2}] satisfies {rule}"
    )
