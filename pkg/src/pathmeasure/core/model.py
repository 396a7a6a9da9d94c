from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum, auto
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from pathmeasure.core.errors import DomainError

# Vectorized callables: every body, kernel and integrand takes numpy arrays
# that broadcast against each other and returns an array of their shape.
Body = Callable[..., Any]
KernelFunction = Callable[[float, float, Any, Any], Any]


class RuleKind(Enum):
    GAUSS_LEGENDRE_COMPOSITE = auto()
    TRAPEZOID_PERIODIC = auto()


class SpaceKind(Enum):
    """Configuration spaces the paths live in."""
    CIRCLE = "circle"
    INTERVAL = "interval"
    HALFLINE = "halfline"


class Boundary(Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"


class Command(Enum):
    """Experiments the command line can run."""
    WIENER = "wiener"
    FEYNMAN = "feynman"
    BESSEL_CHECK = "bessel-check"
    PROPAGATOR = "propagator"
    SERIES = "series"


# ---- time tuples and cylinder functions ----

TimePoint = float


@dataclass(frozen=True)
class CollapsedTimes:
    """Distinct times in ascending order plus, for every original position,
    the (0-based) index of its time in `unique_sorted`."""
    unique_sorted: Tuple[float, ...]
    collapse_map: Tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.unique_sorted)

    def expand(self, values: Tuple[Any, ...]) -> Tuple[Any, ...]:
        """Duplicate per-unique-time values back onto the original positions."""
        return tuple(values[j] for j in self.collapse_map)


@dataclass(frozen=True)
class CylinderFunction:
    """A bounded function of a path's values at finitely many times."""
    times: Tuple[float, ...]
    body: Body
    bound: float

    def __post_init__(self) -> None:
        if len(self.times) == 0:
            raise DomainError("empty time tuple")
        if not self.bound >= 0.0:
            raise DomainError("bound must be nonnegative")

    @property
    def arity(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class Path:
    """A path t -> x(t) on [start, end], evaluable on arrays of times."""
    func: Callable[[Any], Any]
    start: float = 0.0
    end: float = 1.0

    def __call__(self, t: Any) -> Any:
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < self.start) or np.any(t_arr > self.end):
            raise DomainError("time outside path domain")
        return self.func(t_arr)

    @classmethod
    def constant(cls, value: complex, start: float = 0.0, end: float = 1.0) -> "Path":
        return cls(lambda t: np.full(np.shape(t), value), start, end)

    @classmethod
    def piecewise_linear(cls, grid: Any, values: Any) -> "Path":
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        return cls(lambda t: np.interp(t, grid, values), float(grid[0]), float(grid[-1]))


# ---- quadrature ----

@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and weights on [a, b]. `panel_size` is the number of
    consecutive nodes forming one panel (1 for the trapezoid rule)."""
    kind: RuleKind
    nodes: np.ndarray
    weights: np.ndarray
    domain: Tuple[float, float]
    panel_size: int = 1

    def __post_init__(self) -> None:
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def size(self) -> int:
        return int(self.nodes.shape[0])


@dataclass(frozen=True, eq=False)
class TensorRule:
    factors: Tuple[QuadratureRule, ...]

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(rule.size for rule in self.factors)

    @property
    def node_count(self) -> int:
        return math.prod(self.shape)

    def open_grids(self) -> List[np.ndarray]:
        """One node array per axis, shaped to broadcast into the full grid."""
        n = len(self.factors)
        grids = []
        for axis, rule in enumerate(self.factors):
            shape = [1] * n
            shape[axis] = rule.size
            grids.append(rule.nodes.reshape(shape))
        return grids


@dataclass(frozen=True)
class DampedResult:
    value: complex
    tail_estimate: float
    flagged: bool = False


@dataclass(frozen=True)
class DampedLimit:
    """Damped integrals over a schedule of dampings and their extrapolated limit."""
    dampings: Tuple[float, ...]
    values: Tuple[complex, ...]
    limit: complex
    max_tail: float


# ---- spaces and kernels ----

@dataclass(frozen=True, eq=False)
class ConfigSpace:
    kind: SpaceKind
    lower: float
    upper: float
    rule: QuadratureRule
    boundary: Optional[Boundary] = None

    def __post_init__(self) -> None:
        if not self.upper > self.lower:
            raise DomainError("empty configuration space")
        expected = (RuleKind.TRAPEZOID_PERIODIC if self.kind is SpaceKind.CIRCLE
                    else RuleKind.GAUSS_LEGENDRE_COMPOSITE)
        if self.rule.kind is not expected:
            raise DomainError(f"{self.kind.value} requires a {expected.name.lower()} rule")

    @property
    def length(self) -> float:
        return self.upper - self.lower

    def contains(self, x: float) -> bool:
        if self.kind is SpaceKind.CIRCLE:
            return math.isfinite(x)
        return self.lower <= x <= self.upper


@dataclass(frozen=True, eq=False)
class TransitionKernel:
    """(t, u, x, y) -> weight of moving from x at time t to y at time u."""
    eval: KernelFunction
    label: str
    positivity_flag: bool
    space: ConfigSpace

    def __call__(self, t: float, u: float, x: Any, y: Any) -> Any:
        return self.eval(t, u, x, y)


@dataclass(frozen=True, eq=False)
class PinnedMeasureSpec:
    """Paths pinned at `start_point` at `start_time`; times live in [0, horizon]."""
    kernel: TransitionKernel
    start_point: float
    start_time: float = 0.0
    horizon: float = 1.0

    def __post_init__(self) -> None:
        if not self.kernel.space.contains(self.start_point):
            raise DomainError("start point outside the configuration space")
        if not 0.0 <= self.start_time <= self.horizon:
            raise DomainError("time outside I")


@dataclass(frozen=True, eq=False)
class SignedKernelParts:
    re_plus: TransitionKernel
    re_minus: TransitionKernel
    im_plus: TransitionKernel
    im_minus: TransitionKernel

    def weighted(self) -> List[Tuple[complex, TransitionKernel]]:
        """The parts paired with their coefficient in the recombination."""
        return [(1.0, self.re_plus), (-1.0, self.re_minus),
                (1j, self.im_plus), (-1j, self.im_minus)]


@dataclass(frozen=True)
class SpectralDrift:
    value: complex
    refined: complex
    drift: float
    flagged: bool


# ---- the Feynman limit ----

@dataclass(frozen=True)
class RegularizationSchedule:
    eps0: float
    ratio: float
    steps: int

    def __post_init__(self) -> None:
        if not self.eps0 > 0.0:
            raise DomainError("regularization must be positive")
        if not 0.0 < self.ratio < 1.0:
            raise DomainError("ratio must lie in (0, 1)")
        if self.steps < 2:
            raise DomainError("schedule needs at least 2 steps")

    def epsilons(self) -> np.ndarray:
        return self.eps0 * self.ratio ** np.arange(self.steps)


@dataclass(frozen=True)
class ConvergenceReport:
    epsilons: Tuple[float, ...]
    values: Tuple[complex, ...]
    cauchy_gaps: Tuple[float, ...]
    limit_estimate: complex
    converged: bool
    tolerance: float
    observed_order: float
    converged_at: Optional[int] = None
    richardson_depth: Optional[int] = None


@dataclass(frozen=True)
class CrossCheck:
    primary: ConvergenceReport
    alternate: ConvergenceReport
    distance: float


@dataclass(frozen=True)
class NormCheck:
    initial_norm: float
    evolved_norm: float
    drift: float


# ---- radial problem ----

@dataclass(frozen=True)
class RadialParams:
    """Dimension parameter n and inverse-square strength nu."""
    n: float
    nu: float

    def __post_init__(self) -> None:
        if self.nu < -((self.n / 2.0 - 1.0) ** 2):
            raise DomainError("nu makes the Bessel order complex")

    @property
    def order(self) -> float:
        return math.sqrt((-1.0 + self.n / 2.0) ** 2 + self.nu)


@dataclass(frozen=True)
class PowerPotential:
    """V(r) = r^e, integrated up to `tail_cutoff`."""
    exponent: float
    tail_cutoff: float = 20.0

    def __post_init__(self) -> None:
        if not self.exponent > -1.0:
            raise DomainError("inadmissible potential")
        if not self.tail_cutoff > 0.0:
            raise DomainError("tail cutoff must be positive")

    def __call__(self, r: Any) -> Any:
        return np.asarray(r, dtype=float) ** self.exponent


@dataclass(frozen=True)
class PerturbationSeriesSpec:
    params: RadialParams
    potential: PowerPotential
    t: float
    inner_times: Tuple[float, ...]
    u: float
    r: float
    s: float

    def __post_init__(self) -> None:
        chain = (self.t, *self.inner_times, self.u)
        if any(a >= b for a, b in zip(chain, chain[1:])):
            raise DomainError("time ordering violated")
        if any(v == 0.0 for v in chain):
            raise DomainError("singular time")
        if not (self.r > 0.0 and self.s > 0.0):
            raise DomainError("radii must be positive")


@dataclass(frozen=True)
class RecurrenceResiduals:
    order: float
    derivative_identity: float
    three_term: float
    finite_difference: float


@dataclass(frozen=True)
class PropagatorResult:
    closed_form: complex
    principal_value: complex
    discrepancy: float
    conjugate_principal_value: complex
    conjugate_discrepancy: float


@dataclass(frozen=True)
class WeightResult:
    value: float
    tail_estimate: float
    flagged: bool


@dataclass(frozen=True)
class SeriesResult:
    head: complex
    partial_sums: Tuple[complex, ...]
    weights: Tuple[float, ...]
    tail_flags: Tuple[bool, ...]


# ---- experiments ----

@dataclass(frozen=True)
class BodyExpression:
    """A parsed body expression over x1..x<arity> with its declared sup bound."""
    text: str
    arity: int
    bound: float
    func: Body = field(repr=False, compare=False)

    def __call__(self, *xs: Any) -> Any:
        return self.func(*xs)


@dataclass
class ExperimentConfig:
    """Everything an experiment run needs, already type-checked."""
    command: Command
    space: SpaceKind = SpaceKind.CIRCLE
    length: float = 1.0
    a: float = 0.0
    b: float = 1.0
    boundary: Boundary = Boundary.NEUMANN
    cutoff: float = 10.0
    nodes: Optional[int] = None
    spectral_terms: Optional[int] = None
    horizon: float = 1.0
    times: Tuple[float, ...] = ()
    start_time: float = 0.0
    start_point: float = 0.0
    body: str = "1"
    bound: float = 1.0
    eps0: float = 0.01
    ratio: float = 0.5
    steps: int = 24
    eps0_alt: Optional[float] = None
    ratio_alt: Optional[float] = None
    tolerance: Optional[float] = None
    n: float = 3.0
    nu: float = 0.0
    r: float = 1.0
    s: float = 1.0
    t: float = 0.5
    u: float = -0.5
    lam: float = 1.0
    pv_cut: float = 0.1
    pv_halvings: int = 3
    orders: Tuple[float, ...] = (1.0, 1.5, 2.0, 3.0)
    grid_points: int = 50
    grid_min: float = 0.5
    grid_max: float = 50.0
    exponent: float = 0.5
    tail_cutoff: float = 20.0
    series_times: Tuple[float, ...] = ()
    k_max: Optional[int] = None
    t_grid: Tuple[float, ...] = ()
    lambda_grid: Tuple[float, ...] = ()
    workers: int = 1
    # config key -> line number it was read from
    source_lines: Dict[str, int] = field(default_factory=dict)


@dataclass
class ResultTable:
    """One experiment's output: CSV rows plus a summary mapping."""
    title: str
    columns: List[str]
    rows: List[List[Any]] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)
    converged: Optional[bool] = None

    def add_row(self, *values: Any) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} values, table has {len(self.columns)} columns")
        self.rows.append(list(values))
