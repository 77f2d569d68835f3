"""Diagnostics: stroboscopic traces, spectral weights, line-glass order,
intraperiod correlators with crossing counts, and phase labels.

Disorder ensembles are embarrassingly parallel; every per-realization
quantity is a pure function of (code, disorder spec, root seed, index), so
results are identical for any worker count. Reductions run in the parent in
realization-index order.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .lattice import StabilizerCode
from .model import (
    DisorderSpec,
    ModelInstance,
    apply_period,
    derive_subseed,
    instance_unitary,
    sample_instance,
)
from .pauli import PauliString
from .states import (
    NumericsError,
    apply_pauli_to_matrix,
    apply_rotation,
    diagonalize,
    evolve_within_period,
    expectation,
    fold_quasienergy,
    zero_state,
)

# sub-seed streams; index 0 is the disorder draw itself
STREAM_DISORDER = 0
STREAM_SPECTRAL_SAMPLE = 1
STREAM_EIGENSTATE_PICK = 2

_REALITY_TOL = 1e-9
_CROSSING_FLOOR = 0.1


class AmbiguousPhaseError(Exception):
    """Both phase signatures cleared the threshold at once."""


class Phase(str, Enum):
    NONLOCAL_DTC = "NonlocalDTC"
    SURFACE_CODE = "SurfaceCode"
    TRIVIAL = "Trivial"


# ----- ensembles -----


@dataclass(frozen=True)
class EnsembleSpec:
    """A disorder ensemble: code, field/coupling windows, size, root seed."""

    code: StabilizerCode
    disorder: DisorderSpec
    realizations: int
    seed: int

    def __post_init__(self) -> None:
        if self.realizations < 1:
            raise ValueError("need at least one realization")

    def instance(self, index: int) -> ModelInstance:
        return sample_instance(
            self.code, self.disorder, derive_subseed(self.seed, index, STREAM_DISORDER)
        )

    def stream_rng(self, index: int, stream: int) -> np.random.Generator:
        return np.random.Generator(
            np.random.PCG64(derive_subseed(self.seed, index, stream))
        )


def _map_realizations(worker: Callable, tasks: Sequence, workers: int) -> List:
    """Run one task per realization; results come back in task order."""
    if workers <= 1 or len(tasks) <= 1:
        return [worker(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, tasks))


# ----- line operators -----


def h_line(code: StabilizerCode, letter: str, j: int) -> PauliString:
    """Product of `letter` along the line j = const."""
    return PauliString.from_dict({(i, j): letter for i in range(1, code.lx + 1)})


def v_line(code: StabilizerCode, letter: str, i: int) -> PauliString:
    """Product of `letter` along the line i = const."""
    return PauliString.from_dict({(i, j): letter for j in range(1, code.ly + 1)})


def h_line_tilde(code: StabilizerCode, j: int) -> PauliString:
    """Z line at j = const with a Y endpoint on the i = 1 site."""
    ops = {(i, j): "Z" for i in range(2, code.lx + 1)}
    ops[(1, j)] = "Y"
    return PauliString.from_dict(ops)


def v_line_tilde(code: StabilizerCode, i: int) -> PauliString:
    """X line at i = const with a Y endpoint on the j = 1 site."""
    ops = {(i, j): "X" for j in range(2, code.ly + 1)}
    ops[(i, 1)] = "Y"
    return PauliString.from_dict(ops)


# ----- initial states -----


@dataclass(frozen=True)
class ProductRotation:
    """Initial state exp(-i*angle*axis) applied site by site to |0...0>."""

    axis: str = "Y"
    angle: float = 0.0

    def __post_init__(self) -> None:
        if self.axis not in ("X", "Y", "Z"):
            raise ValueError(f"axis must be X, Y, or Z, got {self.axis!r}")

    def build(self, code: StabilizerCode) -> np.ndarray:
        psi = zero_state(code.n_qubits)
        if self.angle == 0.0:
            return psi
        for site in code.sites:
            psi = apply_rotation(
                self.angle, PauliString.single(site, self.axis), psi, code.sites
            )
        return psi


# ----- stroboscopic dynamics -----


@dataclass(frozen=True)
class DiagnosticSeries:
    """Disorder-averaged traces keyed by observable name."""

    periods: np.ndarray
    means: Mapping[str, np.ndarray]
    stderrs: Mapping[str, np.ndarray]
    realizations: int
    config_echo: Mapping = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name, arr in self.means.items():
            if not np.all(np.isfinite(arr)):
                raise NumericsError(f"non-finite mean trace for {name!r}")


def _real_expectation(p: PauliString, psi: np.ndarray, sites) -> float:
    val = expectation(p, psi, sites)
    if abs(val.imag) > _REALITY_TOL:
        raise NumericsError(f"expectation not real: {val!r}")
    return float(val.real)


def _dynamics_one(task) -> np.ndarray:
    spec, index, recipe, named_obs, n_periods = task
    inst = spec.instance(index)
    sites = spec.code.sites
    psi = recipe.build(spec.code)
    out = np.empty((len(named_obs), n_periods + 1))
    for k, (_, p) in enumerate(named_obs):
        out[k, 0] = _real_expectation(p, psi, sites)
    for n in range(1, n_periods + 1):
        psi = apply_period(inst, psi)
        for k, (_, p) in enumerate(named_obs):
            out[k, n] = _real_expectation(p, psi, sites)
    return out


def stroboscopic_dynamics(
    spec: EnsembleSpec,
    recipe: ProductRotation,
    observables: Sequence[Tuple[str, PauliString]],
    n_periods: int,
    workers: int = 1,
    config_echo: Optional[Mapping] = None,
) -> DiagnosticSeries:
    """Period-by-period expectations, averaged over the disorder ensemble.

    Periods run 0..n_periods inclusive; entry 0 is the initial state.
    """
    if n_periods < 1:
        raise ValueError("n_periods must be at least 1")
    for name, p in observables:
        if not p.is_hermitian:
            raise ValueError(f"observable {name!r} is not Hermitian")
    tasks = [
        (spec, r, recipe, tuple(observables), n_periods)
        for r in range(spec.realizations)
    ]
    stacked = np.stack(_map_realizations(_dynamics_one, tasks, workers))
    means = stacked.mean(axis=0)
    if spec.realizations > 1:
        errs = stacked.std(axis=0, ddof=1) / math.sqrt(spec.realizations)
    else:
        errs = np.zeros_like(means)
    names = [name for name, _ in observables]
    return DiagnosticSeries(
        periods=np.arange(n_periods + 1),
        means={name: means[k] for k, name in enumerate(names)},
        stderrs={name: errs[k] for k, name in enumerate(names)},
        realizations=spec.realizations,
        config_echo=dict(config_echo or {}),
    )


# ----- spectral functions -----


@dataclass(frozen=True)
class SpectralConfig:
    """Excitation operator, target quasienergy, bin half-width, sample size."""

    operator: PauliString
    target: float
    half_width: float = 0.05 * math.pi
    sample_size: Optional[int] = None

    def __post_init__(self) -> None:
        if not self.operator.is_hermitian:
            raise ValueError("excitation operator must be Hermitian")
        if self.target < 0.0:
            raise ValueError("target quasienergy must be >= 0")
        if not 0.0 < self.half_width < math.pi / 2.0:
            raise ValueError("half_width must lie in (0, pi/2)")


def spectral_value(
    eps: np.ndarray,
    vecs: np.ndarray,
    sel: np.ndarray,
    config: SpectralConfig,
    sites,
) -> float:
    """Binned transition weight for one spectrum; gauge-free in |amp|^2."""
    transformed = apply_pauli_to_matrix(config.operator, vecs, sites)
    amps = vecs[:, sel].conj().T @ transformed
    weights = np.abs(amps) ** 2
    dist = np.abs(fold_quasienergy(eps[sel][:, None] - eps[None, :] - config.target))
    hits = weights[dist < config.half_width].sum()
    total = weights.sum()
    return float(hits / total)


def _spectral_one(task) -> float:
    spec, index, config = task
    inst = spec.instance(index)
    eps, vecs = diagonalize(instance_unitary(inst))
    dim = len(eps)
    size = config.sample_size if config.sample_size is not None else min(32, dim)
    if not 0 < size <= dim:
        raise ValueError(f"sample size {size} outside 1..{dim}")
    rng = spec.stream_rng(index, STREAM_SPECTRAL_SAMPLE)
    sel = np.sort(rng.choice(dim, size=size, replace=False))
    return spectral_value(eps, vecs, sel, config, spec.code.sites)


def spectral_function(spec: EnsembleSpec, config: SpectralConfig, workers: int = 1) -> float:
    """Disorder-averaged weight for the operator to shift quasienergy by target."""
    tasks = [(spec, r, config) for r in range(spec.realizations)]
    values = _map_realizations(_spectral_one, tasks, workers)
    return float(np.mean(values))


# ----- line-glass order -----

_LETTERS = ("X", "Y", "Z")


@dataclass(frozen=True)
class SGOrderResult:
    """Glass order for line pairs (chi_h, chi_v) and site pairs (chi_local)."""

    chi_h: Mapping[str, float]
    chi_v: Mapping[str, float]
    chi_local: Mapping[str, float]
    normalization: str = "pair-count"


def _diag_weight(p: PauliString, eps_vecs, sites) -> float:
    """Sum over eigenstates of |<n|P|n>|^2."""
    vecs = eps_vecs
    transformed = apply_pauli_to_matrix(p, vecs, sites)
    diag = np.einsum("in,in->n", vecs.conj(), transformed)
    return float(np.sum(np.abs(diag) ** 2))


def sg_values(code: StabilizerCode, vecs: np.ndarray) -> np.ndarray:
    """Nine glass-order entries for one eigenbasis: h, v, local per letter."""
    sites = code.sites
    dim = vecs.shape[0]
    h_pairs = list(combinations(range(1, code.ly + 1), 2))
    v_pairs = list(combinations(range(1, code.lx + 1), 2))
    # Shared-row and shared-column pairs are excluded: they are segments of
    # the line operators above, and on these codes they include two-site
    # stabilizers whose eigenstate expectations are pinned near +-1, which
    # would register as order at every stabilizer-like point.
    site_pairs = [(a, b) for a, b in combinations(sites, 2) if a[0] != b[0] and a[1] != b[1]]
    out = np.empty(3 * len(_LETTERS))
    for li, letter in enumerate(_LETTERS):
        acc = 0.0
        for j, jp in h_pairs:
            acc += _diag_weight(h_line(code, letter, j) * h_line(code, letter, jp), vecs, sites)
        out[li] = acc / (len(h_pairs) * dim)
        acc = 0.0
        for i, ip in v_pairs:
            acc += _diag_weight(v_line(code, letter, i) * v_line(code, letter, ip), vecs, sites)
        out[len(_LETTERS) + li] = acc / (len(v_pairs) * dim)
        acc = 0.0
        for a, b in site_pairs:
            pair = PauliString.from_dict({a: letter, b: letter})
            acc += _diag_weight(pair, vecs, sites)
        out[2 * len(_LETTERS) + li] = acc / (len(site_pairs) * dim)
    return out


def _sg_one(task) -> np.ndarray:
    spec, index = task
    inst = spec.instance(index)
    _, vecs = diagonalize(instance_unitary(inst))
    return sg_values(spec.code, vecs)


def sg_order(spec: EnsembleSpec, workers: int = 1) -> SGOrderResult:
    """Eigenstate-diagonal glass order, averaged over disorder.

    Lines with fewer than two rows or columns cannot form pairs; the codes
    require lx, ly >= 2 so every family has at least one pair.
    """
    tasks = [(spec, r) for r in range(spec.realizations)]
    mean = np.stack(_map_realizations(_sg_one, tasks, workers)).mean(axis=0)
    k = len(_LETTERS)
    return SGOrderResult(
        chi_h={letter: float(mean[i]) for i, letter in enumerate(_LETTERS)},
        chi_v={letter: float(mean[k + i]) for i, letter in enumerate(_LETTERS)},
        chi_local={letter: float(mean[2 * k + i]) for i, letter in enumerate(_LETTERS)},
    )


# ----- intraperiod correlators -----

NONLOCAL_PAIRS = (("h_z", "h_z_tilde"), ("v_x", "v_x_tilde"))


@dataclass(frozen=True)
class CorrelatorSeries:
    """Disorder-averaged intraperiod correlators on a grid in (0, T]."""

    grid: np.ndarray
    curves: Mapping[str, np.ndarray]
    crossings: Mapping[str, int]
    realizations: int

    def __post_init__(self) -> None:
        g = np.asarray(self.grid)
        if g.ndim != 1 or len(g) < 2 or np.any(np.diff(g) <= 0):
            raise ValueError("grid must be strictly increasing")


def default_time_grid(points: int = 200, period: float = 1.0) -> np.ndarray:
    """Uniform grid over (0, T], endpoint included."""
    return np.arange(1, points + 1) * (period / points)


def correlator_operators(code: StabilizerCode) -> Dict[str, PauliString]:
    """The two nonlocal line pairs, their Y-endpoint twins, and a far site pair."""
    far = {(1, 1), (code.lx, code.ly)}
    ops = {
        "h_z": h_line(code, "Z", 1) * h_line(code, "Z", code.ly),
        "h_z_tilde": h_line_tilde(code, 1) * h_line_tilde(code, code.ly),
        "v_x": v_line(code, "X", 1) * v_line(code, "X", code.lx),
        "v_x_tilde": v_line_tilde(code, 1) * v_line_tilde(code, code.lx),
    }
    for letter in _LETTERS:
        ops[f"local_{letter.lower()}"] = PauliString.from_dict(
            {site: letter for site in far}
        )
    return ops


def _correlator_one(task) -> np.ndarray:
    spec, index, grid = task
    code = spec.code
    sites = code.sites
    inst = spec.instance(index)
    _, vecs = diagonalize(instance_unitary(inst))
    rng = spec.stream_rng(index, STREAM_EIGENSTATE_PICK)
    psi0 = vecs[:, int(rng.integers(vecs.shape[0]))]
    ops = correlator_operators(code)
    out = np.empty((len(ops), len(grid)))
    for k, t in enumerate(grid):
        psi_t = evolve_within_period(
            code, inst.params.h_x, inst.params.h_z, inst.params.couplings, psi0, float(t)
        )
        for o, p in enumerate(ops.values()):
            out[o, k] = _real_expectation(p, psi_t, sites)
    return out


def count_crossings(
    a: np.ndarray, b: np.ndarray, floor: float = _CROSSING_FLOOR
) -> int:
    """Sign changes of (a - b) between grid points where both exceed floor."""
    mask = (np.abs(a) > floor) & (np.abs(b) > floor)
    gap = np.sign(a - b)
    flips = (gap[:-1] * gap[1:] < 0) & mask[:-1] & mask[1:]
    return int(np.count_nonzero(flips))


def correlator_dynamics(
    spec: EnsembleSpec,
    t_grid: Optional[np.ndarray] = None,
    workers: int = 1,
) -> CorrelatorSeries:
    """Equal-time line correlators in one evolved eigenstate per realization.

    The eigenstate index is drawn from the realization's own seed stream, so
    the choice is reproducible. Line-pair correlators carry an eigenstate-
    dependent overall sign (the pair product acts as a sector-dependent +-1),
    so before averaging, each realization's (plain, twin) family is jointly
    flipped to make the plain curve's largest value positive; the joint flip
    cannot change where the two curves cross. Crossing counts then compare
    each family to its twin on the aligned disorder-averaged curves.
    """
    grid = default_time_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    if grid[0] <= 0.0:
        raise ValueError("time grid must start after 0")
    tasks = [(spec, r, grid) for r in range(spec.realizations)]
    stack = np.stack(_map_realizations(_correlator_one, tasks, workers))
    names = list(correlator_operators(spec.code))
    for plain, twin in NONLOCAL_PAIRS:
        ip, it = names.index(plain), names.index(twin)
        for r in range(stack.shape[0]):
            anchor = stack[r, ip][np.argmax(np.abs(stack[r, ip]))]
            if anchor < -_CROSSING_FLOOR:
                stack[r, ip] *= -1.0
                stack[r, it] *= -1.0
    mean = stack.mean(axis=0)
    curves = {name: mean[k] for k, name in enumerate(names)}
    crossings = {
        plain: count_crossings(curves[plain], curves[twin])
        for plain, twin in NONLOCAL_PAIRS
    }
    return CorrelatorSeries(
        grid=grid, curves=curves, crossings=crossings, realizations=spec.realizations
    )


# ----- phase label -----

S_KEYS = ("s_zbar_0", "s_xbar_0", "s_zbar_pi", "s_xbar_pi")


def classify_phase(
    s_values: Mapping[str, float],
    chi_values: Optional[Mapping[str, float]] = None,
    threshold: float = 0.8,
) -> Phase:
    """Label from the four spectral weights; chi values ride along unused.

    The glass order corroborates the label but does not decide it.
    """
    missing = [k for k in S_KEYS if k not in s_values]
    if missing:
        raise ValueError(f"missing spectral values: {missing}")
    dtc = s_values["s_zbar_pi"] > threshold and s_values["s_xbar_pi"] > threshold
    code_like = s_values["s_zbar_0"] > threshold and s_values["s_xbar_0"] > threshold
    if dtc and code_like:
        raise AmbiguousPhaseError("both pi and zero signatures above threshold")
    if dtc:
        return Phase.NONLOCAL_DTC
    if code_like:
        return Phase.SURFACE_CODE
    return Phase.TRIVIAL
