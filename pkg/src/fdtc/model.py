"""Drive parameters: ideal points, disorder ensembles, perturbative splitting.

A disorder realization draws every field and coupling independently from a
uniform window (mean - halfwidth, mean + halfwidth); field windows are split
into the special line (X fields on i = 1, Z fields on j = 1) and the bulk.
Sub-seeds for realization r come from a splitmix-style counter mix, so an
ensemble is reproducible regardless of which worker draws which realization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional, Sequence, Tuple

import numpy as np

from .lattice import StabilizerCode
from .pauli import PauliString
from .states import (
    apply_rotation,
    floquet_unitary,
    logical_basis_states,
)


class Regime(str, Enum):
    DTC2T = "DTC2T"
    CNOT4T = "CNOT4T"


FIELD_FAMILIES = ("h_x_row1", "h_x_bulk", "h_z_col1", "h_z_bulk")
COUPLING_FAMILIES = ("j_bulk", "j_boundary_x", "j_boundary_z")


@dataclass(frozen=True)
class FamilySpec:
    """Uniform window (mean - halfwidth, mean + halfwidth), radians for fields."""

    mean: float
    halfwidth: float = 0.0

    def __post_init__(self):
        if self.halfwidth < 0:
            raise ValueError("halfwidth must be >= 0")


@dataclass(frozen=True)
class DisorderSpec:
    h_x_row1: FamilySpec
    h_x_bulk: FamilySpec
    h_z_col1: FamilySpec
    h_z_bulk: FamilySpec
    j_bulk: FamilySpec
    j_boundary_x: FamilySpec = FamilySpec(0.0)
    j_boundary_z: FamilySpec = FamilySpec(0.0)

    def family(self, name: str) -> FamilySpec:
        return getattr(self, name)


@dataclass(frozen=True)
class DriveParameters:
    """One concrete set of fields (per site) and couplings (per generator)."""

    h_x: Mapping[Tuple[int, int], float]
    h_z: Mapping[Tuple[int, int], float]
    couplings: tuple

    def validate_for(self, code: StabilizerCode) -> None:
        sites = set(code.sites)
        if set(self.h_x) != sites or set(self.h_z) != sites:
            raise ValueError("field keys do not cover the lattice exactly")
        if len(self.couplings) != len(code.generators):
            raise ValueError("coupling count does not match generator count")


@dataclass(frozen=True)
class ModelInstance:
    code: StabilizerCode
    params: DriveParameters
    seed: int


# ----- deterministic seeding -----

_GOLDEN = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1


def mix64(z: int) -> int:
    """splitmix64 finalizer; full 64-bit avalanche."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_subseed(root: int, index: int, stream: int = 0) -> int:
    """Counter-based sub-seed: stable under reordering and parallelism."""
    return mix64((root ^ mix64(stream)) + (index + 1) * _GOLDEN)


def _field_family(kind: str, site: Tuple[int, int]) -> str:
    i, j = site
    if kind == "x":
        return "h_x_row1" if i == 1 else "h_x_bulk"
    return "h_z_col1" if j == 1 else "h_z_bulk"


def _coupling_family(family_label: str) -> str:
    if family_label == "boundary_x":
        return "j_boundary_x"
    if family_label == "boundary_z":
        return "j_boundary_z"
    return "j_bulk"


def sample_instance(code: StabilizerCode, spec: DisorderSpec, seed: int) -> ModelInstance:
    """Draw one realization; the draw order is frozen (h_x, h_z, couplings)."""
    rng = np.random.Generator(np.random.PCG64(seed))

    def draw(fam: FamilySpec) -> float:
        if fam.halfwidth == 0.0:
            return fam.mean
        return float(rng.uniform(fam.mean - fam.halfwidth, fam.mean + fam.halfwidth))

    h_x = {s: draw(spec.family(_field_family("x", s))) for s in code.sites}
    h_z = {s: draw(spec.family(_field_family("z", s))) for s in code.sites}
    js = tuple(draw(spec.family(_coupling_family(f))) for f in code.families)
    return ModelInstance(code, DriveParameters(h_x, h_z, js), seed)


# ----- ideal points -----


def ideal_parameters(code: StabilizerCode, regime: Regime, coupling: float = 0.3) -> DriveParameters:
    """Exact ideal drive; every coupling gets the same placeholder value.

    DTC2T: pi/2 X fields on the i = 1 line, pi/2 Z fields on the j = 1 line,
    zero elsewhere. CNOT4T (periodic codes only): the same X line but pi/4 Z
    fields on every site.
    """
    regime = Regime(regime)
    if regime is Regime.CNOT4T and code.boundary != "periodic":
        raise ValueError("the 4T regime needs periodic boundaries")
    h_x = {s: (math.pi / 2 if s[0] == 1 else 0.0) for s in code.sites}
    if regime is Regime.DTC2T:
        h_z = {s: (math.pi / 2 if s[1] == 1 else 0.0) for s in code.sites}
    else:
        h_z = {s: math.pi / 4 for s in code.sites}
    return DriveParameters(h_x, h_z, tuple(coupling for _ in code.generators))


def instance_unitary(instance: ModelInstance) -> np.ndarray:
    return floquet_unitary(instance.code, instance.params.h_x, instance.params.h_z, instance.params.couplings)


def apply_period(instance: ModelInstance, psi: np.ndarray) -> np.ndarray:
    """U_T |psi> by streaming rotations; no matrix is built."""
    code = instance.code
    sites = code.sites
    p = instance.params
    for g, j in zip(code.generators, p.couplings):
        psi = apply_rotation(j, g, psi, sites)
    for s in sites:
        if p.h_z[s]:
            psi = apply_rotation(p.h_z[s], PauliString.single(s, "Z"), psi, sites)
    for s in sites:
        if p.h_x[s]:
            psi = apply_rotation(p.h_x[s], PauliString.single(s, "X"), psi, sites)
    return psi


# ----- perturbative splitting -----


@dataclass(frozen=True)
class SplitIdeal:
    """U_T = (X-deviation layer) (Z-deviation layer) U_ideal.

    Moving the Z deviations through the ideal pi/2 X line conjugates the
    i = 1 ones to -Z, hence the flipped entries in delta_z_tilde; the same
    flip applies in both regimes because the X line is common to both.
    """

    regime: Regime
    delta_x: Mapping[Tuple[int, int], float]
    delta_z_tilde: Mapping[Tuple[int, int], float]
    ideal: DriveParameters

    @property
    def epsilon(self) -> float:
        vals = list(self.delta_x.values()) + list(self.delta_z_tilde.values())
        return max((abs(v) for v in vals), default=0.0)


def split_ideal(instance: ModelInstance, regime: Regime) -> SplitIdeal:
    regime = Regime(regime)
    code = instance.code
    ideal = ideal_parameters(code, regime)
    ideal = DriveParameters(ideal.h_x, ideal.h_z, instance.params.couplings)
    delta_x = {s: instance.params.h_x[s] - ideal.h_x[s] for s in code.sites}
    delta_z = {}
    for s in code.sites:
        d = instance.params.h_z[s] - ideal.h_z[s]
        delta_z[s] = -d if s[0] == 1 else d
    return SplitIdeal(regime, delta_x, delta_z, ideal)


def apply_tilde(split: SplitIdeal, code: StabilizerCode, psi: np.ndarray) -> np.ndarray:
    """The deviation unitary on a state: Z-deviation layer first, then X."""
    sites = code.sites
    for s in sites:
        if split.delta_z_tilde[s]:
            psi = apply_rotation(split.delta_z_tilde[s], PauliString.single(s, "Z"), psi, sites)
    for s in sites:
        if split.delta_x[s]:
            psi = apply_rotation(split.delta_x[s], PauliString.single(s, "X"), psi, sites)
    return psi


def ideal_unitary(code: StabilizerCode, regime: Regime, couplings: Sequence[float]) -> np.ndarray:
    ideal = ideal_parameters(code, regime)
    return floquet_unitary(code, ideal.h_x, ideal.h_z, tuple(couplings))


# ----- relative-phase diagnostics -----

_OVERLAP_FLOOR = 1e-12

TARGET_ZBAR = "xi_zbar"
TARGET_XBAR = "xi_xbar"
TARGET_ZBAR2 = "xi_zbar2"


@dataclass(frozen=True)
class RelativePhase:
    target: str
    defined: bool
    value: Optional[float]
    deviation: Optional[float]
    epsilon: float


def _wrap(delta: float) -> float:
    """Wrap a phase difference onto (-pi, pi]."""
    return (delta + math.pi) % (2.0 * math.pi) - math.pi


def _phase_result(target: str, num: complex, den: complex, goal: float, eps: float,
                  modulus_norm: float = 1.0) -> RelativePhase:
    """xi = i log(num/den) compared against the goal phase.

    The real part of i log is -arg(ratio); its imaginary part, log of the
    modulus, records the amplitude imbalance of the two overlaps and is part
    of the reported deviation (otherwise the diagnostic is blind whenever
    symmetry pins the phase exactly, e.g. odd strip widths). modulus_norm
    divides the ratio's modulus so that the ideal point sits at deviation
    zero even when the reference components are unequal by construction.
    """
    if abs(num) < _OVERLAP_FLOOR or abs(den) < _OVERLAP_FLOOR:
        return RelativePhase(target, False, None, None, eps)
    ratio = num / den
    xi = (-math.atan2(ratio.imag, ratio.real)) % (2.0 * math.pi)
    dev = math.hypot(_wrap(xi - goal), math.log(abs(ratio) / modulus_norm))
    return RelativePhase(target, True, xi, dev, eps)


def relative_phase(instance: ModelInstance, target: str) -> RelativePhase:
    """Phase xi between reference cat eigenmodes of the ideal drive.

    xi_zbar: references (|0> +- i|1>)/sqrt(2) in the logical Z basis, probed
    with the deviation unitary acting on |1>; pi at the ideal point.
    xi_xbar: the same construction in the logical X basis. xi_zbar2: the 4T
    quadruplet built from powers of the ideal unitary on a single logical
    codeword (the orbit visits four orthogonal codewords, so all four
    quadruplet components carry equal weight and longitudinal logical terms
    cancel in the ratio); pi/2 at the ideal point, taken between a
    consecutive-in-quasienergy pair. Deviation is the complex-log distance
    from the target value.
    """
    code = instance.code
    sites = code.sites
    if target in (TARGET_ZBAR, TARGET_XBAR):
        if code.n_logical != 1:
            raise ValueError(f"{target} needs a single logical qubit")
        split = split_ideal(instance, Regime.DTC2T)
        basis = logical_basis_states(code)
        zero, one = basis["0"], basis["1"]
        if target == TARGET_ZBAR:
            a, b = zero, one
        else:
            a = (zero + one) / math.sqrt(2.0)
            b = (zero - one) / math.sqrt(2.0)
        ref_plus = (a + 1j * b) / math.sqrt(2.0)
        ref_minus = (a - 1j * b) / math.sqrt(2.0)
        probe = apply_tilde(split, code, b)
        return _phase_result(
            target, np.vdot(ref_minus, probe), np.vdot(ref_plus, probe), math.pi, split.epsilon
        )
    if target == TARGET_ZBAR2:
        if code.n_logical != 2:
            raise ValueError(f"{target} needs two logical qubits")
        split = split_ideal(instance, Regime.CNOT4T)
        psi = logical_basis_states(code)["00"]
        u_ideal = ideal_unitary(code, Regime.CNOT4T, instance.params.couplings)
        powers = [psi]
        for _ in range(4):
            powers.append(u_ideal @ powers[-1])
        phi4 = math.atan2(np.vdot(psi, powers[4]).imag, np.vdot(psi, powers[4]).real)
        lam0 = complex(np.exp(1j * phi4 / 4.0))
        comps = []
        for m in range(2):
            lam = lam0 * (-1j) ** m  # quasienergy ladder step pi/2 per m
            vec = sum(lam ** (-k) * powers[k] for k in range(4)) / 2.0
            comps.append(vec / np.linalg.norm(vec))
        probe = apply_tilde(split, code, u_ideal @ psi)
        num = np.vdot(comps[1], probe)
        den = np.vdot(comps[0], probe)
        return _phase_result(target, num, den, math.pi / 2.0, split.epsilon)
    raise ValueError(f"unknown relative-phase target {target!r}")
