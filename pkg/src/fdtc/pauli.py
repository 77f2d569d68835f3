"""Exact Pauli-string algebra with integer phase tracking.

Operators are products of single-site X/Y/Z letters times a phase i^k with
k in Z_4. Phases never touch floating point: multiplication, commutation and
Clifford conjugation stay in integer arithmetic, so long conjugation chains
cannot drift by a sign. Sites are arbitrary sortable labels (the lattice
geometry lives in :mod:`fdtc.lattice`); most of this package uses (i, j)
integer pairs.

Conventions:
    Z * X = iY per site (right operator acts first).
    A rotation R_P(theta) is the unitary exp(-i * theta * P).
    iSWAP on sites (a, b) is exp(-i pi/4 (X_a X_b + Y_a Y_b)).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from itertools import product as _iterproduct
from typing import Any, Iterable, Mapping, Optional, Sequence, Union

import numpy as np

Site = Any  # hashable and mutually sortable within one operator

_PHASE_LABEL = {0: "+", 1: "+i", 2: "-", 3: "-i"}

# sigma_a * sigma_b = i^k sigma_c for distinct non-identity letters
_LETTER_PRODUCT = {
    ("X", "Y"): (1, "Z"),
    ("Y", "Z"): (1, "X"),
    ("Z", "X"): (1, "Y"),
    ("Y", "X"): (3, "Z"),
    ("Z", "Y"): (3, "X"),
    ("X", "Z"): (3, "Y"),
}

_CLIFFORD_ANGLE = math.pi / 4
_ANGLE_TOL = 1e-12


@dataclass(frozen=True)
class PauliString:
    """Immutable Pauli string i^k * prod_site sigma_letter(site).

    ``terms`` is kept sorted by site so equal operators compare and hash
    equal. ``phase_power`` is k in Z_4.
    """

    terms: tuple = ()
    phase_power: int = 0

    def __post_init__(self):
        object.__setattr__(self, "phase_power", self.phase_power % 4)
        srt = tuple(sorted(self.terms))
        for _, letter in srt:
            if letter not in ("X", "Y", "Z"):
                raise ValueError(f"bad Pauli letter {letter!r}")
        sites = [s for s, _ in srt]
        if len(set(sites)) != len(sites):
            raise ValueError("duplicate site in Pauli string")
        object.__setattr__(self, "terms", srt)

    # ----- constructors -----

    @staticmethod
    def identity(phase_power: int = 0) -> "PauliString":
        return PauliString((), phase_power)

    @staticmethod
    def single(site: Site, letter: str) -> "PauliString":
        return PauliString(((site, letter),))

    @staticmethod
    def from_dict(support: Mapping[Site, str], phase_power: int = 0) -> "PauliString":
        return PauliString(tuple(support.items()), phase_power)

    @staticmethod
    def from_sites(letter: str, sites: Iterable[Site]) -> "PauliString":
        """Homogeneous string, e.g. a Z line or an X plaquette."""
        return PauliString(tuple((s, letter) for s in sites))

    # ----- basic queries -----

    @property
    def support(self) -> dict:
        return dict(self.terms)

    @property
    def sites(self) -> tuple:
        return tuple(s for s, _ in self.terms)

    @property
    def weight(self) -> int:
        return len(self.terms)

    @property
    def phase(self) -> complex:
        return 1j ** self.phase_power

    @property
    def is_hermitian(self) -> bool:
        return self.phase_power in (0, 2)

    @property
    def sign(self) -> int:
        """+1 or -1 for Hermitian strings; raises otherwise."""
        if not self.is_hermitian:
            raise ValueError("string has imaginary phase")
        return 1 if self.phase_power == 0 else -1

    def letter(self, site: Site) -> Optional[str]:
        for s, l in self.terms:
            if s == site:
                return l
        return None

    # ----- algebra -----

    def __mul__(self, other: "PauliString") -> "PauliString":
        if not isinstance(other, PauliString):
            return NotImplemented
        k = self.phase_power + other.phase_power
        out = dict(self.terms)
        for site, letter in other.terms:
            mine = out.get(site)
            if mine is None:
                out[site] = letter
            elif mine == letter:
                del out[site]
            else:
                dk, combined = _LETTER_PRODUCT[(mine, letter)]
                k += dk
                out[site] = combined
        return PauliString(tuple(out.items()), k)

    def adjoint(self) -> "PauliString":
        return PauliString(self.terms, -self.phase_power)

    def times_i(self, k: int = 1) -> "PauliString":
        return PauliString(self.terms, self.phase_power + k)

    def with_phase(self, phase_power: int) -> "PauliString":
        return PauliString(self.terms, phase_power)

    def unsigned(self) -> "PauliString":
        return PauliString(self.terms, 0)

    def commutes_with(self, other: "PauliString") -> bool:
        """True iff [self, other] = 0 (parity of clashing sites)."""
        mine = dict(self.terms)
        clashes = 0
        for site, letter in other.terms:
            l = mine.get(site)
            if l is not None and l != letter:
                clashes += 1
        return clashes % 2 == 0

    def __str__(self) -> str:
        body = " ".join(f"{l}@{_format_site(s)}" for s, l in self.terms)
        return f"{_PHASE_LABEL[self.phase_power]} {body}" if body else _PHASE_LABEL[self.phase_power]


# ----- symplectic encoding -----


def symplectic_vector(p: PauliString, site_order: Sequence[Site]) -> np.ndarray:
    """GF(2) vector [x | z] of length 2n for a fixed site ordering.

    x bit set for letters in {X, Y}, z bit for {Z, Y}. The phase is dropped;
    it is not part of the GF(2) data.
    """
    index = {s: q for q, s in enumerate(site_order)}
    n = len(site_order)
    vec = np.zeros(2 * n, dtype=np.uint8)
    for site, letter in p.terms:
        q = index[site]
        if letter in ("X", "Y"):
            vec[q] = 1
        if letter in ("Z", "Y"):
            vec[n + q] = 1
    return vec


def from_symplectic(vec: np.ndarray, site_order: Sequence[Site], phase_power: int = 0) -> PauliString:
    n = len(site_order)
    terms = []
    for q, site in enumerate(site_order):
        x, z = int(vec[q]) & 1, int(vec[n + q]) & 1
        if x and z:
            terms.append((site, "Y"))
        elif x:
            terms.append((site, "X"))
        elif z:
            terms.append((site, "Z"))
    return PauliString(tuple(terms), phase_power)


def symplectic_product(u: np.ndarray, v: np.ndarray) -> int:
    """Symplectic form <u, v> = u_x . v_z + u_z . v_x mod 2."""
    n = len(u) // 2
    return int((np.dot(u[:n], v[n:]) + np.dot(u[n:], v[:n])) % 2)


# ----- rotations and Clifford gates -----


@dataclass(frozen=True)
class PauliRotation:
    """exp(-i * theta * axis); the axis must be Hermitian (phase +-1)."""

    theta: float
    axis: PauliString

    def __post_init__(self):
        if not self.axis.is_hermitian:
            raise ValueError("rotation axis must carry phase +-1")

    @property
    def is_clifford(self) -> bool:
        return abs(abs(self.theta) - _CLIFFORD_ANGLE) < _ANGLE_TOL

    def inverse(self) -> "PauliRotation":
        return PauliRotation(-self.theta, self.axis)


@dataclass(frozen=True)
class ISwapGate:
    """iSWAP = exp(-i pi/4 (XX + YY)) on (site_a, site_b); dagger inverts."""

    site_a: Site
    site_b: Site
    dagger: bool = False

    def inverse(self) -> "ISwapGate":
        return ISwapGate(self.site_a, self.site_b, not self.dagger)


Gate = Union[PauliRotation, ISwapGate]


@dataclass(frozen=True)
class CliffordSequence:
    """Ordered gates; conjugation applies them left to right."""

    gates: tuple = ()

    def __post_init__(self):
        for g in self.gates:
            if isinstance(g, PauliRotation):
                if not g.is_clifford:
                    raise ValueError(f"non-Clifford angle {g.theta} in sequence")
            elif not isinstance(g, ISwapGate):
                raise ValueError(f"unsupported gate {g!r}")

    def inverse(self) -> "CliffordSequence":
        return CliffordSequence(tuple(g.inverse() for g in reversed(self.gates)))

    def __len__(self) -> int:
        return len(self.gates)


def euler_conjugate(theta: float, p1: PauliString, p2: PauliString):
    """Rotate p2 by R_{p1}(theta): returns R p2 R^dagger as [(coeff, string)].

    For anticommuting p1, p2 this is cos(2 theta) p2 + sin(2 theta) * (-i p1 p2);
    the -i is folded into the string phase so coefficients stay real. At
    theta = +-pi/4 the cosine term vanishes identically and a single exactly
    phased string is returned. Raises if p1 and p2 commute (the conjugation
    would be the identity).
    """
    if p1.commutes_with(p2):
        raise ValueError("axes commute; conjugation is the identity map")
    cross = (p1 * p2).times_i(3)  # -i * p1 p2, exact
    if abs(abs(theta) - _CLIFFORD_ANGLE) < _ANGLE_TOL:
        # sin(2 theta) = +-1 exactly at the Clifford points
        return [(1.0, cross if theta > 0 else cross.times_i(2))]
    return [(math.cos(2.0 * theta), p2), (math.sin(2.0 * theta), cross)]


# ----- iSWAP conjugation tableau -----

_IDENT = np.eye(2, dtype=complex)
_PAULI_MATS = {
    "I": _IDENT,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

ISWAP_MATRIX = np.array(
    [[1, 0, 0, 0], [0, 0, -1j, 0], [0, -1j, 0, 0], [0, 0, 0, 1]], dtype=complex
)


def _build_iswap_rules(dagger: bool) -> dict:
    """Conjugation table sigma_a x sigma_b -> i^k sigma_c x sigma_d.

    Derived numerically from the 4x4 matrix instead of entered by hand; the
    result is exact because every entry of U^dag P U is a Gaussian integer.
    """
    u = ISWAP_MATRIX
    left, right = (u, u.conj().T) if dagger else (u.conj().T, u)
    rules = {}
    letters = ("I", "X", "Y", "Z")
    for a, b in _iterproduct(letters, letters):
        if a == "I" and b == "I":
            continue
        m = left @ np.kron(_PAULI_MATS[a], _PAULI_MATS[b]) @ right
        for c, d in _iterproduct(letters, letters):
            t = np.trace(np.kron(_PAULI_MATS[c], _PAULI_MATS[d]).conj().T @ m) / 4.0
            if abs(t) > 0.5:
                k = int(round(np.angle(t) / (math.pi / 2))) % 4
                if abs(t - 1j**k) > 1e-12:
                    raise AssertionError("iSWAP conjugation produced a non-Pauli")
                rules[(a, b)] = (k, c, d)
                break
        else:
            raise AssertionError("iSWAP conjugation produced a non-Pauli")
    return rules


_ISWAP_RULES: dict = {}


def _iswap_rules(dagger: bool) -> dict:
    key = bool(dagger)
    if key not in _ISWAP_RULES:
        _ISWAP_RULES[key] = _build_iswap_rules(dagger)
    return _ISWAP_RULES[key]


def conjugate_pauli(p: PauliString, gate: Gate) -> PauliString:
    """Heisenberg map p -> g^dagger p g for a single Clifford gate, exact."""
    if isinstance(gate, PauliRotation):
        if not gate.is_clifford:
            raise ValueError("only +-pi/4 rotations conjugate Paulis to Paulis")
        if gate.axis.commutes_with(p):
            return p
        # g^dag p g = cos(2 phi) p + i sin(2 phi) (axis * p) at phi = gate.theta
        out = gate.axis * p
        return out.times_i(1 if gate.theta > 0 else 3)
    if isinstance(gate, ISwapGate):
        a = p.letter(gate.site_a) or "I"
        b = p.letter(gate.site_b) or "I"
        if a == "I" and b == "I":
            return p
        k, c, d = _iswap_rules(gate.dagger)[(a, b)]
        rest = tuple(t for t in p.terms if t[0] not in (gate.site_a, gate.site_b))
        new = dict(rest)
        if c != "I":
            new[gate.site_a] = c
        if d != "I":
            new[gate.site_b] = d
        return PauliString(tuple(new.items()), p.phase_power + k)
    raise TypeError(f"unsupported gate {gate!r}")


def conjugate_rotation(seq: CliffordSequence, rot: PauliRotation) -> PauliRotation:
    """Propagate exp(-i theta P) through the sequence: axis -> C^dag P C."""
    axis = rot.axis
    for gate in seq.gates:
        axis = conjugate_pauli(axis, gate)
    return PauliRotation(rot.theta, axis)


# ----- text format -----
#
# One gate per line:
#     RX(+pi/4)@(1,1)
#     R[X@(1,2) Z@(1,1)](-pi/4)
#     ISWAP@(1,1),(2,1)
#     ISWAPDG@(1,1),(2,1)
# Angles are +-pi/4, +-pi/2 style fractions or plain float radians.

_SITE_RE = re.compile(r"\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)")


def _format_site(site: Site) -> str:
    if isinstance(site, tuple):
        return "(" + ",".join(str(c) for c in site) + ")"
    return f"({site})"


def _parse_site(text: str):
    m = _SITE_RE.fullmatch(text.strip())
    if not m:
        raise ValueError(f"bad site {text!r}")
    return (int(m.group(1)), int(m.group(2)))


def format_angle(theta: float) -> str:
    for num, den in ((1, 4), (1, 2), (3, 4), (1, 1)):
        val = math.pi * num / den
        if abs(abs(theta) - val) < 1e-12:
            sign = "+" if theta > 0 else "-"
            frac = f"pi/{den}" if num == 1 else f"{num}pi/{den}"
            return sign + (frac if den > 1 else "pi")
    return repr(theta)


def parse_angle(text: str) -> float:
    text = text.strip().replace(" ", "")
    sign = 1.0
    if text.startswith("+"):
        text = text[1:]
    elif text.startswith("-"):
        sign, text = -1.0, text[1:]
    m = re.fullmatch(r"(?:(\d+))?pi(?:/(\d+))?", text)
    if m:
        num = int(m.group(1)) if m.group(1) else 1
        den = int(m.group(2)) if m.group(2) else 1
        return sign * math.pi * num / den
    return sign * float(text)


def format_pauli_body(p: PauliString) -> str:
    """Phase-free body, e.g. 'X@(1,1) X@(2,1)'."""
    return " ".join(f"{l}@{_format_site(s)}" for s, l in p.terms)


def parse_pauli_body(text: str) -> PauliString:
    terms = []
    for tok in text.split():
        if "@" not in tok:
            raise ValueError(f"bad Pauli term {tok!r}")
        letter, site = tok.split("@", 1)
        terms.append((_parse_site(site), letter))
    return PauliString(tuple(terms))


def format_gate(gate: Gate) -> str:
    if isinstance(gate, ISwapGate):
        name = "ISWAPDG" if gate.dagger else "ISWAP"
        return f"{name}@{_format_site(gate.site_a)},{_format_site(gate.site_b)}"
    if isinstance(gate, PauliRotation):
        ang = format_angle(gate.theta)
        if gate.axis.weight == 1 and gate.axis.phase_power == 0:
            (site, letter), = gate.axis.terms
            return f"R{letter}({ang})@{_format_site(site)}"
        return f"R[{format_pauli_body(gate.axis)}]({ang})"
    raise TypeError(f"unsupported gate {gate!r}")


_GATE_SINGLE_RE = re.compile(r"R([XYZ])\(([^)]*)\)@(\(.*\))")
_GATE_STRING_RE = re.compile(r"R\[([^\]]*)\]\(([^)]*)\)")
_GATE_ISWAP_RE = re.compile(r"(ISWAPDG|ISWAP)@(\(.*\)),(\(.*\))")


def parse_gate(line: str) -> Gate:
    line = line.strip()
    m = _GATE_ISWAP_RE.fullmatch(line)
    if m:
        return ISwapGate(_parse_site(m.group(2)), _parse_site(m.group(3)), m.group(1) == "ISWAPDG")
    m = _GATE_SINGLE_RE.fullmatch(line)
    if m:
        return PauliRotation(parse_angle(m.group(2)), PauliString.single(_parse_site(m.group(3)), m.group(1)))
    m = _GATE_STRING_RE.fullmatch(line)
    if m:
        return PauliRotation(parse_angle(m.group(2)), parse_pauli_body(m.group(1)))
    raise ValueError(f"cannot parse gate line {line!r}")


def parse_circuit(text: str) -> CliffordSequence:
    """Parse a gate-per-line block; '#' comments and blanks are skipped."""
    gates = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            gates.append(parse_gate(line))
    return CliffordSequence(tuple(gates))
