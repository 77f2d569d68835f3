"""Stabilizer code construction on Lx x Ly site lattices.

Sites are (i, j) with i in 1..Lx and j in 1..Ly; qubit index is
(i-1) + (j-1)*Lx. Two geometries:

surface (open boundary): bulk plaquettes anchored at the top-left corner
(i, j) for 1 <= i < Lx, 1 <= j < Ly, X-type when i + j is even, Z-type
otherwise, supported on the four corners {(i,j),(i+1,j),(i,j+1),(i+1,j+1)}.
Weight-two boundary generators alternate along the four edges: Z pairs on
the i = 1 and i = Lx lines, X pairs on the j = 1 and j = Ly lines. One
logical qubit; the logical Z is the Z line at j = 1, the logical X is the
X line at i = 1.

toric (periodic boundary): one plaquette per corner with wraparound,
X-type when i + j is even; Lx and Ly must both be even or the two
sublattices clash. Two logical qubits from the two noncontractible cycles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

from .pauli import PauliString, symplectic_vector


class CodeConstructionError(Exception):
    """Raised when a requested code fails its own consistency checks."""


@dataclass(frozen=True)
class StabilizerCode:
    kind: str
    lx: int
    ly: int
    generators: tuple
    families: tuple
    logical_x: tuple
    logical_z: tuple

    @property
    def boundary(self) -> str:
        return "periodic" if self.kind == "toric" else "open"

    @property
    def sites(self) -> tuple:
        return tuple((i, j) for j in range(1, self.ly + 1) for i in range(1, self.lx + 1))

    @property
    def n_qubits(self) -> int:
        return self.lx * self.ly

    @property
    def n_logical(self) -> int:
        return len(self.logical_x)

    def site_index(self, site) -> int:
        i, j = site
        if not (1 <= i <= self.lx and 1 <= j <= self.ly):
            raise ValueError(f"site {site} outside {self.lx}x{self.ly} lattice")
        return (i - 1) + (j - 1) * self.lx


def row_sites(lx: int, i: int, ly: int) -> list:
    """Sites of the line i = const (varying j)."""
    return [(i, j) for j in range(1, ly + 1)]


def col_sites(lx: int, j: int) -> list:
    """Sites of the line j = const (varying i)."""
    return [(i, j) for i in range(1, lx + 1)]


# ----- builders -----


def surface_code(lx: int, ly: int) -> StabilizerCode:
    if lx < 2 or ly < 2:
        raise CodeConstructionError("surface code needs lx, ly >= 2")
    gens: List[PauliString] = []
    fams: List[str] = []
    for j in range(1, ly):
        for i in range(1, lx):
            letter = "X" if (i + j) % 2 == 0 else "Z"
            support = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)]
            gens.append(PauliString.from_sites(letter, support))
            fams.append(f"bulk_{letter.lower()}")
    # Z pairs on the two i-boundary lines; the offset keeps them on the
    # checkerboard sublattice left open by the bulk.
    for i, c in ((1, 1), (lx, lx - 1)):
        for j in range(1, ly):
            if (c + j) % 2 == 0:
                gens.append(PauliString.from_sites("Z", [(i, j), (i, j + 1)]))
                fams.append("boundary_z")
    # X pairs on the two j-boundary lines.
    for j, r in ((1, 1), (ly, ly - 1)):
        for i in range(1, lx):
            if (i + r) % 2 == 1:
                gens.append(PauliString.from_sites("X", [(i, j), (i + 1, j)]))
                fams.append("boundary_x")
    logical_z = PauliString.from_sites("Z", col_sites(lx, 1))
    logical_x = PauliString.from_sites("X", row_sites(lx, 1, ly))
    code = StabilizerCode("surface", lx, ly, tuple(gens), tuple(fams), (logical_x,), (logical_z,))
    validate_code(code)
    return code


def toric_code(lx: int, ly: int) -> StabilizerCode:
    if lx < 2 or ly < 2 or lx % 2 or ly % 2:
        raise CodeConstructionError("toric code needs even lx, ly >= 2")
    gens: List[PauliString] = []
    fams: List[str] = []
    for j in range(1, ly + 1):
        for i in range(1, lx + 1):
            letter = "X" if (i + j) % 2 == 0 else "Z"
            ii = i % lx + 1
            jj = j % ly + 1
            support = {(i, j), (ii, j), (i, jj), (ii, jj)}
            gens.append(PauliString.from_sites(letter, sorted(support)))
            fams.append(f"toric_{letter.lower()}")
    lx1 = PauliString.from_sites("X", row_sites(lx, 1, ly))
    lz1 = PauliString.from_sites("Z", col_sites(lx, 1))
    lx2 = PauliString.from_sites("Z", row_sites(lx, 1, ly))
    lz2 = PauliString.from_sites("X", col_sites(lx, 1))
    code = StabilizerCode("toric", lx, ly, tuple(gens), tuple(fams), (lx1, lx2), (lz1, lz2))
    validate_code(code)
    return code


def build_code(kind: str, lx: int, ly: int) -> StabilizerCode:
    if kind == "surface":
        return surface_code(lx, ly)
    if kind == "toric":
        return toric_code(lx, ly)
    raise CodeConstructionError(f"unknown code kind {kind!r}")


# ----- GF(2) linear algebra on bitmasks -----


def _bitmask(p: PauliString, code: StabilizerCode) -> int:
    vec = symplectic_vector(p, code.sites)
    mask = 0
    for bit, v in enumerate(vec):
        if v:
            mask |= 1 << bit
    return mask


def gf2_rank(masks: Iterable[int]) -> int:
    pivots: List[int] = []
    for m in masks:
        for p in pivots:
            m = min(m, m ^ p)
        if m:
            pivots.append(m)
            pivots.sort(reverse=True)
    return len(pivots)


def gf2_solve(masks: Sequence[int], target: int) -> Optional[List[int]]:
    """Subset of indices whose XOR is target, or None."""
    pivots: List[Tuple[int, int]] = []  # (mask, combo-bitset over input indices)
    for idx, m in enumerate(masks):
        combo = 1 << idx
        for pm, pc in pivots:
            if m ^ pm < m:
                m ^= pm
                combo ^= pc
        if m:
            pivots.append((m, combo))
            pivots.sort(reverse=True)
    combo = 0
    for pm, pc in pivots:
        if target ^ pm < target:
            target ^= pm
            combo ^= pc
    if target:
        return None
    return [k for k in range(len(masks)) if combo >> k & 1]


def in_stabilizer_group(code: StabilizerCode, p: PauliString) -> bool:
    """True iff p, sign included, is a product of the code's generators."""
    if not p.is_hermitian:
        return False
    subset = gf2_solve([_bitmask(g, code) for g in code.generators], _bitmask(p, code))
    if subset is None:
        return False
    prod = PauliString.identity()
    for k in subset:
        prod = prod * code.generators[k]
    return prod == p


# ----- validation and description -----


def validate_code(code: StabilizerCode) -> int:
    """Check group structure; returns the GF(2) rank of the generators."""
    for g, fam in zip(code.generators, code.families):
        if g.phase_power != 0:
            raise CodeConstructionError(f"{fam} generator has phase {g.phase}")
    n = len(code.generators)
    for a in range(n):
        for b in range(a + 1, n):
            if not code.generators[a].commutes_with(code.generators[b]):
                raise CodeConstructionError(
                    f"generators {a} and {b} anticommute: "
                    f"{code.generators[a]} vs {code.generators[b]}"
                )
    for label, ops in (("X", code.logical_x), ("Z", code.logical_z)):
        for k, op in enumerate(ops):
            for g in code.generators:
                if not op.commutes_with(g):
                    raise CodeConstructionError(f"logical {label}{k+1} anticommutes with a generator")
    for a, xa in enumerate(code.logical_x):
        for b, zb in enumerate(code.logical_z):
            want_anti = a == b
            if xa.commutes_with(zb) == want_anti:
                raise CodeConstructionError(f"logical pairing broken at X{a+1}, Z{b+1}")
    rank = gf2_rank([_bitmask(g, code) for g in code.generators])
    if rank != code.n_qubits - code.n_logical:
        raise CodeConstructionError(
            f"rank {rank} inconsistent with {code.n_qubits} qubits and "
            f"{code.n_logical} logical pairs"
        )
    return rank


def describe(code: StabilizerCode) -> str:
    """Plain-text dump: one generator per line plus the logical operators."""

    def format_pauli_body(p: PauliString) -> str:
        # qubit-index order (i varies fastest), not tuple-lexicographic
        terms = sorted(p.terms, key=lambda t: (t[0][1], t[0][0]))
        return " ".join(f"{l}@({s[0]},{s[1]})" for s, l in terms)

    lines = [
        f"code: {code.kind} {code.lx}x{code.ly} ({code.boundary})",
        f"qubits: {code.n_qubits}",
        f"generators: {len(code.generators)} (rank {gf2_rank([_bitmask(g, code) for g in code.generators])})",
        f"logical_qubits: {code.n_logical}",
    ]
    for k, (g, fam) in enumerate(zip(code.generators, code.families), start=1):
        lines.append(f"S{k} [{fam}] {format_pauli_body(g)}")
    for k, op in enumerate(code.logical_x, start=1):
        lines.append(f"LX{k} {format_pauli_body(op)}")
    for k, op in enumerate(code.logical_z, start=1):
        lines.append(f"LZ{k} {format_pauli_body(op)}")
    return "\n".join(lines)
