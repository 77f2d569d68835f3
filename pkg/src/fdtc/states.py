"""Dense statevector and unitary kernels for up to ~14 qubits.

Qubit q (the q-th entry of ``code.sites``) owns bit q of the basis index,
least significant first, so |0...0> is index 0. Pauli action never builds a
matrix: a string is two bitmasks plus a phase, applied as one permutation
with signs. Full Floquet unitaries are built by streaming the same kernels
over the columns of an identity, which keeps everything at O(D^2) per layer.
"""

from __future__ import annotations

import math
import os
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

import numpy as np
import scipy.linalg

from .lattice import StabilizerCode
from .pauli import PauliString

DEFAULT_MAX_QUBITS = 14
_DEGENERACY_GAP = 1e-10
_UNITARITY_TOL = 1e-9
_SECTOR_PRUNE = 1e-12


class ResourceLimitError(Exception):
    """Problem size above the dense-simulation qubit budget."""


class NumericsError(Exception):
    """A numerical invariant (unitarity, normalization) failed."""


def max_qubits() -> int:
    raw = os.environ.get("FDTC_MAX_QUBITS")
    if raw is None:
        return DEFAULT_MAX_QUBITS
    try:
        return int(raw)
    except ValueError:
        raise ResourceLimitError(f"FDTC_MAX_QUBITS={raw!r} is not an integer")


def check_qubit_budget(n: int) -> None:
    cap = max_qubits()
    if n > cap:
        raise ResourceLimitError(
            f"{n} qubits exceeds the cap of {cap}; raise FDTC_MAX_QUBITS to override"
        )


# ----- compiled Pauli kernels -----


@lru_cache(maxsize=4096)
def _compiled(terms: tuple, phase_power: int, sites: tuple):
    index = {s: q for q, s in enumerate(sites)}
    xy = 0
    zy = 0
    n_y = 0
    for site, letter in terms:
        q = index[site]
        if letter in ("X", "Y"):
            xy |= 1 << q
        if letter in ("Z", "Y"):
            zy |= 1 << q
        if letter == "Y":
            n_y += 1
    phase = 1j ** ((phase_power + n_y) % 4)
    return xy, zy, phase


def _coefs(p: PauliString, sites: tuple, dim: int) -> Tuple[int, np.ndarray]:
    """Flip mask plus the per-basis-state amplitude factor of P."""
    xy, zy, phase = _compiled(p.terms, p.phase_power, sites)
    idx = np.arange(dim, dtype=np.uint64)
    signs = 1.0 - 2.0 * (np.bitwise_count(idx & np.uint64(zy)) & 1).astype(np.float64)
    return xy, phase * signs


def apply_pauli(p: PauliString, psi: np.ndarray, sites: Sequence) -> np.ndarray:
    xy, coefs = _coefs(p, tuple(sites), psi.shape[0])
    out = np.empty_like(psi)
    idx = np.arange(psi.shape[0])
    out[idx ^ xy] = coefs * psi
    return out


def apply_pauli_to_matrix(p: PauliString, m: np.ndarray, sites: Sequence) -> np.ndarray:
    """P @ m by permuting and rescaling rows."""
    xy, coefs = _coefs(p, tuple(sites), m.shape[0])
    out = np.empty_like(m)
    idx = np.arange(m.shape[0])
    out[idx ^ xy] = coefs[:, None] * m
    return out


def apply_rotation(theta: float, p: PauliString, psi: np.ndarray, sites: Sequence) -> np.ndarray:
    """exp(-i theta P) |psi>; P must square to +1 (Hermitian string)."""
    if not p.is_hermitian:
        raise ValueError("rotation axis must be Hermitian")
    return math.cos(theta) * psi - 1j * math.sin(theta) * apply_pauli(p, psi, sites)


def apply_rotation_to_matrix(theta: float, p: PauliString, m: np.ndarray, sites: Sequence) -> np.ndarray:
    if not p.is_hermitian:
        raise ValueError("rotation axis must be Hermitian")
    return math.cos(theta) * m - 1j * math.sin(theta) * apply_pauli_to_matrix(p, m, sites)


def pauli_matrix(p: PauliString, sites: Sequence) -> np.ndarray:
    dim = 1 << len(sites)
    return apply_pauli_to_matrix(p, np.eye(dim, dtype=complex), sites)


def expectation(p: PauliString, psi: np.ndarray, sites: Sequence) -> complex:
    return complex(np.vdot(psi, apply_pauli(p, psi, sites)))


# ----- states -----


def zero_state(n: int) -> np.ndarray:
    check_qubit_budget(n)
    psi = np.zeros(1 << n, dtype=complex)
    psi[0] = 1.0
    return psi


def plus_y_product_state(code: StabilizerCode) -> np.ndarray:
    """Product of single-site Y = +1 states, exp(+i pi/4 X) |0> per site."""
    psi = zero_state(code.n_qubits)
    sites = code.sites
    for s in sites:
        psi = apply_rotation(-math.pi / 4, PauliString.single(s, "X"), psi, sites)
    return psi


def project_stabilizer(g: PauliString, psi: np.ndarray, sites: Sequence) -> np.ndarray:
    """(1 + g)/2 |psi>, unnormalized."""
    return 0.5 * (psi + apply_pauli(g, psi, sites))


def codespace_projection(code: StabilizerCode, psi: np.ndarray) -> np.ndarray:
    for g in code.generators:
        psi = project_stabilizer(g, psi, code.sites)
    return psi


def normalize(psi: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(psi)
    if n < 1e-12:
        raise NumericsError("state has vanishing norm after projection")
    return psi / n


def logical_basis_states(code: StabilizerCode) -> Dict[str, np.ndarray]:
    """Codewords in the all-Z=+1 logical frame, keyed by bitstring label.

    Surface: '0' and '1'. Toric: '00', '10', '01', '11'; the bare stabilizer
    projection of |0...0> is an eigenstate of the second logical X (a Z
    string), so the second logical Z gets projected explicitly.
    """
    sites = code.sites
    base = codespace_projection(code, zero_state(code.n_qubits))
    if code.n_logical == 1:
        zero = normalize(base)
        one = apply_pauli(code.logical_x[0], zero, sites)
        return {"0": zero, "1": one}
    if code.n_logical == 2:
        z2 = code.logical_z[1]
        base = normalize(0.5 * (base + apply_pauli(z2, base, sites)))
        out = {"00": base}
        out["10"] = apply_pauli(code.logical_x[0], base, sites)
        out["01"] = apply_pauli(code.logical_x[1], base, sites)
        out["11"] = apply_pauli(
            code.logical_x[1], apply_pauli(code.logical_x[0], base, sites), sites
        )
        return out
    raise ValueError(f"unsupported logical count {code.n_logical}")


# ----- Floquet unitary -----


def floquet_unitary(
    code: StabilizerCode,
    h_x: Mapping[Tuple[int, int], float],
    h_z: Mapping[Tuple[int, int], float],
    couplings: Sequence[float],
) -> np.ndarray:
    """One period: stabilizer layer, then Z fields, then X fields.

    Returns U = exp(-i sum h_x X) exp(-i sum h_z Z) exp(-i sum J S); the
    rightmost factor acts first on kets, so the matrix is accumulated in
    that order starting from the identity.
    """
    n = code.n_qubits
    check_qubit_budget(n)
    sites = code.sites
    m = np.eye(1 << n, dtype=complex)
    for g, j in zip(code.generators, couplings):
        m = apply_rotation_to_matrix(j, g, m, sites)
    for site in sites:
        theta = h_z.get(site, 0.0)
        if theta:
            m = apply_rotation_to_matrix(theta, PauliString.single(site, "Z"), m, sites)
    for site in sites:
        theta = h_x.get(site, 0.0)
        if theta:
            m = apply_rotation_to_matrix(theta, PauliString.single(site, "X"), m, sites)
    return m


def evolve_within_period(
    code: StabilizerCode,
    h_x: Mapping[Tuple[int, int], float],
    h_z: Mapping[Tuple[int, int], float],
    couplings: Sequence[float],
    psi: np.ndarray,
    t: float,
    period: float = 1.0,
) -> np.ndarray:
    """State at intra-period time t in [0, T]: three equal subintervals.

    Each layer's generators run at three times their nominal strength for a
    third of the period, so the full-period product matches the stroboscopic
    unitary exactly.
    """
    if not 0.0 <= t <= period + 1e-12:
        raise ValueError(f"t={t} outside [0, {period}]")
    third = period / 3.0
    tau1 = min(t, third)
    tau2 = min(max(t - third, 0.0), third)
    tau3 = max(t - 2.0 * third, 0.0)
    sites = code.sites
    if tau1 > 0:
        for g, j in zip(code.generators, couplings):
            psi = apply_rotation(3.0 * j * tau1 / period, g, psi, sites)
    if tau2 > 0:
        for site in sites:
            theta = h_z.get(site, 0.0)
            if theta:
                psi = apply_rotation(3.0 * theta * tau2 / period, PauliString.single(site, "Z"), psi, sites)
    if tau3 > 0:
        for site in sites:
            theta = h_x.get(site, 0.0)
            if theta:
                psi = apply_rotation(3.0 * theta * tau3 / period, PauliString.single(site, "X"), psi, sites)
    return psi


# ----- spectrum -----


def fold_quasienergy(eps, period: float = 1.0):
    """Wrap into the Floquet zone (-pi/T, pi/T]."""
    zone = 2.0 * math.pi / period
    out = np.mod(np.asarray(eps, dtype=float) + zone / 2.0, zone) - zone / 2.0
    out = np.where(np.isclose(out, -zone / 2.0), zone / 2.0, out)
    return out if out.ndim else float(out)


def diagonalize(u: np.ndarray, period: float = 1.0) -> Tuple[np.ndarray, np.ndarray]:
    """Quasienergies (ascending, in (-pi/T, pi/T]) and eigenvector columns.

    Uses a complex Schur decomposition so the returned basis is exactly
    orthonormal even across degeneracies; degenerate clusters are re-mixed
    by QR to scrub the tiny Schur couplings. Raises NumericsError if u is
    not unitary to 1e-9.
    """
    dim = u.shape[0]
    defect = np.max(np.abs(u.conj().T @ u - np.eye(dim)))
    if defect > _UNITARITY_TOL:
        raise NumericsError(f"matrix is not unitary (defect {defect:.2e})")
    t, q = scipy.linalg.schur(u, output="complex")
    lam = np.diag(t)
    eps = -np.angle(lam)
    eps = np.where(np.isclose(eps, -math.pi), math.pi, eps) * (1.0 / period)
    order = np.argsort(eps, kind="stable")
    eps = eps[order]
    vecs = q[:, order]
    # re-orthonormalize inside degenerate clusters
    start = 0
    while start < dim:
        stop = start + 1
        while stop < dim and eps[stop] - eps[stop - 1] < _DEGENERACY_GAP:
            stop += 1
        if stop - start > 1:
            block, _ = np.linalg.qr(vecs[:, start:stop])
            vecs[:, start:stop] = block
        start = stop
    return eps, vecs


# ----- stabilizer sector decomposition -----


def sector_decompose(code: StabilizerCode, psi: np.ndarray) -> List[Tuple[Tuple[int, ...], float]]:
    """Resolve |psi> into joint stabilizer eigensectors.

    Returns [(signs, weight)] where signs[k] is the eigenvalue of generator
    k and weight is the squared norm of the component; branches below 1e-12
    are pruned. Weights sum to 1 for a normalized input.
    """
    sites = code.sites
    branches: List[Tuple[Tuple[int, ...], np.ndarray]] = [((), psi)]
    for g in code.generators:
        nxt: List[Tuple[Tuple[int, ...], np.ndarray]] = []
        for signs, vec in branches:
            gv = apply_pauli(g, vec, sites)
            for sign, comp in ((1, 0.5 * (vec + gv)), (-1, 0.5 * (vec - gv))):
                w = float(np.real(np.vdot(comp, comp)))
                if w > _SECTOR_PRUNE:
                    nxt.append((signs + (sign,), comp))
        branches = nxt
    return [(signs, float(np.real(np.vdot(v, v)))) for signs, v in branches]
