"""Parameter sampling, ideal points, splitting, relative phases."""

import math

import numpy as np
import pytest

from fdtc.lattice import surface_code, toric_code
from fdtc.model import (
    DisorderSpec,
    DriveParameters,
    FamilySpec,
    ModelInstance,
    Regime,
    apply_period,
    apply_tilde,
    derive_subseed,
    ideal_parameters,
    ideal_unitary,
    instance_unitary,
    mix64,
    relative_phase,
    sample_instance,
    split_ideal,
)
from fdtc.states import expectation, zero_state

PI = math.pi


def fig_like_spec(line=0.45 * PI, bulk=0.95 * PI, dh=0.005 * PI, j=0.3, dj=0.5):
    return DisorderSpec(
        h_x_row1=FamilySpec(line, dh),
        h_x_bulk=FamilySpec(bulk, dh),
        h_z_col1=FamilySpec(line, dh),
        h_z_bulk=FamilySpec(bulk, dh),
        j_bulk=FamilySpec(j, dj),
        j_boundary_x=FamilySpec(j, dj),
        j_boundary_z=FamilySpec(j, dj),
    )


def uniform_offset_instance(code, delta, coupling=0.3, regime=Regime.DTC2T):
    ideal = ideal_parameters(code, regime, coupling)
    params = DriveParameters(
        {s: v + delta for s, v in ideal.h_x.items()},
        {s: v + delta for s, v in ideal.h_z.items()},
        ideal.couplings,
    )
    return ModelInstance(code, params, seed=0)


# ----- seeding -----


def test_mix64_matches_published_vectors():
    # splitmix64 outputs for seed 0 are finalize(k * golden), k = 1, 2, 3
    g = 0x9E3779B97F4A7C15
    assert mix64(g) == 0xE220A8397B1DCDAF
    assert mix64((2 * g) & (2**64 - 1)) == 0x6E789E6AA1B965F4
    assert mix64((3 * g) & (2**64 - 1)) == 0x06C45D188009454F


def test_derive_subseed_frozen():
    assert derive_subseed(12345, 0) == 0x22118258A9D111A0
    assert derive_subseed(12345, 1) == 0x346EDCE5F713F8ED
    assert derive_subseed(12345, 0, stream=1) == 0x0E729C39BD12CB7C


def test_subseeds_distinct_across_streams_and_indices():
    seen = {derive_subseed(7, i, stream=s) for i in range(50) for s in range(3)}
    assert len(seen) == 150


# ----- sampling -----


def test_zero_width_sampling_hits_means():
    code = surface_code(2, 3)
    spec = fig_like_spec(dh=0.0, dj=0.0)
    inst = sample_instance(code, spec, seed=9)
    assert all(v == pytest.approx(0.45 * PI) for s, v in inst.params.h_x.items() if s[0] == 1)
    assert all(v == pytest.approx(0.95 * PI) for s, v in inst.params.h_x.items() if s[0] != 1)
    assert all(v == pytest.approx(0.45 * PI) for s, v in inst.params.h_z.items() if s[1] == 1)
    assert all(v == pytest.approx(0.95 * PI) for s, v in inst.params.h_z.items() if s[1] != 1)
    assert all(j == pytest.approx(0.3) for j in inst.params.couplings)


def test_sampling_stays_inside_windows():
    code = surface_code(3, 3)
    spec = fig_like_spec()
    for r in range(25):
        inst = sample_instance(code, spec, derive_subseed(2024, r))
        for s, v in inst.params.h_x.items():
            mean = 0.45 * PI if s[0] == 1 else 0.95 * PI
            assert abs(v - mean) <= 0.005 * PI
        for s, v in inst.params.h_z.items():
            mean = 0.45 * PI if s[1] == 1 else 0.95 * PI
            assert abs(v - mean) <= 0.005 * PI
        for j in inst.params.couplings:
            assert abs(j - 0.3) <= 0.5


def test_sampling_deterministic():
    code = surface_code(2, 2)
    spec = fig_like_spec()
    a = sample_instance(code, spec, seed=77)
    b = sample_instance(code, spec, seed=77)
    assert a.params == b.params
    c = sample_instance(code, spec, seed=78)
    assert c.params != a.params


def test_params_validate_for_code():
    code = surface_code(2, 2)
    params = ideal_parameters(code, Regime.DTC2T)
    params.validate_for(code)
    with pytest.raises(ValueError):
        DriveParameters(params.h_x, params.h_z, params.couplings[:-1]).validate_for(code)


# ----- ideal points -----


def test_ideal_parameters_dtc():
    code = surface_code(3, 3)
    p = ideal_parameters(code, Regime.DTC2T)
    for (i, j), v in p.h_z.items():
        assert v == (PI / 2 if j == 1 else 0.0)
    for (i, j), v in p.h_x.items():
        assert v == (PI / 2 if i == 1 else 0.0)


def test_ideal_parameters_cnot():
    code = toric_code(2, 4)
    p = ideal_parameters(code, Regime.CNOT4T)
    assert all(v == PI / 4 for v in p.h_z.values())
    for (i, j), v in p.h_x.items():
        assert v == (PI / 2 if i == 1 else 0.0)
    with pytest.raises(ValueError):
        ideal_parameters(surface_code(2, 2), Regime.CNOT4T)


def test_ideal_dynamics_alternates_exactly():
    code = surface_code(2, 2)
    inst = ModelInstance(code, ideal_parameters(code, Regime.DTC2T), 0)
    zbar = code.logical_z[0]
    psi = zero_state(code.n_qubits)
    for n in range(1, 7):
        psi = apply_period(inst, psi)
        got = expectation(zbar, psi, code.sites).real
        assert got == pytest.approx((-1.0) ** n, abs=1e-10)


def test_apply_period_matches_unitary():
    code = surface_code(2, 3)
    inst = sample_instance(code, fig_like_spec(), seed=5)
    u = instance_unitary(inst)
    rng = np.random.default_rng(6)
    psi = rng.normal(size=64) + 1j * rng.normal(size=64)
    psi /= np.linalg.norm(psi)
    assert np.allclose(apply_period(inst, psi), u @ psi, atol=1e-10)


# ----- splitting -----


def test_split_at_ideal_is_identity():
    code = surface_code(2, 2)
    inst = ModelInstance(code, ideal_parameters(code, Regime.DTC2T), 0)
    split = split_ideal(inst, Regime.DTC2T)
    assert split.epsilon == 0.0
    assert all(v == 0.0 for v in split.delta_x.values())
    assert all(v == 0.0 for v in split.delta_z_tilde.values())


def _tilde_matrix(split, code):
    dim = 2 ** code.n_qubits
    cols = [apply_tilde(split, code, col.astype(complex)) for col in np.eye(dim)]
    return np.column_stack(cols)


@pytest.mark.parametrize("regime", [Regime.DTC2T, Regime.CNOT4T])
def test_split_reconstruction_exact(regime):
    code = toric_code(2, 2) if regime is Regime.CNOT4T else surface_code(2, 2)
    inst = sample_instance(code, fig_like_spec(), seed=31)
    split = split_ideal(inst, regime)
    u_t = instance_unitary(inst)
    u_id = ideal_unitary(code, regime, inst.params.couplings)
    recon = _tilde_matrix(split, code) @ u_id
    assert np.max(np.abs(recon - u_t)) < 1e-10


def test_split_flips_z_deviation_on_x_line():
    code = surface_code(2, 2)
    inst = uniform_offset_instance(code, 0.02)
    split = split_ideal(inst, Regime.DTC2T)
    for (i, j), v in split.delta_z_tilde.items():
        assert v == pytest.approx(-0.02 if i == 1 else 0.02)


# ----- relative phases -----


def test_xi_zbar_ideal_point():
    code = surface_code(2, 2)
    inst = ModelInstance(code, ideal_parameters(code, Regime.DTC2T), 0)
    out = relative_phase(inst, "xi_zbar")
    assert out.defined
    assert out.value == pytest.approx(PI, abs=1e-12)
    assert out.deviation == pytest.approx(0.0, abs=1e-12)
    assert out.epsilon == 0.0


def test_xi_xbar_ideal_point():
    code = surface_code(2, 2)
    inst = ModelInstance(code, ideal_parameters(code, Regime.DTC2T), 0)
    out = relative_phase(inst, "xi_xbar")
    assert out.defined
    assert out.value == pytest.approx(PI, abs=1e-12)


def test_xi_zbar2_ideal_point():
    code = toric_code(2, 2)
    inst = ModelInstance(code, ideal_parameters(code, Regime.CNOT4T), 0)
    out = relative_phase(inst, "xi_zbar2")
    assert out.defined
    assert out.value == pytest.approx(PI / 2, abs=1e-10)
    assert out.deviation == pytest.approx(0.0, abs=1e-10)


def test_xi_zbar_deviation_shrinks_with_ly():
    delta = 0.02 * PI
    devs = {}
    for ly in (2, 3, 4):
        inst = uniform_offset_instance(surface_code(2, ly), delta)
        out = relative_phase(inst, "xi_zbar")
        assert out.defined
        devs[ly] = out.deviation
    assert devs[4] < devs[3] < devs[2]
    assert devs[2] < 0.2  # still a perturbation, not order one


def test_xi_zbar2_deviation_small_near_ideal():
    delta = 0.02 * PI
    devs = {}
    for ly in (2, 4):
        inst = uniform_offset_instance(toric_code(2, ly), delta, regime=Regime.CNOT4T)
        out = relative_phase(inst, "xi_zbar2")
        assert out.defined
        devs[ly] = out.deviation
    assert devs[4] < 0.1 * devs[2]  # wider torus suppresses the deviation
    assert devs[2] < 0.2


def test_xi_rejects_multi_logical_codes():
    code = toric_code(2, 2)
    inst = ModelInstance(code, ideal_parameters(code, Regime.DTC2T), 0)
    with pytest.raises(ValueError):
        relative_phase(inst, "xi_zbar")
    with pytest.raises(ValueError):
        relative_phase(inst, "nope")
