import dataclasses

import numpy as np
import pytest

from h2contain import h2_norm
from h2contain.errors import (
    BoundExceedsGamma,
    CertificateFailed,
    CpOutOfRange,
    InvalidSpectrum,
    RegularityViolation,
)
from h2contain.graph import build_graph, laplacian_partition
from h2contain.homog import (
    AgentModel,
    assemble_error_system,
    check_regularity,
    cp_case,
    default_cp,
    design_homogeneous,
    modal_closed_loop,
    verify_homog_certificate,
)
from h2contain.matcore import is_hurwitz
from support import random_homog_design, random_homog_model, random_valid_graph


def _diagnostic_gains(gains, **overrides):
    return dataclasses.replace(gains, **overrides)


# ---------------------------------------------------------------------------
# regularity
# ---------------------------------------------------------------------------

def test_regularity_golden_strict(homog_model):
    deviations = check_regularity(homog_model.plant, strict_identity=True)
    assert max(deviations.values()) <= 1e-10


def test_regularity_rejects_zero_d1(homog_model):
    plant = homog_model.plant
    bad = AgentModel(A=plant.A, B=plant.B, C1=plant.C1, C2=plant.C2,
                     D1=np.zeros_like(plant.D1), D2=plant.D2, E=plant.E)
    with pytest.raises(RegularityViolation):
        check_regularity(bad, strict_identity=False)


def test_regularity_rejects_coupled_feedthrough(homog_model):
    plant = homog_model.plant
    d2 = plant.D2.copy()
    bad_c2 = plant.C2.copy()
    bad_c2[2, 0] = 0.1  # makes D2' C2 = [0.1 0 0]
    bad = AgentModel(A=plant.A, B=plant.B, C1=plant.C1, C2=bad_c2,
                     D1=plant.D1, D2=d2, E=plant.E)
    with pytest.raises(RegularityViolation):
        check_regularity(bad)


# ---------------------------------------------------------------------------
# coupling parameter
# ---------------------------------------------------------------------------

def test_default_cp_values(homog_model):
    assert default_cp(1.0, 1.0) == pytest.approx(0.5)
    assert default_cp(1.0, 2.0) == pytest.approx(2.0 / 15.0)
    part = homog_model.partition
    assert abs(default_cp(part.lambda1, part.lambdaM) - 0.0089) <= 5e-5


def test_default_cp_rejects_bad_spectrum():
    with pytest.raises(InvalidSpectrum):
        default_cp(2.0, 1.0)
    with pytest.raises(InvalidSpectrum):
        default_cp(0.0, 1.0)


def test_cp_case_boundaries(homog_model):
    part = homog_model.partition
    star = default_cp(part.lambda1, part.lambdaM)
    assert cp_case(star, part.lambda1, part.lambdaM) == "case-2"
    assert cp_case(0.4, 1.0, 1.0) == "case-1"
    assert cp_case(2.0 / part.lambdaM ** 3, part.lambda1, part.lambdaM) == "out-of-range"
    assert cp_case(0.0, 1.0, 1.0) == "out-of-range"


# ---------------------------------------------------------------------------
# design goldens
# ---------------------------------------------------------------------------

def test_design_golden_gains(homog_gains):
    assert np.allclose(homog_gains.F.ravel(), [-0.9439, -0.7750, -0.6738], atol=5e-3)
    assert np.allclose(homog_gains.G.ravel(), [-0.0502, -0.3429, -0.0337], atol=5e-3)
    assert abs(homog_gains.bound - 288.2621) <= 0.5
    assert homog_gains.bound < 289.0
    assert homog_gains.accepted
    assert homog_gains.case == "case-2"


def test_design_rejects_small_gamma(homog_model):
    gains = design_homogeneous(homog_model.plant, homog_model.partition, gamma=100.0)
    assert not gains.accepted
    assert abs(gains.bound - 288.2621) <= 0.5
    with pytest.raises(BoundExceedsGamma):
        gains.require_accepted()


def test_design_rejects_out_of_range_cp(homog_model):
    part = homog_model.partition
    with pytest.raises(CpOutOfRange):
        design_homogeneous(homog_model.plant, part, gamma=289.0,
                           c_p=2.0 / part.lambdaM ** 3)


def test_gain_coupling_identities(homog_gains, homog_model):
    plant = homog_model.plant
    assert np.allclose(homog_gains.F, -homog_gains.c_p * plant.B.T @ homog_gains.P,
                       atol=1e-12)
    assert np.allclose(homog_gains.G, -homog_gains.Q @ plant.C1.T, atol=1e-12)


def test_bound_recompute(homog_gains, homog_model):
    plant = homog_model.plant
    part = homog_model.partition
    q, p = homog_gains.Q, homog_gains.P
    bound = part.num_followers * (
        np.trace(plant.C1 @ q @ p @ q @ plant.C1.T)
        + part.lambdaM ** 4 * np.trace(plant.C2 @ q @ plant.C2.T)
    )
    assert abs(bound - homog_gains.bound) <= 1e-10 * (1 + abs(bound))


def test_bound_monotone_in_perturbations(homog_model):
    plant, part = homog_model.plant, homog_model.partition
    loose = design_homogeneous(plant, part, gamma=289.0, delta=0.01, eta=0.01)
    tight = design_homogeneous(plant, part, gamma=289.0, delta=0.001, eta=0.001)
    assert tight.bound <= loose.bound + 1e-9


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------

def test_assembled_golden_system(homog_clp):
    assert homog_clp.state_dim == 36
    assert homog_clp.E.shape == (36, 18)
    assert homog_clp.C.shape == (18, 36)
    assert is_hurwitz(homog_clp.A)


def test_assembly_zero_gains_structure(homog_model, homog_gains):
    plant, part = homog_model.plant, homog_model.partition
    zero = _diagnostic_gains(homog_gains,
                             F=np.zeros_like(homog_gains.F),
                             G=np.zeros_like(homog_gains.G))
    clp = assemble_error_system(plant, part, zero)
    m = part.num_followers
    want = np.kron(np.eye(2 * m), plant.A)
    assert np.array_equal(clp.A, want)


def test_assembly_single_follower_reduction(homog_model, homog_gains):
    plant = homog_model.plant
    part = laplacian_partition(build_graph(1, 1, [(2, 1)]))
    assert np.array_equal(part.L1, [[1.0]])
    clp = assemble_error_system(plant, part, homog_gains)
    bf = plant.B @ homog_gains.F
    gc1 = homog_gains.G @ plant.C1
    want_a = np.block([[plant.A, bf], [-gc1, plant.A + gc1 + bf]])
    want_e = np.vstack([plant.E, -homog_gains.G @ plant.D1])
    want_c = np.hstack([plant.C2, plant.D2 @ homog_gains.F])
    assert np.allclose(clp.A, want_a, atol=1e-14)
    assert np.allclose(clp.E, want_e, atol=1e-14)
    assert np.allclose(clp.C, want_c, atol=1e-14)


# ---------------------------------------------------------------------------
# certificate
# ---------------------------------------------------------------------------

def test_certificate_golden_passes(homog_model, homog_gains):
    report = verify_homog_certificate(homog_model.plant, homog_model.partition,
                                      homog_gains)
    assert report.ok


def test_certificate_fails_without_feedback(homog_model, homog_gains):
    zero_f = _diagnostic_gains(homog_gains, F=np.zeros_like(homog_gains.F))
    with pytest.raises(CertificateFailed) as err:
        verify_homog_certificate(homog_model.plant, homog_model.partition, zero_f)
    assert any("stability" in c.name for c in err.value.report.failures())


def test_certificate_fails_on_tight_gamma(homog_model, homog_gains):
    with pytest.raises(CertificateFailed) as err:
        verify_homog_certificate(homog_model.plant, homog_model.partition,
                                 homog_gains, gamma=100.0)
    assert any(c.name == "trace_sum" for c in err.value.report.failures())


# ---------------------------------------------------------------------------
# structural properties on random systems
# ---------------------------------------------------------------------------

def test_stability_equivalence_random_gains():
    rng = np.random.default_rng(29)
    checked = 0
    while checked < 25:
        model = random_homog_model(rng)
        part = laplacian_partition(random_valid_graph(rng, max_followers=5))
        scale = rng.uniform(0.2, 2.0)
        gains = design_homogeneous(model, part, gamma=1e12)
        gains = _diagnostic_gains(
            gains,
            F=scale * rng.normal(size=gains.F.shape),
            G=scale * rng.normal(size=gains.G.shape),
        )
        modal = [model.A + lam * model.B @ gains.F for lam in part.eigenvalues]
        modal.append(model.A + gains.G @ model.C1)
        margins = [np.max(np.linalg.eigvals(m).real) for m in modal]
        clp = assemble_error_system(model, part, gains)
        network_margin = np.max(np.linalg.eigvals(clp.A).real)
        if min(abs(v) for v in margins) < 1e-6 or abs(network_margin) < 1e-6:
            continue  # too close to the boundary to trust a boolean
        assert (network_margin < 0) == all(v < 0 for v in margins)
        checked += 1


def test_accepted_designs_decompose_and_bound_cost():
    rng = np.random.default_rng(31)
    for _ in range(8):
        model, part, gains = random_homog_design(rng)
        clp = assemble_error_system(model, part, gains)
        assert is_hurwitz(clp.A)
        for lam in part.eigenvalues:
            assert is_hurwitz(model.A + lam * model.B @ gains.F)
        assert is_hurwitz(model.A + gains.G @ model.C1)

        network_cost = h2_norm(clp).cost
        modal_costs = sum(
            h2_norm(modal_closed_loop(model, gains, lam, part.lambda1)).cost
            for lam in part.eigenvalues
        )
        assert modal_costs - network_cost >= -1e-8
        assert np.sqrt(network_cost) <= np.sqrt(gains.gamma) + 1e-12
