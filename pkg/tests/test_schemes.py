import math

import numpy as np
import pytest

from hybrident.channels import LossSpec
from hybrident.fock import DensityOperator, ModeSpace, PureState, partial_trace
from hybrident.metrics import (block_origin_value, dv_block, entanglement_negativity, fidelity,
                               wigner_origin_negativity)
from hybrident.schemes import (HeraldError, HeraldedState, SchemeParams, balancing_mu,
                               central_r_for_mu, coincidence_counts, convert_dv_to_cv,
                               exact_scheme, ideal_hybrid_state, leading_order, measured_mu,
                               mu_from_counts, nominal_mu, perturbative_scheme, replace,
                               scheme_enhanced_perturbative, scheme_qubit_perturbative,
                               scheme_qutrit_perturbative, squeezed_g2)
from hybrident.states import cat_state, db_to_zeta, squeeze_unitary, subtracted_squeezed
from hybrident.verify import exact_vs_perturbative, infidelity_slope

Z1 = db_to_zeta(1.0)
Z3 = db_to_zeta(3.0)
Z6 = db_to_zeta(6.0)


def cv_part(h: HeraldedState) -> DensityOperator:
    return partial_trace(h.state, ["B"])


def params(zeta=Z1, theta=0.05, lam=0.05, **kw):
    return SchemeParams(zeta=zeta, tap_theta=theta, tap_theta0=theta, tmss_lambda=lam, **kw)


def test_params_validation():
    with pytest.raises(ValueError):
        SchemeParams(source="thermal")
    with pytest.raises(ValueError):
        SchemeParams(central_r=1.5)
    with pytest.raises(ValueError):
        SchemeParams(zeta=-0.1)
    with pytest.warns(UserWarning):
        params(theta=0.3).check_perturbative()


def test_qubit_exact_without_tmss():
    h = exact_scheme("qubit", params(lam=0.0), 12)
    assert abs(h.dv_populations()[0] - 1) < 1e-12
    assert entanglement_negativity(h.state) < 1e-10
    # two tap photons with one escaping through the central splitter add an O(theta^2) even part
    assert fidelity(subtracted_squeezed(1, Z1, 12), cv_part(h)) > 1 - 0.05 ** 2


def test_qubit_exact_without_tap():
    h = exact_scheme("qubit", params(theta=0.0), 12)
    assert h.dv_populations()[1] > 0.99
    assert entanglement_negativity(h.state) < 1e-10
    assert fidelity(subtracted_squeezed(0, Z1, 12), cv_part(h)) > 1 - 1e-10


def test_enhanced_exact_without_tmss():
    h = exact_scheme("enhanced", params(lam=0.0), 10)
    assert abs(h.dv_populations()[0] - 1) < 1e-12
    assert fidelity(subtracted_squeezed(2, Z1, 10), cv_part(h)) > 0.999


def test_qutrit_exact_limits():
    h = exact_scheme("qutrit", params(lam=0.0), 12)
    assert abs(h.dv_populations()[0] - 1) < 1e-12
    assert fidelity(subtracted_squeezed(2, Z1, 12), cv_part(h)) > 0.999
    h = exact_scheme("qutrit", params(theta=0.0), 12)
    assert h.dv_populations()[2] > 0.99
    assert fidelity(subtracted_squeezed(0, Z1, 12), cv_part(h)) > 1 - 1e-10


def test_exact_zero_probability():
    with pytest.raises(HeraldError):
        exact_scheme("qubit", params(theta=0.0, lam=0.0), 10)


def test_exact_truncation_guard():
    with pytest.raises(ValueError):
        exact_scheme("enhanced", params(), 8)
    with pytest.raises(MemoryError):
        exact_scheme("enhanced", params(), 40)


def test_enhanced_exact_close_to_perturbative():
    assert 1 - exact_vs_perturbative("enhanced", 0.05) > 0.995


def test_qutrit_exact_close_to_perturbative():
    assert 1 - exact_vs_perturbative("qutrit", 0.05) > 0.99


def test_qubit_exact_close_to_perturbative():
    # leading correction is the two-pair TMSS term losing a photon to the traced mode
    assert exact_vs_perturbative("qubit", 0.05) < 1.5 * 0.05 ** 2


def test_exact_infidelity_scales_quadratically():
    assert abs(infidelity_slope("qubit") - 2) < 0.2


def test_exact_reports_nominal_mu():
    for scheme in ("qubit", "enhanced", "qutrit"):
        p = params(zeta=Z3)
        target = 1.3
        p = replace(p, central_r=central_r_for_mu(target, p))
        assert abs(nominal_mu(p) - target) < 1e-10
        h = exact_scheme(scheme, p, 16)
        assert abs(h.mu - target) < 1e-10
        got = measured_mu(scheme, h.dv_populations(), p)
        assert abs(got / target - 1) < 0.01


def test_nominal_mu_formula():
    p = params(zeta=Z3, central_r=0.3)
    ref = 0.05 * 0.3 / (0.05 * math.sqrt(1 - 0.09) * math.sinh(Z3))
    assert abs(nominal_mu(p) - ref) < 1e-10


def test_herald_probability_slopes():
    def prob(scheme, eps):
        p = params(zeta=Z1, theta=eps, lam=eps, central_r=math.sqrt(0.5))
        return exact_scheme(scheme, p, 12).herald_probability

    eps = np.array([0.01, 0.02, 0.04])
    for scheme, slope in (("qubit", 2), ("qutrit", 4)):
        fit = np.polyfit(np.log(eps), np.log([prob(scheme, e) for e in eps]), 1)[0]
        assert abs(fit - slope) < 0.05
    lo = leading_order("qubit", params(zeta=Z1, theta=0.02, lam=0.02), 12).norm ** 2
    assert abs(prob("qubit", 0.02) / lo - 1) < 0.01


def test_delta_phi_tracks_phase_and_keeps_negativity():
    base = replace(params(), central_r=central_r_for_mu(1.0, params()))
    lead = leading_order("qubit", base, 12).tensor()
    ref = None
    for dphi in (math.pi, math.pi / 2, 0.3):
        h = exact_scheme("qubit", replace(base, delta_phi=dphi), 12)
        n = entanglement_negativity(h.state)
        ref = n if ref is None else ref
        assert abs(n - ref) < 1e-10
        # the <1|rho|0> block gains omega = exp(i (pi - delta_phi))
        off = dv_block(h.state, 1, 0).matrix
        num = np.vdot(lead[1], off @ lead[0])
        assert abs(num) > 0
        assert abs(np.exp(1j * np.angle(num)) - np.exp(1j * (math.pi - dphi))) < 1e-6


def test_perturbative_phase_leaves_negativity():
    a = scheme_qubit_perturbative(1.0, Z3, 20)
    b = scheme_qubit_perturbative(1.0, Z3, 20, phase=1.1)
    assert abs(entanglement_negativity(a.state) - entanglement_negativity(b.state)) < 1e-12


def test_qubit_perturbative_examples():
    h = scheme_qubit_perturbative(0.0, Z3, 20)
    assert entanglement_negativity(h.state) < 1e-12
    assert fidelity(subtracted_squeezed(1, Z3, 20), cv_part(h)) > 1 - 1e-8
    assert abs(entanglement_negativity(scheme_qubit_perturbative(1.0, Z3, 20).state) - 0.5) < 1e-6
    with pytest.raises(ValueError):
        scheme_qubit_perturbative(-1.0, Z3, 20)


def test_enhanced_perturbative_examples():
    mu = balancing_mu("enhanced", Z3)
    assert abs(entanglement_negativity(scheme_enhanced_perturbative(mu, Z3, 40).state) - 0.5) < 1e-6
    assert abs(entanglement_negativity(scheme_enhanced_perturbative(1.0, Z3, 40).state) - 0.276) < 1e-3
    assert entanglement_negativity(scheme_enhanced_perturbative(0.0, Z3, 40).state) < 1e-12
    with pytest.raises(ValueError):
        scheme_enhanced_perturbative(1.0, 0.0, 20)


def test_qutrit_perturbative_examples():
    h = scheme_qutrit_perturbative(balancing_mu("qutrit", Z6), Z6, 60)
    assert abs(entanglement_negativity(h.state) - 0.82) < 5e-3
    zero = scheme_qutrit_perturbative(0.0, Z3, 30)
    assert entanglement_negativity(zero.state) < 1e-12
    assert abs(zero.dv_populations()[0] - 1) < 1e-12
    c = 1 / (math.sqrt(2) * math.tanh(Z3))
    s = squeeze_unitary(Z3, 30)
    ref = PureState(ModeSpace((30,), ("B",)), (c * s[:, 0] + s[:, 2]) / math.sqrt(1 + c * c))
    assert fidelity(ref, cv_part(zero)) > 1 - 1e-10
    with pytest.raises(ValueError):
        scheme_qutrit_perturbative(1.0, 0.0, 20)
    with pytest.raises(ValueError):
        scheme_qutrit_perturbative(1.0, Z3, 20, dv_dim=2)


def test_qutrit_blocks_are_subtracted_states():
    h = scheme_qutrit_perturbative(1.1, Z3, 40)
    for k, n in ((0, 2), (1, 1), (2, 0)):
        blk = dv_block(h.state, k, k).matrix
        blk = blk / np.trace(blk)
        ket = subtracted_squeezed(n, Z3, 40).amplitudes
        assert abs(np.vdot(ket, blk @ ket).real - 1) < 1e-10


def test_qutrit_dv_support():
    h = scheme_qutrit_perturbative(1.0, Z3, 30, dv_dim=5, loss=LossSpec(0.7, 0.8))
    assert np.max(h.dv_populations()[3:]) < 1e-14


def test_balanced_schemes_maximize_negativity():
    for scheme, z, dim in (("enhanced", Z3, 40), ("qutrit", Z6, 60)):
        best = balancing_mu(scheme, z)
        nb = entanglement_negativity(perturbative_scheme(scheme, best, z, dim).state)
        for f in (0.7, 0.9, 1.1, 1.4):
            n = entanglement_negativity(perturbative_scheme(scheme, f * best, z, dim).state)
            assert n < nb
    for eta in (0.6, 0.9):
        loss = LossSpec(eta, eta)
        nb = entanglement_negativity(scheme_qubit_perturbative(1.0, 1e-3, 12, loss=loss).state)
        for mu in (0.6, 0.9, 1.1, 1.6):
            assert entanglement_negativity(scheme_qubit_perturbative(mu, 1e-3, 12, loss=loss).state) < nb


def test_balancing_mu_examples():
    assert balancing_mu("qubit") == 1.0
    assert abs(balancing_mu("qubit", loss=LossSpec(0.5, 0.8)) ** 2 - 1.6) < 1e-12
    assert abs(balancing_mu("enhanced", Z3) ** 2 - 11.05) < 0.01
    assert abs(balancing_mu("qutrit", 30.0) ** 4 - 1.5) < 1e-12
    with pytest.raises(ValueError):
        balancing_mu("qubit", loss=LossSpec(0.0, 1.0))
    with pytest.raises(ValueError):
        balancing_mu("qutrit", 0.0)


def test_coincidence_counts_examples():
    c0a, c0b = coincidence_counts(1e4, 2e3, 3e3, 1, 1, 1e-9, 1.0)
    assert math.isclose(c0a, 1e4 * 2e3 * 1e-9)
    assert math.isclose(c0b, 1e4 * 3e3 * 1e-9)
    # equal local coincidences fix N_A / N_B = g_B / g_A = 3 + 1/sinh^2
    g = squeezed_g2(Z3)
    nb = 1e3
    na = g * nb
    c0a, c0b = coincidence_counts(5e3, na, nb, 1.0, g, 1e-9, 1.0)
    assert math.isclose(c0a, c0b)
    assert abs(mu_from_counts(na, nb) ** 2 - balancing_mu("enhanced", Z3) ** 2) < 1e-9
    # equal pair coincidences: g_A N_A^2 = g_B N_B^2 with g_A = 2 (thermal), g_B = g
    na = math.sqrt(g / 2) * nb
    caa, cbb = coincidence_counts(0, na, nb, 2.0, g, 1e-9, 1.0, kind="pair")
    assert math.isclose(caa, cbb)
    assert abs(na / nb - balancing_mu("qutrit", Z3) ** 2) < 1e-9
    with pytest.raises(ValueError):
        coincidence_counts(1, 1, 1, 1, 1, 2.0, 1.0)
    with pytest.raises(ValueError):
        coincidence_counts(1, 1, 1, 1, 1, 1e-9, 1.0, kind="triple")


def test_converter_ideal_hybrid():
    hyb = ideal_hybrid_state(1.0, 40)
    for c0, c1, parity in ((1, 0, "even"), (0, 1, "odd")):
        rho, prob = convert_dv_to_cv(c0, c1, hyb)
        assert fidelity(cat_state(1.0, parity, 40), rho) > 1 - 1e-8
        assert 0 < prob <= 1
    with pytest.raises(ValueError):
        convert_dv_to_cv(1, 1, hyb)


def test_converter_with_generated_hybrid():
    h = scheme_qubit_perturbative(1.0, Z3, 40)
    rho, _ = convert_dv_to_cv(1 / math.sqrt(2), 1 / math.sqrt(2), h)
    target = cat_state(1.0, "even", 40).amplitudes + cat_state(1.0, "odd", 40).amplitudes
    target = PureState(ModeSpace((40,), ("B",)), target / np.linalg.norm(target))
    assert fidelity(target, rho) > 0.9
    mixed, _ = convert_dv_to_cv(1 / math.sqrt(2), 1 / math.sqrt(2), h.state)
    assert np.allclose(mixed.matrix, rho.matrix, atol=1e-10)


def test_lossy_heralded_state_is_valid():
    for scheme in ("qubit", "enhanced", "qutrit"):
        h = perturbative_scheme(scheme, 1.0, Z3, 30, loss=LossSpec(0.6, 0.7))
        assert h.pure is None
        assert h.state.is_state()
        assert 0 < h.herald_probability <= 1


def test_enhanced_block1_origin_tracks_cv_loss():
    for eb in (0.3, 0.8):
        h = scheme_enhanced_perturbative(2.0, 1e-3, 12, loss=LossSpec(0.7, eb))
        assert abs(block_origin_value(h.state, 1) - (1 - 2 * eb)) < 1e-3
    sv = wigner_origin_negativity(subtracted_squeezed(1, Z3, 30))
    assert sv < -0.99
