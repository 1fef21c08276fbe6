import inspect
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fockecho import (CatSpec, ContractError, EchoKind, EvolutionConfig, LETrace, StateVector,
                      evolve_free, evolve_full, incoherent_branches, incoherent_from_amplitudes,
                      incoherent_monte_carlo, le_trace, loschmidt_incoherent, loschmidt_naive,
                      loschmidt_raw, loschmidt_reduced, superposition_traces)
from fockecho.model import ModelParams, default_params
from fockecho.states import coherent_state

from oracles import random_state

NO_FLIP = ModelParams(e_up=0.0, e_down=100.0, v_flip=0.0, v_g=10.0, cutoff=120)


def _sv(v):
    return StateVector.from_vector(v)


def test_raw_echo_basics():
    rng = np.random.default_rng(0)
    psi = _sv(random_state(rng, 12))
    assert loschmidt_raw(psi, psi) == pytest.approx(1.0)
    assert loschmidt_raw(StateVector.basis(12, "up", 0), StateVector.basis(12, "up", 1)) == 0.0


def test_raw_echo_of_pure_up_state_is_up_overlap():
    rng = np.random.default_rng(1)
    psi = _sv(random_state(rng, 12, both_sectors=False)).normalized()
    phi = _sv(random_state(rng, 12))
    assert loschmidt_raw(psi, phi) == pytest.approx(abs(np.vdot(psi.up, phi.up)) ** 2, abs=1e-15)


def test_reduced_echo_dominates_raw():
    rng = np.random.default_rng(2)
    for _ in range(1000):
        psi = _sv(random_state(rng, 8, both_sectors=False)).normalized()
        phi = _sv(random_state(rng, 8))
        assert loschmidt_reduced(psi, phi) >= loschmidt_raw(psi, phi) - 1e-15
    assert loschmidt_reduced(psi, psi) == pytest.approx(1.0)


def test_reduced_echo_requires_pure_up_forward_state():
    rng = np.random.default_rng(3)
    with pytest.raises(ContractError):
        loschmidt_reduced(_sv(random_state(rng, 8)), _sv(random_state(rng, 8)))


def test_naive_echo():
    assert loschmidt_naive(1.0, 1.0) == 1.0
    assert loschmidt_naive(0.4, 0.6) == pytest.approx(0.5)
    with pytest.raises(ContractError):
        loschmidt_naive(1.2, 0.5)


def test_no_perturbation_gives_unit_echo():
    cfg = EvolutionConfig(t_max=8.0, dt_out=0.5)
    trace = le_trace("coherent", 6.0, NO_FLIP, cfg)
    np.testing.assert_allclose(trace.m, 1.0, atol=1e-8)
    for family in ("cat", "incoherent", "naive"):
        trace = le_trace(family, CatSpec(6.0, -3.0), NO_FLIP, cfg)
        np.testing.assert_allclose(trace.m, 1.0, atol=1e-8)


@given(st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
def test_closed_form_is_one_without_perturbation(a1, a2):
    p = default_params(cutoff=60)
    b = incoherent_branches(CatSpec(a1, a2), p)
    c1, c2 = b.branch1.up, b.branch2.up
    assert incoherent_from_amplitudes(c1, c2, b.branch1, b.branch2, b.overlap_sq) == pytest.approx(1.0, abs=1e-8)


def test_closed_form_takes_no_phase_count():
    assert "n" not in inspect.signature(incoherent_from_amplitudes).parameters
    assert "n_phases" not in inspect.signature(incoherent_from_amplitudes).parameters


def test_degenerate_branches_reduce_to_single_packet():
    alpha = math.sqrt(120)
    p = default_params().with_cutoff_for(120.5, (alpha,))
    cfg = EvolutionConfig(t_max=6.0, dt_out=0.05)
    single = le_trace("coherent", alpha, p, cfg)
    traces = superposition_traces(CatSpec(alpha, alpha), p, cfg)
    for name in ("incoherent", "naive", "cat"):
        np.testing.assert_allclose(traces[name].m, single.m, atol=1e-8)


def test_pointwise_incoherent_matches_trace():
    spec = CatSpec(math.sqrt(160), -math.sqrt(60))
    p = default_params().with_cutoff_for(spec.max_energy, (spec.alpha1, spec.alpha2))
    cfg = EvolutionConfig(t_max=3.0, dt_out=1.5)
    trace = superposition_traces(spec, p, cfg)["incoherent"]
    b = incoherent_branches(spec, p)
    for t, m in zip(trace.times, trace.m):
        assert loschmidt_incoherent(b, t, p) == pytest.approx(m, abs=1e-9)


def test_cat_trace_matches_direct_cat_evolution():
    spec = CatSpec(math.sqrt(160), -math.sqrt(60))
    p = default_params().with_cutoff_for(spec.max_energy, (spec.alpha1, spec.alpha2))
    cfg = EvolutionConfig(t_max=4.0, dt_out=1.0)
    via_branches = superposition_traces(spec, p, cfg)["cat"]
    direct = le_trace("cat", spec, p, cfg)
    np.testing.assert_allclose(via_branches.m, direct.m, atol=1e-9)


def test_traces_bounded_and_start_at_one():
    spec = CatSpec.from_energies(150, 100)
    p = default_params().with_cutoff_for(spec.max_energy, (spec.alpha1, spec.alpha2))
    traces = superposition_traces(spec, p, EvolutionConfig(t_max=10.0, dt_out=0.1))
    for tr in traces.values():
        assert tr.m[0] == pytest.approx(1.0, abs=1e-12)
        assert np.all(tr.m >= -1e-12) and np.all(tr.m <= 1 + 1e-8)


def test_zero_length_trace():
    trace = le_trace("coherent", 3.0, default_params(cutoff=60), EvolutionConfig(t_max=0.0))
    assert trace.times.tolist() == [0.0] and trace.m[0] == pytest.approx(1.0)


def test_monte_carlo_realization_is_normalized_echo():
    rng = np.random.default_rng(0)
    p = default_params(cutoff=60)
    b = incoherent_branches(CatSpec(3.0, -3.0), p)
    # without perturbation every realization is a pure state compared with itself
    m = incoherent_monte_carlo(b.branch1.up, b.branch2.up, b.branch1, b.branch2, b.overlap_sq, 16, rng)
    assert m == pytest.approx(1.0, abs=1e-12)


def test_monte_carlo_mean_converges_to_closed_form():
    spec = CatSpec(math.sqrt(160), -math.sqrt(60))
    p = default_params().with_cutoff_for(spec.max_energy, (spec.alpha1, spec.alpha2))
    b = incoherent_branches(spec, p)
    t = 7.0
    c1, c2 = evolve_free(b.branch1, t).up, evolve_free(b.branch2, t).up
    d1, d2 = evolve_full(b.branch1, t, p), evolve_full(b.branch2, t, p)
    closed = incoherent_from_amplitudes(c1, c2, d1, d2, b.overlap_sq)
    samples = np.array([incoherent_monte_carlo(c1, c2, d1, d2, b.overlap_sq, 64,
                                               np.random.default_rng([42, s])) for s in range(2000)])
    se = samples.std(ddof=1) / math.sqrt(samples.size)
    assert abs(samples.mean() - closed) < 4 * se + 1e-3


def test_letrace_validation():
    with pytest.raises(ContractError):
        LETrace([0.0, 1.0], [1.0], EchoKind.REDUCED)
    with pytest.raises(ContractError):
        LETrace([0.0, 0.0], [1.0, 1.0], EchoKind.REDUCED)
    assert LETrace([0.0], [1.0], "naive").label == "naive"


def test_unknown_family():
    with pytest.raises(ContractError):
        le_trace("squeezed", CatSpec(1, 1), default_params(cutoff=20), EvolutionConfig())
    with pytest.raises(ContractError):
        le_trace("cat", 2.0, default_params(cutoff=20), EvolutionConfig())
