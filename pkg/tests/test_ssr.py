import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import PAIR_CONFIGS, random_masked_state
from orbcorr.entanglement import mutual_information
from orbcorr.models import analytic_state
from orbcorr.rdm import DensityMatrix, two_orbital_rdm
from orbcorr.ssr import (
    Bipartition,
    from_product_form,
    product_form,
    project,
    project_number,
    project_parity,
)

LOCAL_N = np.array([0, 1, 1, 2])


def pair_dm(rho):
    return DensityMatrix((0, 1, 2, 3), PAIR_CONFIGS, rho)


def explicit_projection(rho, charge):
    """sum_q P_q rho P_q with P_q projecting on local charge q of the first orbital."""
    qa = np.repeat(charge, 4)
    out = np.zeros_like(rho)
    for q in np.unique(qa):
        p = np.diag((qa == q).astype(float))
        out += p @ rho @ p
    return out


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_projections_match_explicit_projectors(seed):
    rho = random_masked_state(np.random.default_rng(seed))
    dm = pair_dm(rho)
    assert np.abs(project_parity(dm).matrix - explicit_projection(rho, LOCAL_N % 2)).max() < 1e-14
    assert np.abs(project_number(dm).matrix - explicit_projection(rho, LOCAL_N)).max() < 1e-14


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_projections_are_idempotent_and_nested(seed):
    dm = pair_dm(random_masked_state(np.random.default_rng(seed)))
    p = project_parity(dm)
    n = project_number(dm)
    assert np.abs(project_parity(p).matrix - p.matrix).max() < 1e-15
    assert np.abs(project_number(n).matrix - n.matrix).max() < 1e-15
    # fixing the number also fixes the parity
    assert np.abs(project_parity(n).matrix - n.matrix).max() < 1e-15
    assert np.abs(project_number(p).matrix - n.matrix).max() < 1e-15
    assert abs(np.trace(n.matrix) - 1) < 1e-12


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_projection_never_increases_mutual_information(seed):
    dm = pair_dm(random_masked_state(np.random.default_rng(seed)))
    i0 = mutual_information(dm)
    ip = mutual_information(project(dm, "parity"))
    i_n = mutual_information(project(dm, "number"))
    assert i_n <= ip + 1e-8 and ip <= i0 + 1e-8


@settings(max_examples=30, deadline=None)
@given(seeds, st.permutations([0, 1, 2, 3]))
def test_product_form_round_trip(seed, order):
    rho = random_masked_state(np.random.default_rng(seed))
    split = Bipartition(order[:2], order[2:])
    dm = pair_dm(rho)
    m, da, db = product_form(dm, split)
    assert (da, db) == (4, 4)
    back = from_product_form(m, dm.modes, split)
    lookup = {int(c): k for k, c in enumerate(back.configs)}
    idx = [lookup[int(c)] for c in dm.configs]
    assert np.abs(back.matrix[np.ix_(idx, idx)] - rho).max() < 1e-15


def test_default_split_is_first_orbital():
    rho = random_masked_state(np.random.default_rng(3))
    m, _, _ = product_form(pair_dm(rho))
    assert np.abs(m - rho).max() < 1e-15


def test_dissociated_h2_is_already_physical():
    rho = two_orbital_rdm(analytic_state("dissociated_h2"), 0, 1)
    for mode in ("parity", "number"):
        assert np.abs(project(rho, mode).matrix - rho.matrix).max() < 1e-12


def test_one_electron_projection_removes_coherence():
    rho = two_orbital_rdm(analytic_state("one_electron"), 0, 1)
    proj = project(rho, "parity").matrix
    assert np.allclose(np.diag(proj).real, np.diag(rho.matrix).real)
    assert np.abs(proj - np.diag(np.diag(proj))).max() < 1e-15
    assert np.abs(rho.matrix - np.diag(np.diag(rho.matrix))).max() == pytest.approx(0.5)


def test_errors():
    dm = pair_dm(random_masked_state(np.random.default_rng(0)))
    with pytest.raises(ValueError):
        project(dm, "spin")
    with pytest.raises(ValueError):
        Bipartition((0, 1), (1, 2))
    with pytest.raises(ValueError):
        product_form(dm, Bipartition((0, 1), (2,)))
