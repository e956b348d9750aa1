import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from faswipt import (
    PathSet,
    Placement,
    Scenario,
    assemble_channels,
    build_surrogate,
    decompose_objective,
    design_beamformer,
    linearize_distance,
    receiver_objective_matrix,
    solve_rx_subproblem,
    solve_tx_subproblem,
    surrogate_eval,
    transmit_field_matrix,
    transmit_field_vector,
)
from faswipt.channel import receive_field_vector
from faswipt.position import (
    QuadraticFormDecomposition,
    SurrogateModel,
    exact_functional,
    optimize_receiver,
    optimize_transmit_positions,
    receive_decomposition,
)

from conftest import make_instance, random_psd, zoom_grid_max


def link_value(paths, placement, W, wl=1.0):
    f = receive_field_vector(placement.rx(paths.link), paths, wl)
    h = f.conj() @ paths.sigma @ transmit_field_matrix(placement, paths, wl)
    return float(np.real(h @ W @ h.conj()))


# ---- decomposition -------------------------------------------------------------------

def test_decomposition_reconstructs_dense_form():
    sc, pI, pE, pl, rng = make_instance(0, M=3)
    W = random_psd(3, rng)
    for m in range(3):
        dec = decompose_objective(W, pI, pl, m, 1.0)
        for t in rng.uniform(-2, 2, size=(100, 2)):
            moved = pl.with_tx(m, t)
            ref = link_value(pI, moved, W)
            got = dec.value(transmit_field_vector(t, pI, 1.0))
            assert got == pytest.approx(ref, rel=1e-9, abs=1e-12)


def test_decomposition_single_antenna():
    _, pI, _, _, rng = make_instance(1, M=2)
    pl = Placement([[0.3, -0.2]], [0.1, 0.0], [0, 0])
    W = np.array([[2.5]])
    dec = decompose_objective(W, pI, pl, 0, 1.0)
    f = receive_field_vector(pl.r_I, pI, 1.0)
    a = pI.sigma.conj().T @ f
    np.testing.assert_allclose(dec.A, 2.5 * np.outer(a, a.conj()), atol=1e-14)
    assert np.all(dec.b == 0) and dec.c == 0


def test_decomposition_diagonal_w_has_no_cross_term():
    sc, pI, _, pl, _ = make_instance(2, M=3)
    dec = decompose_objective(np.diag([1.0, 2.0, 3.0]), pI, pl, 1, 1.0)
    assert np.allclose(dec.b, 0)


def test_decomposition_index_checked():
    sc, pI, _, pl, rng = make_instance(0, M=3)
    with pytest.raises(IndexError):
        decompose_objective(np.eye(3), pI, pl, 3, 1.0)


# ---- surrogate -----------------------------------------------------------------------

def test_zero_coefficients_give_flat_surrogate():
    _, pI, _, _, _ = make_instance(0)
    dec = receive_decomposition(np.zeros((3, 3)), "I")
    model = build_surrogate(dec, pI, [0.2, 0.1], 1.0)
    assert model.kappa == 0 and np.all(model.gradient == 0)
    assert surrogate_eval(model, [1.0, -1.0]) == model.value_at_expansion
    assert model.peak() is None


def test_single_path_curvature():
    p = PathSet("I", [0.7], [0.4], [0.2], [1.0], [[1.0]])
    # A = 1/4 gives d = xi/4 and |rho| = 1/2; b = xi/4 adds another 1/2
    xi0 = transmit_field_vector([0, 0], p, 1.0)
    dec = QuadraticFormDecomposition(np.array([[0.25]]), 0.25 * xi0, 0.0, "I")
    model = build_surrogate(dec, p, [0.0, 0.0], 1.0)
    assert np.abs(model.rho[0]) == pytest.approx(1.0)
    assert model.kappa == pytest.approx(8 * math.pi ** 2)


def test_surrogate_tangent_and_peak_value():
    sc, pI, _, pl, rng = make_instance(3)
    dec = decompose_objective(random_psd(3, rng), pI, pl, 0, 1.0)
    model = build_surrogate(dec, pI, pl.t[0], 1.0)
    exact = exact_functional(dec, pI, pl.t[0], 1.0)
    assert surrogate_eval(model, pl.t[0]) == pytest.approx(exact, rel=1e-12)
    assert model.value_at_expansion == pytest.approx(exact, rel=1e-12)
    g = model.gradient
    assert surrogate_eval(model, model.peak()) == pytest.approx(model.value_at_expansion + g @ g / (2 * model.kappa))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 100_000), M=st.integers(2, 4), rank=st.integers(1, 4), side=st.sampled_from(["tx", "rx"]))
def test_minorant_property(seed, M, rank, side):
    sc, pI, _, pl, rng = make_instance(seed, M=M)
    W = random_psd(M, rng, rank=min(rank, M))
    if side == "tx":
        m = seed % M
        dec = decompose_objective(W, pI, pl, m, 1.0)
        t0 = pl.t[m]
    else:
        dec = receive_decomposition(receiver_objective_matrix(W, pI.sigma, transmit_field_matrix(pl, pI, 1.0)), "I")
        t0 = pl.r_I
    model = build_surrogate(dec, pI, t0, 1.0)
    pts = t0 + rng.uniform(-3, 3, size=(1000, 2))
    assert np.all(surrogate_eval(model, pts) <= exact_functional(dec, pI, pts, 1.0) + 1e-9)


@pytest.mark.parametrize("side", ["tx", "rx"])
def test_gradient_matches_finite_differences(side):
    step = 1e-6
    for seed in range(20):
        sc, pI, _, pl, rng = make_instance(seed, M=3)
        W = random_psd(3, rng)
        if side == "tx":
            dec = decompose_objective(W, pI, pl, 1, 1.0)
            t0 = pl.t[1]
        else:
            dec = receive_decomposition(receiver_objective_matrix(W, pI.sigma, transmit_field_matrix(pl, pI, 1.0)), "I")
            t0 = pl.r_I
        model = build_surrogate(dec, pI, t0, 1.0)
        fd = np.array([
            (exact_functional(dec, pI, t0 + e, 1.0) - exact_functional(dec, pI, t0 - e, 1.0)) / (2 * step)
            for e in step * np.eye(2)
        ])
        assert np.linalg.norm(fd - model.gradient) <= 1e-6 * np.linalg.norm(fd)


def test_wavelength_scaling():
    # positions scale with lambda: the surrogate at lambda=2 of 2t equals that at lambda=1 of t
    sc, pI, _, pl, rng = make_instance(4)
    W = random_psd(3, rng)
    dec1 = decompose_objective(W, pI, pl, 0, 1.0)
    pl2 = Placement(2 * pl.t, 2 * pl.r_I, 2 * pl.r_E)
    dec2 = decompose_objective(W, pI, pl2, 0, 2.0)
    m1 = build_surrogate(dec1, pI, pl.t[0], 1.0)
    m2 = build_surrogate(dec2, pI, pl2.t[0], 2.0)
    assert m2.kappa == pytest.approx(m1.kappa / 4)
    np.testing.assert_allclose(m2.gradient, m1.gradient / 2, rtol=1e-9, atol=1e-12)


# ---- distance linearization ----------------------------------------------------------

def test_linearize_distance_examples():
    beta = linearize_distance([2.0, 0.0], [0.0, 0.0])
    assert beta([2.0, 0.0]) == pytest.approx(2.0)
    assert beta([3.0, 0.0]) == pytest.approx(3.0)
    beta = linearize_distance([1.0, 0.0], [0.0, 0.0])
    assert beta([0.0, 1.0]) == pytest.approx(0.0)
    with pytest.raises(ValueError):
        linearize_distance([1.0, 1.0], [1.0, 1.0])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=6, max_size=6))
def test_linearized_distance_is_lower_bound(v):
    a, b, t = np.array(v[:2]), np.array(v[2:4]), np.array(v[4:])
    if np.linalg.norm(a - b) < 1e-6:
        return
    assert linearize_distance(a, b)(t) <= np.linalg.norm(t - b) + 1e-12


# ---- transmit subproblem --------------------------------------------------------------

def tx_models(seed, M=2):
    """Surrogates for antenna 0 at a feasible placement with the optimal beamformer."""
    s = seed
    while True:
        sc, pI, pE, pl, rng = make_instance(s, M=M)
        ch = assemble_channels(pl, pI, pE, 1.0)
        bf = design_beamformer(ch.h_I, ch.h_E, sc, seed=s)
        if bf.feasible:
            break
        s += 7919
    mI = build_surrogate(decompose_objective(bf.W, pI, pl, 0, 1.0), pI, pl.t[0], 1.0)
    mE = build_surrogate(decompose_objective(bf.W, pE, pl, 0, 1.0), pE, pl.t[0], 1.0)
    return sc, mI, mE, pl.t[1:]


def tx_grid(sc, mI, mE, nbrs, n=400):
    thr = sc.q_bar / sc.tau
    betas = [linearize_distance(mI.expansion_point, v) for v in nbrs]

    def feasible(P):
        ok = surrogate_eval(mE, P) >= thr
        for b in betas:
            ok &= b(P) >= sc.min_distance
        return ok

    return zoom_grid_max(lambda P: surrogate_eval(mI, P), feasible, sc.tx_half, n=n)


def test_tx_subproblem_matches_grid():
    for seed in range(15):
        sc, mI, mE, nbrs = tx_models(seed)
        upd = solve_tx_subproblem(mI, mE, nbrs, sc)
        grid, _ = tx_grid(sc, mI, mE, nbrs)
        scale = max(abs(grid), abs(mI.value_at_expansion))
        assert upd.surrogate_value >= grid - 1e-9 * scale
        assert upd.surrogate_value <= grid + 1e-3 * scale


def test_tx_subproblem_returns_feasible_improvement():
    for seed in range(30):
        sc, mI, mE, nbrs = tx_models(seed, M=3)
        upd = solve_tx_subproblem(mI, mE, nbrs, sc)
        t = upd.position
        assert np.all(np.abs(t) <= sc.tx_half)
        assert np.all(np.linalg.norm(nbrs - t, axis=1) >= sc.min_distance - 1e-9)
        assert surrogate_eval(mE, t) >= sc.q_bar / sc.tau - 1e-9
        assert upd.surrogate_value >= mI.value_at_expansion


def test_tx_subproblem_interior_optimum():
    sc = Scenario(M=2)
    zero = np.zeros(2)
    mI = SurrogateModel(zero, np.ones(1), 5.0, np.array([0.3, -0.2]), 2.0, 0.0)
    mE = SurrogateModel(zero, np.ones(1), 10.0, zero, 0.0, 0.0)
    upd = solve_tx_subproblem(mI, mE, np.array([[-1.0, 0.0]]), sc)
    np.testing.assert_allclose(upd.position, [0.15, -0.1], atol=1e-12)


def test_tx_subproblem_stationary_stays():
    sc = Scenario(M=2)
    t0 = np.array([0.5, 0.5])
    mI = SurrogateModel(t0, np.ones(1), 5.0, np.zeros(2), 2.0, 0.0)
    mE = SurrogateModel(t0, np.ones(1), 10.0, np.zeros(2), 1.0, 0.0)
    np.testing.assert_allclose(solve_tx_subproblem(mI, mE, np.array([[-1.0, 0.0]]), sc).position, t0)


def test_tx_subproblem_rejects_infeasible_expansion():
    sc = Scenario(M=2)
    zero = np.zeros(2)
    mI = SurrogateModel(zero, np.ones(1), 5.0, zero, 1.0, 0.0)
    mE = SurrogateModel(zero, np.ones(1), 10.0, zero, 1.0, 0.0)
    with pytest.raises(ValueError):
        solve_tx_subproblem(mI, mE, np.array([[0.1, 0.0]]), sc)


# ---- receive side ---------------------------------------------------------------------

def test_receiver_matrix_reproduces_form():
    for seed in range(10):
        sc, pI, pE, pl, rng = make_instance(seed)
        W = random_psd(3, rng)
        delta = receiver_objective_matrix(W, pI.sigma, transmit_field_matrix(pl, pI, 1.0))
        assert np.all(np.linalg.eigvalsh(delta) >= -1e-10)
        f = receive_field_vector(pl.r_I, pI, 1.0)
        assert np.real(f.conj() @ delta @ f) == pytest.approx(link_value(pI, pl, W), rel=1e-9)
    assert np.all(receiver_objective_matrix(np.zeros((3, 3)), pI.sigma, transmit_field_matrix(pl, pI, 1.0)) == 0)


def test_rx_subproblem_trivial_cases():
    _, pI, _, _, _ = make_instance(0)
    r0 = np.array([0.2, -0.3])
    np.testing.assert_array_equal(solve_rx_subproblem(np.zeros((3, 3)), pI, 1.0, r0, 1.0).position, r0)
    p1 = PathSet("I", [0.5], [0.5], [0.9], [0.3], [[0.7]])
    np.testing.assert_array_equal(solve_rx_subproblem(np.array([[2.0]]), p1, 1.0, r0, 1.0).position, r0)


def test_rx_subproblem_matches_grid():
    for seed in range(15):
        sc, pI, pE, pl, rng = make_instance(seed)
        delta = receiver_objective_matrix(random_psd(3, rng, 1), pI.sigma, transmit_field_matrix(pl, pI, 1.0))
        upd = solve_rx_subproblem(delta, pI, sc.rx_half_I, pl.r_I, 1.0)
        model = build_surrogate(receive_decomposition(delta, "I"), pI, pl.r_I, 1.0)
        grid, _ = zoom_grid_max(lambda P: surrogate_eval(model, P), lambda P: np.ones(len(P), bool), sc.rx_half_I)
        scale = max(abs(grid), abs(model.value_at_expansion))
        assert grid - 1e-9 * scale <= upd.surrogate_value <= grid + 1e-3 * scale
        assert exact_functional(receive_decomposition(delta, "I"), pI, upd.position, 1.0) >= model.value_at_expansion - 1e-12


# ---- inner loops ----------------------------------------------------------------------

def test_transmit_loop_monotone_and_feasible():
    for seed in range(8):
        sc, pI, pE, pl, rng = make_instance(seed, M=4)
        ch = assemble_channels(pl, pI, pE, 1.0)
        bf = design_beamformer(ch.h_I, ch.h_E, sc, seed=seed)
        if not bf.feasible:
            continue
        new, sweeps, _ = optimize_transmit_positions(bf.W, pI, pE, pl, sc)
        assert 1 <= sweeps <= 20
        assert new.is_valid(sc)
        assert link_value(pI, new, bf.W) >= link_value(pI, pl, bf.W) - 1e-12
        assert sc.tau * link_value(pE, new, bf.W) >= sc.q_bar - 1e-8
        np.testing.assert_array_equal(new.r_I, pl.r_I)


def test_receiver_loop_monotone():
    for seed in range(8):
        sc, pI, pE, pl, rng = make_instance(seed)
        W = random_psd(3, rng, 1)
        new, _ = optimize_receiver(W, pI, pl, sc)
        assert np.all(np.abs(new.r_I) <= sc.rx_half_I)
        assert link_value(pI, new, W) >= link_value(pI, pl, W) - 1e-12
        np.testing.assert_array_equal(new.t, pl.t)


def test_degenerate_receiver_region_does_not_move():
    sc, pI, pE, _, rng = make_instance(0, rx_half_I=0.0)
    pl = Placement([[0, 0], [1, 0], [0, 1]], [0, 0], [0, 0])
    new, iters = optimize_receiver(random_psd(3, rng), pI, pl, sc)
    assert iters == 0 and np.all(new.r_I == 0)
