import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entrate.dynamics import LindbladGenerator
from entrate.rates import (
    InvalidPair,
    binary_entropy,
    commutator_trace_norm_check,
    dissipative_commutator_check,
    dissipative_term,
    dissipative_term_bound,
    entangling_rate_bound,
    entangling_rate_fd,
    hamiltonian_commutator_check,
    hamiltonian_term,
    hamiltonian_term_bound,
    hamiltonian_term_bound_tight,
    marginal_split_check,
    mi_rate_bound,
    mixing_term,
    mixing_term_bound,
    mutual_info_rate_analytic,
    mutual_info_rate_fd,
    pure_ree_identity_check,
    random_xy_pair,
    small_incremental_mixing_check,
    surrogate_rate_analytic,
    surrogate_rate_fd,
    surrogate_rate_fd_richardson,
    unitary_rate_bound,
)
from entrate.states import (
    DegenerateCut,
    DensityMatrix,
    DimensionSignature,
    PureState,
    random_density,
    random_gue_hamiltonian,
    random_ginibre_lindblad,
    random_pure,
)


def test_binary_entropy_landmarks():
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert binary_entropy(0.5) == pytest.approx(math.log(2), abs=1e-14)
    assert binary_entropy(0.3) == pytest.approx(0.6108643, abs=1e-7)
    with pytest.raises(ValueError):
        binary_entropy(1.2)


def test_hamiltonian_term_diagonal_oracle():
    # diagonal sigma and a simple off-diagonal H: the trace collapses to
    # i sum_{jk} H_kj rho_jk (ln s_k - ln s_j)
    rho = np.array([[0.6, 0.2 + 0.1j], [0.2 - 0.1j, 0.4]])
    sigma = np.diag([0.7, 0.3]).astype(complex)
    h = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    log_s = np.log([0.7, 0.3])
    want = 0.0
    for j in range(2):
        for k in range(2):
            want += np.real(1j * h[k, j] * rho[j, k] * (log_s[k] - log_s[j]))
    assert hamiltonian_term(h, rho, sigma) == pytest.approx(want, abs=1e-12)


def test_hamiltonian_term_vanishes_when_commuting():
    # [rho, ln sigma] = 0 for simultaneously diagonal matrices
    rho = np.diag([0.6, 0.4]).astype(complex)
    sigma = np.diag([0.5, 0.5]).astype(complex)
    h = random_gue_hamiltonian(2, 7)
    assert hamiltonian_term(h, rho, sigma) == pytest.approx(0.0, abs=1e-12)


def test_hamiltonian_bounds_ordering():
    h = random_gue_hamiltonian(4, 0)
    for d in range(2, 9):
        tight = hamiltonian_term_bound_tight(h, d)
        loose = hamiltonian_term_bound(h, d)
        assert tight <= loose + 1e-12
    # equality exactly at d = 2
    assert hamiltonian_term_bound_tight(h, 2) == pytest.approx(hamiltonian_term_bound(h, 2), rel=1e-12)
    with pytest.raises(ValueError):
        hamiltonian_term_bound(h, 1)


@pytest.mark.parametrize("da,db", [(2, 2), (2, 4), (3, 3)])
def test_hamiltonian_commutator_check_holds(da, db):
    dims = DimensionSignature.cut(da, db)
    for s in range(25):
        psi = random_pure(dims, seed=s)
        h = random_gue_hamiltonian(dims.total, seed=1000 + s)
        res = hamiltonian_commutator_check(h, psi)
        assert res.margin >= 0.0
        # the sharper cap must hold as well
        assert abs(res.lhs) <= hamiltonian_term_bound_tight(h, dims.d) + 1e-9


def test_dissipative_term_diagonal_oracle():
    # everything diagonal commutes, so the term vanishes
    l = np.diag([1.0, 2.0]).astype(complex)
    x = np.diag([0.05, 0.05]).astype(complex)
    y = np.diag([0.6, 0.4]).astype(complex)
    assert abs(dissipative_term(l, x, y)) == pytest.approx(0.0, abs=1e-12)


def test_dissipative_term_explicit_value():
    # hand-computed 2x2 instance: Tr(L† (LX lnY - lnY LX))
    l = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    x = np.array([[0.08, 0.02], [0.02, 0.05]], dtype=complex)
    y = np.diag([0.7, 0.3]).astype(complex)
    log_y = np.diag(np.log([0.7, 0.3])).astype(complex)
    lx = l @ x
    want = complex(np.trace(l.conj().T @ (lx @ log_y - log_y @ lx)))
    assert dissipative_term(l, x, y) == pytest.approx(want, abs=1e-12)


def test_dissipative_term_bound_domain():
    l = np.eye(2, dtype=complex)
    p = math.exp(-2.0)
    assert dissipative_term_bound(l, p) == pytest.approx(172.0 * p * math.log(1.0 / p), rel=1e-12)
    with pytest.raises(InvalidPair):
        dissipative_term_bound(l, 0.2)  # above e^-2
    with pytest.raises(InvalidPair):
        dissipative_term_bound(l, 0.0)


def test_pair_validation_rejects_bad_inputs():
    l = np.eye(2, dtype=complex)
    y = np.diag([0.6, 0.4]).astype(complex)
    p = 0.1
    with pytest.raises(InvalidPair):  # X not PSD
        dissipative_commutator_check(l, np.diag([0.2, -0.1]).astype(complex), y, p)
    with pytest.raises(InvalidPair):  # X not dominated by Y
        dissipative_commutator_check(l, np.diag([0.1, 0.7]).astype(complex), y, 0.8)
    with pytest.raises(InvalidPair):  # trace of X off target
        dissipative_commutator_check(l, np.diag([0.05, 0.05]).astype(complex), y, 0.2)


@pytest.mark.parametrize("dim", [2, 4, 7])
@pytest.mark.parametrize("p", [0.01, 0.05, math.exp(-2.0)])
def test_random_xy_pair_constraints(dim, p):
    x, y = random_xy_pair(dim, p, seed=dim * 100 + int(p * 1000))
    assert float(np.linalg.eigvalsh((x + x.conj().T) / 2).min()) >= -1e-10
    assert float(np.linalg.eigvalsh(((y - x) + (y - x).conj().T) / 2).min()) >= -1e-10
    assert float(np.real(np.trace(x))) == pytest.approx(p, abs=1e-10)
    assert float(np.real(np.trace(y))) == pytest.approx(1.0, abs=1e-10)
    # full-rank reference
    assert float(np.linalg.eigvalsh((y + y.conj().T) / 2).min()) > 0.0


def test_random_xy_pair_identity_mix_branch():
    # a trace target close to 1 forces the identity-mixing branch
    x, y = random_xy_pair(3, 0.95, seed=5)
    assert float(np.real(np.trace(x))) == pytest.approx(0.95, abs=1e-10)
    assert float(np.linalg.eigvalsh(((y - x) + (y - x).conj().T) / 2).min()) >= -1e-10


def test_random_xy_pair_deterministic():
    x1, y1 = random_xy_pair(4, 0.1, seed=9)
    x2, y2 = random_xy_pair(4, 0.1, seed=9)
    assert np.array_equal(x1, x2) and np.array_equal(y1, y2)


@pytest.mark.parametrize("dim,p", [(4, 0.05), (8, 1.0 / 8.0), (9, 1.0 / 9.0)])
def test_dissipative_commutator_check_holds(dim, p):
    for s in range(20):
        x, y = random_xy_pair(dim, p, seed=s)
        l = random_ginibre_lindblad(dim, seed=500 + s)
        res = dissipative_commutator_check(l, x, y, p)
        assert res.margin >= 0.0


def test_mixing_term_zero_for_commuting_inputs():
    h = np.diag([1.0, -1.0]).astype(complex)
    r1 = np.diag([0.8, 0.2]).astype(complex)
    r2 = np.diag([0.5, 0.5]).astype(complex)
    assert mixing_term(h, r1, r2, 0.3) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        mixing_term(h, r1, r2, 0.0)


def test_mixing_bound_formula_and_check():
    h = random_gue_hamiltonian(6, 3)
    norm = float(np.abs(np.linalg.eigvalsh(h)).max())
    assert mixing_term_bound(h, 0.25) == pytest.approx(2.0 * binary_entropy(0.25) * norm, rel=1e-12)
    for s in range(20):
        r1 = random_density(6, seed=2 * s)
        r2 = random_density(6, seed=2 * s + 1)
        res = small_incremental_mixing_check(h, r1, r2, 0.25)
        assert res.margin >= 0.0
        assert res.witness == {"p": 0.25}


def test_commutator_trace_norm_margin_and_domain():
    for s in range(30):
        rng = np.random.default_rng(s)
        g = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        a = g @ g.conj().T  # PSD, arbitrary scale
        x = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        assert commutator_trace_norm_check(a, x).margin >= -1e-9
    # identity commutes with everything: lhs = 0
    res = commutator_trace_norm_check(np.eye(3), np.diag([1.0, 2.0, 3.0]))
    assert res.lhs == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(InvalidPair):
        commutator_trace_norm_check(np.diag([1.0, -0.5]), np.eye(2))


def test_pure_ree_identity_margin_tiny():
    for s in range(10):
        psi = random_pure(DimensionSignature.cut(3, 4), seed=s)
        res = pure_ree_identity_check(psi)
        assert abs(res.lhs - res.rhs) <= 1e-10
        assert res.margin <= 0.0  # equality check stores -|difference|
        assert all(c > 0 for c in res.witness["schmidt_coefficients"])


def test_marginal_split_check_both_sides():
    dims = DimensionSignature(2, 2, 2, 2)
    for s in range(10):
        rho = DensityMatrix(dims, random_density(dims.total, seed=s))
        for side in ("B", "A"):
            res = marginal_split_check(rho, side=side)
            assert res.margin >= 0.0
            assert res.witness["factor"] == 4
    with pytest.raises(ValueError):
        marginal_split_check(DensityMatrix(dims, random_density(16, seed=0)), side="C")


def test_marginal_split_product_state_oracle():
    # rho = rho_aA ⊗ I_B/d_B ⊗ |0><0|_b: the B-side difference is
    # (d_B^2 - 1)/d_B^2 of a state, so the witness eigenvalue is positive
    dims = DimensionSignature(2, 2, 3, 1)
    marg = random_density(4, seed=11)
    rho = DensityMatrix(dims, np.kron(marg, np.eye(3) / 3))
    res = marginal_split_check(rho, side="B")
    lam_min = float(np.linalg.eigvalsh(np.kron(marg, np.eye(3) / 3)).min())
    assert res.margin == pytest.approx(8.0 * lam_min, rel=1e-9)


def _unitary_gen(dims, seed, scale=1.0):
    h = scale * random_gue_hamiltonian(dims.d_A * dims.d_B, seed)
    return LindbladGenerator(dims, hamiltonian=h)


def _open_gen(dims, seed, n_lindblad=2):
    h = random_gue_hamiltonian(dims.d_A * dims.d_B, seed)
    ls = tuple(random_ginibre_lindblad(dims.d_A * dims.d_B, seed=seed + 10 + k) for k in range(n_lindblad))
    return LindbladGenerator(dims, hamiltonian=h, lindblad_ops=ls)


def test_rate_bound_formulas():
    dims = DimensionSignature.cut(2, 3)
    h = np.diag([1.0, -1.0, 0.5, 0.0, 0.0, -0.5]).astype(complex)  # ||H|| = 1
    l = np.zeros((6, 6), dtype=complex)
    l[0, 1] = 2.0  # ||L|| = 2
    gen = LindbladGenerator(dims, hamiltonian=h, lindblad_ops=(l,))
    assert entangling_rate_bound(gen) == pytest.approx(4.0 * (1.0 + 86.0 * 4.0) * math.log(2), rel=1e-12)
    assert unitary_rate_bound(gen) == pytest.approx(4.0 * math.log(2), rel=1e-12)
    assert mi_rate_bound(gen) == pytest.approx(
        4.0 * (2.0 + 129.0 * 4.0) * (math.log(2) + math.log(3)), rel=1e-12
    )


def test_surrogate_rate_zero_generator_bias():
    # no dynamics: the finite difference must reproduce E(psi) up to the
    # regularization leak, which stays under 1e-9 per unit time
    dims = DimensionSignature.cut(3, 3)
    psi = random_pure(dims, seed=4)
    gen = LindbladGenerator(dims)  # H = 0, no jumps
    assert abs(surrogate_rate_fd(psi, gen, 1e-3)) < 1e-9


def test_surrogate_rate_input_validation():
    dims = DimensionSignature.cut(2, 2)
    psi = random_pure(dims, seed=0)
    gen = _unitary_gen(dims, 0)
    with pytest.raises(ValueError):
        surrogate_rate_fd(psi, gen, 0.0)
    with pytest.raises(ValueError):
        surrogate_rate_fd(psi, gen, 1e-3, eta_ref=1e-3)  # too coarse
    with pytest.raises(ValueError):
        surrogate_rate_analytic(psi, gen, eta=1.0)
    other = random_pure(DimensionSignature.cut(2, 3), seed=0)
    with pytest.raises(ValueError):
        surrogate_rate_analytic(other, gen)


@pytest.mark.parametrize("da,db", [(2, 2), (2, 3)])
def test_unitary_richardson_matches_analytic(da, db):
    dims = DimensionSignature.cut(da, db)
    for s in range(5):
        psi = random_pure(dims, seed=s)
        gen = _unitary_gen(dims, seed=100 + s)
        fd = surrogate_rate_fd_richardson(psi, gen, 1e-4)
        exact = surrogate_rate_analytic(psi, gen)
        assert fd == pytest.approx(exact, abs=1e-5)


def test_mi_rate_fd_matches_analytic():
    dims = DimensionSignature.cut(2, 2)
    for s in range(5):
        rho = DensityMatrix(dims, random_density(dims.total, seed=s))
        gen = _open_gen(dims, seed=200 + s, n_lindblad=1)
        fd = mutual_info_rate_fd(rho, gen, 1e-4)
        exact = mutual_info_rate_analytic(rho, gen)
        assert fd == pytest.approx(exact, abs=1e-4)
    with pytest.raises(ValueError):
        mutual_info_rate_fd(rho, gen, -1.0)


def test_mi_rate_analytic_smoothed_pure_states():
    # with eta smoothing the closed form becomes evaluable at pure states;
    # a product state under a purely one-sided Hamiltonian has zero MI rate
    dims = DimensionSignature(2, 2, 2, 2)
    rng = np.random.default_rng(5)
    va = rng.normal(size=4) + 1j * rng.normal(size=4)
    vb = rng.normal(size=4) + 1j * rng.normal(size=4)
    psi = PureState(dims, np.kron(va / np.linalg.norm(va), vb / np.linalg.norm(vb)))
    h_local = np.kron(random_gue_hamiltonian(2, rng), np.eye(2))
    gen = LindbladGenerator(dims, h_local, ())
    assert abs(mutual_info_rate_analytic(psi, gen, eta=1e-8)) < 1e-6

    for s in range(5):
        psi = random_pure(dims, seed=s)
        gen = LindbladGenerator(
            dims,
            random_gue_hamiltonian(4, np.random.default_rng(300 + s)),
            (random_ginibre_lindblad(4, np.random.default_rng(400 + s)),),
        )
        rate = mutual_info_rate_analytic(psi, gen, eta=1e-8)
        assert rate <= mi_rate_bound(gen) + 1e-3


def test_mi_rate_analytic_eta_validation():
    dims = DimensionSignature(1, 2, 2, 1)
    psi = random_pure(dims, seed=0)
    gen = _unitary_gen(dims, seed=0)
    for bad in (0.5, 0.0, 1e-11, 1e-3):
        with pytest.raises(ValueError):
            mutual_info_rate_analytic(psi, gen, eta=bad)


def test_rate_report_fields_surrogate():
    dims = DimensionSignature.cut(2, 2)
    psi = random_pure(dims, seed=1)
    gen = _open_gen(dims, seed=2)
    rep = entangling_rate_fd(psi, gen, 1e-4, seed=1)
    assert rep.gamma_fd == rep.gamma_surrogate_fd  # surrogate measure: identical
    assert rep.margin == pytest.approx(rep.theorem_bound - rep.gamma_surrogate_fd, rel=1e-12)
    assert rep.delta_t == 1e-4
    assert rep.measure == "surrogate"
    assert rep.dims == dims
    assert rep.theorem_bound == pytest.approx(entangling_rate_bound(gen), rel=1e-12)


def test_rate_report_bruteforce_only_tightens():
    dims = DimensionSignature.cut(2, 2)
    for s in range(3):
        psi = random_pure(dims, seed=s)
        gen = _open_gen(dims, seed=50 + s, n_lindblad=1)
        rep = entangling_rate_fd(
            psi, gen, 1e-4, measure="bruteforce", seed=s, ree_kwargs={"restarts": 1, "max_iters": 200}
        )
        assert rep.gamma_fd <= rep.gamma_surrogate_fd + 1e-7


def test_rate_measure_validation():
    dims = DimensionSignature.cut(2, 2)
    psi = random_pure(dims, seed=0)
    gen = _unitary_gen(dims, 0)
    with pytest.raises(ValueError):
        entangling_rate_fd(psi, gen, 1e-4, measure="exact")
    with pytest.raises(ValueError):
        entangling_rate_fd(psi, gen, 1e-4, eta_ref=1e-2)
    with pytest.raises(ValueError):
        entangling_rate_fd(psi, gen, -1e-4)


def test_rate_probes_reject_degenerate_cut():
    # d = 1 cut: zero cap but a nonzero reference-distance quotient, so the
    # probes refuse instead of reporting a meaningless negative margin
    dims = DimensionSignature.cut(1, 2)
    psi = random_pure(dims, seed=0)
    gen = _unitary_gen(dims, 0)
    for probe in (
        lambda: entangling_rate_fd(psi, gen, 1e-4),
        lambda: surrogate_rate_fd(psi, gen, 1e-4),
        lambda: surrogate_rate_fd_richardson(psi, gen, 1e-4),
        lambda: surrogate_rate_analytic(psi, gen),
    ):
        with pytest.raises(DegenerateCut):
            probe()


@pytest.mark.parametrize("da,db", [(2, 2), (3, 3), (2, 4)])
def test_measured_rates_respect_bound(da, db):
    dims = DimensionSignature.cut(da, db)
    for s in range(10):
        psi = random_pure(dims, seed=s)
        gen = _open_gen(dims, seed=300 + s)
        rep = entangling_rate_fd(psi, gen, 1e-4, seed=s)
        assert rep.margin >= -1e-3


def test_unitary_rates_respect_closed_bound():
    dims = DimensionSignature.cut(3, 3)
    for s in range(10):
        psi = random_pure(dims, seed=s)
        gen = _unitary_gen(dims, seed=400 + s)
        rate = surrogate_rate_fd_richardson(psi, gen, 1e-4)
        assert rate <= unitary_rate_bound(gen) + 1e-3


@given(st.floats(min_value=0.0, max_value=1.0))
@settings(max_examples=50, deadline=None)
def test_binary_entropy_properties(p):
    h = binary_entropy(p)
    assert 0.0 <= h <= math.log(2) + 1e-15
    assert h == pytest.approx(binary_entropy(1.0 - p), abs=1e-12)
