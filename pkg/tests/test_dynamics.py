import numpy as np
import pytest

from entrate.dynamics import (
    IntegrationError,
    LindbladGenerator,
    apply_generator,
    convergence_order,
    embed_ab,
    evolve,
    generator_from_json,
    generator_to_json,
)
from entrate.linalg import ShapeError, tensor
from entrate.states import DensityMatrix, DimensionSignature, random_density, random_pure


def _expm(m, t=1.0):
    # plain scaling-and-squaring Taylor oracle; fine for the tiny dims here
    a = t * m
    s = max(0, int(np.ceil(np.log2(max(1.0, np.abs(a).sum(axis=1).max())))))
    a = a / (2**s)
    out = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for k in range(1, 40):
        term = term @ a / k
        out += term
    for _ in range(s):
        out = out @ out
    return out


def _liouvillian(gen):
    n = gen.dims.total
    eye = np.eye(n)
    h = gen.h_full
    sup = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for l in gen.ls_full:
        ld = l.conj().T
        sup += np.kron(l, l.conj()) - 0.5 * (np.kron(ld @ l, eye) + np.kron(eye, (ld @ l).T))
    return sup


def test_generator_validates_inputs():
    dims = DimensionSignature.cut(2, 2)
    with pytest.raises(ValueError):
        LindbladGenerator(dims, np.array([[0.0, 1.0], [0.0, 0.0]]))  # not hermitian
    with pytest.raises(ShapeError):
        LindbladGenerator(dims, np.eye(3))  # wrong block size


def test_embed_ab_acts_trivially_on_ancillas():
    dims = DimensionSignature(2, 2, 3, 2)
    op = np.arange(36, dtype=complex).reshape(6, 6)
    full = embed_ab(op, dims)
    assert np.allclose(full, tensor(np.eye(2), op, np.eye(2)))
    with pytest.raises(ShapeError):
        embed_ab(np.eye(5), dims)


def test_apply_generator_unitary_part():
    dims = DimensionSignature.cut(2, 1)
    h = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
    gen = LindbladGenerator(dims, h)
    rho = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
    out = apply_generator(gen, rho)
    assert np.allclose(out, -1j * (h @ rho - rho @ h))


def test_amplitude_damping_closed_form():
    # L = sqrt(g)|0><1| : excited population decays as exp(-g t)
    g = 0.7
    dims = DimensionSignature.cut(2, 1)
    l = np.sqrt(g) * np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    gen = LindbladGenerator(dims, None, (l,))
    rho0 = DensityMatrix(dims, np.diag([0.0, 1.0]).astype(complex))
    for t in (0.3, 1.0, 2.5):
        out = evolve(gen, rho0, t, steps=400)
        assert out.matrix[1, 1].real == pytest.approx(np.exp(-g * t), abs=1e-9)
        assert out.matrix[0, 0].real == pytest.approx(1 - np.exp(-g * t), abs=1e-9)


def test_evolve_matches_exponentiated_liouvillian():
    dims = DimensionSignature.cut(2, 2)
    rng = np.random.default_rng(0)
    h = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    h = (h + h.conj().T) / 2
    l = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    gen = LindbladGenerator(dims, h, (l / np.linalg.norm(l, 2),))
    rho0 = DensityMatrix(dims, random_density(4, 1))
    t = 0.8
    want = (_expm(_liouvillian(gen), t) @ rho0.matrix.reshape(-1)).reshape(4, 4)
    got = evolve(gen, rho0, t, steps=800)
    assert np.allclose(got.matrix, want, atol=1e-9)


def test_evolve_zero_time_is_identity():
    dims = DimensionSignature.cut(2, 2)
    rho = random_pure(dims, 5).density()
    gen = LindbladGenerator(dims)
    assert evolve(gen, rho, 0.0) is rho
    with pytest.raises(ValueError):
        evolve(gen, rho, -1.0)
    with pytest.raises(ValueError):
        evolve(gen, rho, 1.0, steps=0)


def test_evolve_dims_mismatch():
    gen = LindbladGenerator(DimensionSignature.cut(2, 2))
    rho = random_pure(DimensionSignature.cut(2, 3), 0).density()
    with pytest.raises(ShapeError):
        evolve(gen, rho, 0.1)


def test_evolve_reports_drift_with_step_suggestion():
    # one giant step of strong damping drives the spectrum far negative
    dims = DimensionSignature.cut(2, 1)
    l = 3.0 * np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    gen = LindbladGenerator(dims, None, (l,))
    rho0 = DensityMatrix(dims, np.diag([0.0, 1.0]).astype(complex))
    with pytest.raises(IntegrationError) as exc:
        evolve(gen, rho0, 5.0, steps=1)
    assert exc.value.suggested_steps >= 2
    assert exc.value.drift > 1e-8


def test_convergence_order_is_four():
    dims = DimensionSignature.cut(2, 2)
    rng = np.random.default_rng(3)
    h = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    h = (h + h.conj().T) / 2
    l = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    gen = LindbladGenerator(dims, h, (0.5 * l / np.linalg.norm(l, 2),))
    rho0 = random_pure(dims, 4).density()
    order = convergence_order(gen, rho0, 0.5, 16)
    assert order is not None
    assert order == pytest.approx(4.0, abs=0.3)


def test_convergence_order_degenerate_returns_none():
    dims = DimensionSignature.cut(2, 2)
    gen = LindbladGenerator(dims)  # nothing moves
    rho0 = random_pure(dims, 6).density()
    assert convergence_order(gen, rho0, 0.5, 8) is None


def test_generator_json_roundtrip():
    dims = DimensionSignature(2, 2, 2, 1)
    rng = np.random.default_rng(7)
    h = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    h = (h + h.conj().T) / 2
    l = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    gen = LindbladGenerator(dims, h, (l,))
    back = generator_from_json(generator_to_json(gen))
    assert back.dims == dims
    assert np.array_equal(back.hamiltonian, gen.hamiltonian)
    assert len(back.lindblad_ops) == 1
    assert np.array_equal(back.lindblad_ops[0], l)

    no_h = generator_from_json(generator_to_json(LindbladGenerator(dims)))
    assert no_h.hamiltonian is None
    assert no_h.lindblad_ops == ()
    with pytest.raises(ValueError):
        generator_from_json({"H": None})
