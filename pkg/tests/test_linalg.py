import numpy as np
import pytest

from stratsmooth.linalg import (
    ContractViolation,
    fd_gradient,
    fd_jacobian,
    frobenius,
    orthogonal_projector,
    power_softmin,
    random_orthogonal,
    reconstruct,
    spectral_norm,
    svd,
    sym_eig,
)


def test_svd_diagonal_already_ordered():
    f = svd(np.diag([3.0, 1.0]))
    assert np.allclose(f.U, np.eye(2))
    assert np.allclose(f.sigma, [3.0, 1.0])
    assert np.allclose(f.V, np.eye(2))


def test_svd_zero_matrix():
    f = svd(np.zeros((2, 2)))
    assert np.allclose(f.sigma, [0.0, 0.0])


def test_svd_antidiagonal():
    # eigenvalues of X^T X are 1 and 4, verified by the Gram computation
    X = np.array([[0.0, 2.0], [1.0, 0.0]])
    gram_eigs = np.sort(np.linalg.eigvalsh(X.T @ X))[::-1]
    f = svd(X)
    assert np.allclose(f.sigma, np.sqrt(gram_eigs))
    assert np.allclose(f.sigma, [2.0, 1.0])


def test_svd_reconstruction_suite():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = int(rng.integers(1, 7))
        m = int(rng.integers(1, 7))
        X = rng.standard_normal((n, m)) * rng.uniform(0.1, 10)
        f = svd(X)
        scale = max(1.0, frobenius(X))
        assert frobenius(reconstruct(f) - X) <= 1e-10 * scale
        assert frobenius(f.U.T @ f.U - np.eye(n)) <= 1e-12
        assert frobenius(f.V.T @ f.V - np.eye(m)) <= 1e-12
        assert np.all(np.diff(f.sigma) <= 1e-14)


def test_svd_deterministic_sign_convention():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((4, 4))
    f1 = svd(X)
    f2 = svd(X.copy())
    assert np.array_equal(f1.U, f2.U)
    for i in range(4):
        j = np.argmax(np.abs(f1.U[:, i]))
        assert f1.U[j, i] > 0


def test_sigma_nonexpansive():
    rng = np.random.default_rng(2)
    for _ in range(100):
        X = rng.standard_normal((4, 5))
        Y = rng.standard_normal((4, 5))
        ds = np.linalg.norm(svd(X).sigma - svd(Y).sigma)
        assert ds <= frobenius(X - Y) + 1e-10


def test_svd_rejects_nonfinite():
    with pytest.raises(ContractViolation):
        svd(np.array([[np.nan, 0.0], [0.0, 1.0]]))


def test_sym_eig_diagonal():
    f = sym_eig(np.diag([1.0, -2.0]))
    assert np.allclose(f.eigenvalues, [1.0, -2.0])


def test_sym_eig_offdiagonal():
    # characteristic polynomial t^2 - 1
    f = sym_eig(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(f.eigenvalues, [1.0, -1.0])


def test_sym_eig_identity_convention():
    f = sym_eig(np.eye(3))
    assert np.allclose(f.eigenvalues, [1.0, 1.0, 1.0])
    assert np.allclose(f.U, np.eye(3))


def test_sym_eig_rejects_asymmetric():
    with pytest.raises(ContractViolation):
        sym_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_sym_eig_reconstruction():
    rng = np.random.default_rng(3)
    for _ in range(50):
        A = rng.standard_normal((5, 5))
        X = A + A.T
        f = sym_eig(X)
        assert frobenius(f.U @ np.diag(f.eigenvalues) @ f.U.T - X) <= 1e-10 * max(1.0, frobenius(X))


def test_fd_gradient_square():
    g = fd_gradient(lambda x: x[0] ** 2, np.array([3.0]), h=1e-5)
    assert abs(g[0] - 6.0) <= 1e-8


def test_fd_gradient_constant():
    g = fd_gradient(lambda x: 7.0, np.array([1.0, -2.0]))
    assert np.allclose(g, 0.0)


def test_fd_gradient_product():
    g = fd_gradient(lambda x: x[0] * x[1], np.array([1.0, 2.0]), h=1e-5)
    assert np.allclose(g, [2.0, 1.0], atol=1e-8)


@pytest.mark.parametrize("richardson", [False, True])
def test_fd_gradient_cubics(richardson):
    rng = np.random.default_rng(4)
    for _ in range(20):
        c = rng.standard_normal(4)
        x = rng.uniform(-2, 2, size=3)

        def poly(p):
            return c[0] * p[0] ** 3 + c[1] * p[1] ** 2 * p[2] + c[2] * p[0] * p[1] + c[3] * p[2]

        grad = np.array([
            3 * c[0] * x[0] ** 2 + c[2] * x[1],
            2 * c[1] * x[1] * x[2] + c[2] * x[0],
            c[1] * x[1] ** 2 + c[3],
        ])
        assert np.allclose(fd_gradient(poly, x, richardson=richardson), grad, atol=1e-6)


def test_fd_gradient_nonfinite_field():
    with pytest.raises(ContractViolation):
        fd_gradient(lambda x: float("nan"), np.array([0.0]))


def test_fd_jacobian_linear_map():
    A = np.array([[1.0, 2.0], [3.0, 4.0], [0.0, 1.0]])
    J = fd_jacobian(lambda x: A @ x, np.array([0.3, -0.7]))
    assert np.allclose(J, A, atol=1e-8)


def test_projector_single_axis():
    P = orthogonal_projector([np.array([1.0, 0.0])])
    assert np.allclose(P, np.diag([1.0, 0.0]))


def test_projector_empty_basis():
    P = orthogonal_projector([], dim=3)
    assert np.allclose(P, np.zeros((3, 3)))


def test_projector_diagonal_direction():
    P = orthogonal_projector([np.array([1.0, 1.0])])
    assert np.allclose(P, np.full((2, 2), 0.5))


def test_projector_properties_random():
    rng = np.random.default_rng(5)
    for _ in range(50):
        dim = int(rng.integers(2, 7))
        k = int(rng.integers(0, dim + 1))
        basis = [rng.standard_normal(dim) for _ in range(k)]
        # throw in a dependent vector to exercise rank revelation
        if basis:
            basis.append(basis[0] * 2.0 + basis[-1])
        P = orthogonal_projector(basis, dim=dim)
        assert frobenius(P @ P - P) <= 1e-10
        assert frobenius(P - P.T) <= 1e-12
        eigs = np.linalg.eigvalsh(P)
        assert np.all((np.abs(eigs) < 1e-9) | (np.abs(eigs - 1) < 1e-9))


def test_random_orthogonal_is_orthogonal():
    Q = random_orthogonal(5, np.random.default_rng(6))
    assert frobenius(Q.T @ Q - np.eye(5)) <= 1e-12


def test_spectral_norm_matches_numpy():
    A = np.random.default_rng(7).standard_normal((4, 6))
    assert abs(spectral_norm(A) - np.linalg.norm(A, 2)) <= 1e-12


def test_power_softmin_underestimates_min():
    rng = np.random.default_rng(8)
    for _ in range(100):
        vals = rng.uniform(0.01, 5.0, size=rng.integers(1, 6))
        s = power_softmin(vals, 8)
        assert s <= vals.min() + 1e-12
        assert s >= vals.min() * 0.5  # q=8 keeps it close to the true min


def test_power_softmin_empty_and_inf():
    assert power_softmin([]) == float("inf")
    assert power_softmin([float("inf"), 2.0]) <= 2.0


def test_power_softmin_rejects_odd_order():
    with pytest.raises(ContractViolation):
        power_softmin([1.0], order=3)
