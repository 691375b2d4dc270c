"""Shared random generators and qubit fixtures for the test suite.

numpy's eigvalsh is used here only as an independent spectral oracle so
that the package's own Jacobi eigensolver never certifies its own output.
"""

import numpy as np

import retroops as r


def rng(seed):
    return np.random.default_rng(seed)


def rand_matrix(gen, n):
    return gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))


def rand_hermitian(gen, n):
    m = rand_matrix(gen, n)
    return (m + m.conj().T) / 2.0


def rand_psd(gen, n):
    m = rand_matrix(gen, n)
    return m @ m.conj().T


def rand_unitary(gen, n):
    q, rr = np.linalg.qr(rand_matrix(gen, n))
    return q * (np.diag(rr) / np.abs(np.diag(rr)))


def rand_projector(gen, n, rank=None):
    if rank is None:
        rank = int(gen.integers(1, n))
    u = rand_unitary(gen, n)
    cols = u[:, :rank]
    return cols @ cols.conj().T


def rand_superop(gen, n):
    """A generic superoperator with no structure at all."""
    return r.from_tensor(rand_matrix(gen, n * n))


def rand_cp(gen, n, k=None):
    """A random completely positive map from a few random Kraus matrices."""
    if k is None:
        k = int(gen.integers(1, 4))
    return r.from_kraus([rand_matrix(gen, n) for _ in range(k)])


def rand_operation(gen, n, k=None):
    """A random CP map rescaled until both Loewner bounds hold."""
    a = rand_cp(gen, n, k)
    eye = np.eye(n)
    out_img = r.apply(a, eye)
    in_img = r.apply(r.adjoint(a), eye)
    top = max(
        np.linalg.eigvalsh(out_img).max(),
        np.linalg.eigvalsh(in_img).max(),
        1.0,
    )
    return r.scale(a, 1.0 / (top * (1.0 + 1e-12)))


def rand_noncp(gen, n):
    """A superoperator certified (by the numpy oracle) to have a negative
    Choi eigenvalue, hence not completely positive."""
    while True:
        a = rand_superop(gen, n)
        choi = r.reshuffle(a).mat
        choi = (choi + choi.conj().T) / 2.0
        vals = np.linalg.eigvalsh(choi)
        if vals[0] < -1e-6 * max(1.0, abs(vals[-1])):
            return r.from_tensor(r.reshuffle(r.from_tensor(choi)).mat)


def rand_resolution(gen, n, k):
    """Operations summing to a trivial map: a random-unitary channel split
    into ``k`` weighted unitary summands."""
    w = gen.dirichlet(np.ones(k))
    return [r.scale(r.unitary(rand_unitary(gen, n)), wk) for wk in w]


def luders_resolution(gen, n):
    """The projecting operations of a random orthonormal basis."""
    u = rand_unitary(gen, n)
    return [
        r.projecting(np.outer(u[:, j], u[:, j].conj())) for j in range(n)
    ]


# Qubit fixtures: Z and X eigenprojectors and their Lüders operations.
PZP = np.array([[1, 0], [0, 0]], dtype=complex)
PZM = np.array([[0, 0], [0, 1]], dtype=complex)
PXP = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
PXM = np.array([[0.5, -0.5], [-0.5, 0.5]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def qubit_ops():
    return {
        "pz+": r.projecting(PZP),
        "pz-": r.projecting(PZM),
        "px+": r.projecting(PXP),
        "px-": r.projecting(PXM),
    }


def z_instrument():
    return r.make_instrument({"+": r.projecting(PZP), "-": r.projecting(PZM)}, name="Z")


def x_instrument():
    return r.make_instrument({"+": r.projecting(PXP), "-": r.projecting(PXM)}, name="X")
