"""Shared helpers for building random test objects and stock instances."""

from __future__ import annotations

import numpy as np

from wiretap.channels import (
    CqEnsemble,
    QuantumChannel,
    ResourceState,
    channel_from_resource_state,
)
from wiretap.qcore import (
    DensityOperator,
    LabeledSpace,
    basis_state,
    maximally_entangled,
    tensor,
)

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def ginibre(gen: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return gen.standard_normal((rows, cols)) + 1j * gen.standard_normal((rows, cols))


def random_density_matrix(gen: np.random.Generator, dim: int, rank: int | None = None) -> np.ndarray:
    g = ginibre(gen, dim, rank or dim)
    m = g @ g.conj().T
    return m / np.trace(m)


def random_state(gen: np.random.Generator, space: LabeledSpace, rank: int | None = None) -> DensityOperator:
    return DensityOperator(space, random_density_matrix(gen, space.dim, rank))


def random_full_rank_state(
    gen: np.random.Generator, space: LabeledSpace, floor: float = 0.1
) -> DensityOperator:
    """Random state mixed with the maximally mixed state; full rank by construction."""
    d = space.dim
    m = (1.0 - floor) * random_density_matrix(gen, d) + floor * np.eye(d) / d
    return DensityOperator(space, m)


def random_pure_vector(gen: np.random.Generator, dim: int) -> np.ndarray:
    v = ginibre(gen, dim, 1).reshape(-1)
    return v / np.linalg.norm(v)


def random_pure_state(gen: np.random.Generator, space: LabeledSpace) -> DensityOperator:
    v = random_pure_vector(gen, space.dim)
    return DensityOperator(space, np.outer(v, v.conj()))


def random_unitary(gen: np.random.Generator, dim: int) -> np.ndarray:
    q, r = np.linalg.qr(ginibre(gen, dim, dim))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_kraus(gen: np.random.Generator, d_in: int, d_out: int, n_kraus: int) -> list[np.ndarray]:
    """Random CPTP Kraus family via a Stinespring isometry."""
    n_kraus = max(n_kraus, -(-d_in // d_out))  # isometry needs d_out * n_kraus >= d_in
    g = ginibre(gen, d_out * n_kraus, d_in)
    q, _ = np.linalg.qr(g)
    return [q[k * d_out : (k + 1) * d_out, :] for k in range(n_kraus)]


# ---------------------------------------------------------------------------
# Stock instances
# ---------------------------------------------------------------------------


def identity_qubit_wiretap() -> QuantumChannel:
    """Identity qubit channel to Bob with a trivial (one-dimensional) Eve."""
    return QuantumChannel(
        LabeledSpace.of(("A", 2)),
        LabeledSpace.of(("B", 2), ("E", 1)),
        [np.eye(2, dtype=complex)],
    )


def broadcast_copy_channel() -> QuantumChannel:
    """The classical-copy isometry |x> -> |x>_B |x>_E on qubits."""
    v = np.zeros((4, 2), dtype=complex)
    v[0, 0] = 1.0
    v[3, 1] = 1.0
    return QuantumChannel(LabeledSpace.of(("A", 2)), LabeledSpace.of(("B", 2), ("E", 2)), [v])


def bell_resource_state() -> ResourceState:
    """Bell pair between Alice and Bob, trivial Eve share."""
    zeta = tensor(
        maximally_entangled("Ap", "Bp", 2),
        basis_state(LabeledSpace.of(("Ep", 1)), [0]),
    )
    return channel_from_resource_state(zeta)


def superdense_ensemble() -> CqEnsemble:
    """Four Pauli-rotated Bell states on (signal, reference copy), uniform."""
    phi = maximally_entangled("A", "App", 2)
    members = []
    for name in "IXYZ":
        u = np.kron(PAULI[name], np.eye(2))
        members.append(DensityOperator(phi.space, u @ phi.matrix @ u.conj().T, validate=False))
    return CqEnsemble(list("IXYZ"), [0.25] * 4, members)


def lift_to_reference(ens: CqEnsemble, aux_label: str = "App") -> CqEnsemble:
    """Tensor a one-dimensional reference factor onto every member."""
    one = basis_state(LabeledSpace.of((aux_label, 1)), [0])
    return CqEnsemble(ens.labels, ens.probs, [tensor(s, one) for s in ens.states])
