"""Achievable private-rate functionals at block length one.

Three functionals share one report type:

* ``theorem1_rate`` -- the side-information rate for an ensemble of joint
  signal/reference states constrained only on its *average* reference
  marginal: I(U:BB') - max(I(U:EE'), I(U:A')).  The I(U:A') term is the
  price of relaxing the per-letter marginal constraint to an average one
  (Gelfand-Pinsker style coding).
* ``trivial_rate`` -- modulations applied directly to the shared resource,
  then fed through the channel: I(U:BB') - I(U:EE').
* ``unassisted_rate`` -- plain wiretap coding with no resource:
  I(U:B) - I(U:E).

All functionals evaluate exactly one channel use; multi-letter evaluation
is the caller's job (tensorize the channel and resource explicitly).
Rates are reported in bits and may be negative; the operational rate is
max(0, rate).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channels import CqEnsemble, QuantumChannel, ResourceState, apply, cq_state
from .entropic import mutual_information
from .qcore import (
    DensityOperator,
    LabeledSpace,
    ValidationError,
    hermitian_trace_norm,
    partial_trace,
)

__all__ = [
    "FEASIBILITY_THRESHOLD",
    "RateReport",
    "build_beta",
    "build_gamma",
    "marginal_constraint_residual",
    "theorem1_rate",
    "trivial_rate",
    "unassisted_rate",
    "classical_embed",
]

# An ensemble whose average-marginal residual is below this counts as
# feasible; rates are still computed and reported above it.
FEASIBILITY_THRESHOLD = 1e-6

_MODES = ("theorem1", "trivial", "unassisted")


@dataclass(frozen=True)
class RateReport:
    """Decomposition of a rate value into its mutual-information parts."""

    i_u_bb: float
    i_u_ee: float
    i_u_aprime: float
    rate: float
    constraint_residual: float
    mode: str

    def __post_init__(self) -> None:
        if self.mode not in _MODES:
            raise ValidationError(f"mode must be one of {_MODES}, got {self.mode!r}")
        if self.constraint_residual < 0:
            raise ValidationError("constraint_residual must be nonnegative")
        if self.mode == "theorem1":
            want = self.i_u_bb - max(self.i_u_ee, self.i_u_aprime)
        else:
            if self.i_u_aprime != 0.0:
                raise ValidationError(f"{self.mode} mode reports i_u_aprime = 0")
            want = self.i_u_bb - self.i_u_ee
        if abs(self.rate - want) > 1e-12:
            raise ValidationError(
                f"rate {self.rate} inconsistent with components (expected {want})"
            )

    @property
    def feasible(self) -> bool:
        return self.constraint_residual <= FEASIBILITY_THRESHOLD

    def summary(self) -> str:
        return (
            f"mode={self.mode} rate={self.rate:.6f} bits "
            f"[I(U:BB')={self.i_u_bb:.6f} I(U:EE')={self.i_u_ee:.6f} "
            f"I(U:A')={self.i_u_aprime:.6f} residual={self.constraint_residual:.3e}] "
            f"(operational rate is max(0, rate))"
        )


def _signal_labels(ens: CqEnsemble, res: ResourceState) -> list[str]:
    aux = res.aux_label
    labels = list(ens.space.labels)
    if aux not in labels:
        raise ValidationError(
            f"ensemble member space {labels} lacks the reference factor {aux!r}"
        )
    if ens.space.dim_of(aux) != res.phi0.space.dim_of(aux):
        raise ValidationError(
            f"reference factor dimension {ens.space.dim_of(aux)} != "
            f"resource copy dimension {res.phi0.space.dim_of(aux)}"
        )
    return [lab for lab in labels if lab != aux]


def build_beta(ens: CqEnsemble, u_label: str = "U") -> DensityOperator:
    """cq-state of the signal/reference ensemble on (U, members)."""
    return cq_state(ens, label=u_label)


def build_gamma(
    ens: CqEnsemble,
    channel: QuantumChannel,
    res: ResourceState,
    u_label: str = "U",
) -> DensityOperator:
    """cq-state after pushing every member through channel x resource channel."""
    signal = _signal_labels(ens, res)
    dims = tuple(ens.space.dim_of(lab) for lab in signal)
    if dims != channel.input_space.dims:
        raise ValidationError(
            f"signal factors {signal} have dims {dims}, channel expects {channel.input_space.dims}"
        )
    members = []
    for s in ens.states:
        out = apply(channel, s, on=signal)
        out = apply(res.z_channel, out, on=[res.aux_label])
        members.append(out)
    return cq_state(CqEnsemble(ens.labels, ens.probs, members), label=u_label)


def marginal_constraint_residual(ens: CqEnsemble, res: ResourceState) -> float:
    """Trace norm of (average reference marginal) - (resource marginal)."""
    aux = res.aux_label
    _signal_labels(ens, res)  # validates presence and dimension
    avg = sum(
        q * partial_trace(s, {aux}).matrix for q, s in zip(ens.probs, ens.states)
    )
    return hermitian_trace_norm(avg - res.zeta_marginal.matrix)


def theorem1_rate(
    ens: CqEnsemble,
    channel: QuantumChannel,
    res: ResourceState,
    u_label: str = "U",
) -> RateReport:
    """Side-information rate of an average-constrained signal ensemble.

    When every member has the *same* reference marginal bitwise, the
    register is exactly product with the reference factor and I(U:A') is
    reported as an exact zero (block structure, no eigensolve).
    """
    residual = marginal_constraint_residual(ens, res)
    aux = res.aux_label

    margs = [partial_trace(s, {aux}).matrix for s in ens.states]
    if all(np.array_equal(margs[0], m) for m in margs[1:]):
        i_u_aprime = 0.0
    else:
        beta = build_beta(ens, u_label)
        i_u_aprime = mutual_information(beta, {u_label}, {aux}).value

    gamma = build_gamma(ens, channel, res, u_label)
    bob = {channel.output_space.labels[0], res.bob_label}
    eve = {channel.output_space.labels[1], res.eve_label}
    i_u_bb = mutual_information(gamma, {u_label}, bob).value
    i_u_ee = mutual_information(gamma, {u_label}, eve).value
    return RateReport(
        i_u_bb=i_u_bb,
        i_u_ee=i_u_ee,
        i_u_aprime=i_u_aprime,
        rate=i_u_bb - max(i_u_ee, i_u_aprime),
        constraint_residual=residual,
        mode="theorem1",
    )


def trivial_rate(
    probs: Sequence[float],
    modulations: Sequence[QuantumChannel],
    channel: QuantumChannel,
    res: ResourceState,
    u_label: str = "U",
) -> RateReport:
    """Rate of modulations applied directly to the shared resource.

    Each modulation consumes Alice's share and produces the channel input;
    the resource's other shares ride along to Bob and Eve.
    """
    if len(probs) != len(modulations) or not modulations:
        raise ValidationError("need matching, non-empty probs and modulations")
    alice = res.alice_label
    d_alice = res.zeta.space.dim_of(alice)
    members = []
    avg_marg = np.zeros((res.phi0.space.dim_of(res.aux_label),) * 2, dtype=np.complex128)
    for q, mod in zip(probs, modulations):
        if mod.input_space.dims != (d_alice,):
            raise ValidationError(
                f"modulation input dims {mod.input_space.dims} != Alice share dimension {d_alice}"
            )
        if mod.output_space.dims != channel.input_space.dims:
            raise ValidationError(
                f"modulation output dims {mod.output_space.dims} != "
                f"channel input dims {channel.input_space.dims}"
            )
        w = apply(mod, res.zeta, on=[alice])  # (Bob', Eve', signal)
        members.append(apply(channel, w, on=list(mod.output_space.labels)))
        eta = apply(mod, res.phi0, on=[alice])  # (reference copy, signal)
        avg_marg = avg_marg + q * partial_trace(eta, {res.aux_label}).matrix
    residual = hermitian_trace_norm(avg_marg - res.zeta_marginal.matrix)

    gamma = cq_state(CqEnsemble(list(range(len(members))), probs, members), label=u_label)
    bob = {channel.output_space.labels[0], res.bob_label}
    eve = {channel.output_space.labels[1], res.eve_label}
    i_u_bb = mutual_information(gamma, {u_label}, bob).value
    i_u_ee = mutual_information(gamma, {u_label}, eve).value
    return RateReport(
        i_u_bb=i_u_bb,
        i_u_ee=i_u_ee,
        i_u_aprime=0.0,
        rate=i_u_bb - i_u_ee,
        constraint_residual=residual,
        mode="trivial",
    )


def unassisted_rate(
    ens: CqEnsemble, channel: QuantumChannel, u_label: str = "U"
) -> RateReport:
    """Plain single-letter wiretap rate I(U:B) - I(U:E)."""
    if ens.space.dims != channel.input_space.dims:
        raise ValidationError(
            f"ensemble member dims {ens.space.dims} != channel input dims "
            f"{channel.input_space.dims}"
        )
    members = [apply(channel, s, on=list(ens.space.labels)) for s in ens.states]
    gamma = cq_state(CqEnsemble(ens.labels, ens.probs, members), label=u_label)
    bob = {channel.output_space.labels[0]}
    eve = {channel.output_space.labels[1]}
    i_u_bb = mutual_information(gamma, {u_label}, bob).value
    i_u_ee = mutual_information(gamma, {u_label}, eve).value
    return RateReport(
        i_u_bb=i_u_bb,
        i_u_ee=i_u_ee,
        i_u_aprime=0.0,
        rate=i_u_bb - i_u_ee,
        constraint_residual=0.0,
        mode="unassisted",
    )


def classical_embed(
    pmf: np.ndarray, labels: tuple[str, str, str] = ("Ap", "Bp", "Ep")
) -> DensityOperator:
    """Diagonal embedding of a joint pmf over X x Y x Z as a resource state."""
    p = np.asarray(pmf, dtype=float)
    if p.ndim != 3:
        raise ValidationError(f"pmf must be a 3-way array, got shape {p.shape}")
    if np.any(p < 0):
        raise ValidationError(f"pmf has negative entries (min {p.min():.3e})")
    if abs(p.sum() - 1.0) > 1e-12:
        raise ValidationError(f"pmf sums to {p.sum():.15g}, not 1")
    space = LabeledSpace.of(
        (labels[0], p.shape[0]), (labels[1], p.shape[1]), (labels[2], p.shape[2])
    )
    return DensityOperator(space, np.diag(p.reshape(-1)).astype(np.complex128), validate=False)
