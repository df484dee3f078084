"""Finite-blocklength Monte Carlo simulation of random binned wiretap codes.

The experiment follows the random-coding recipe behind the achievable-rate
functional: draw M*S codewords i.i.d. from the ensemble distribution, group
them into M bins of size S, modulate a whole bin as the uniform mixture of
its codeword states, decode Bob's bin-averaged outputs with the pretty-good
measurement, and measure

* lambda_hat -- one minus the PGM success probability (decoding error),
* mu_hat     -- the average trace norm between Eve's per-message state and
  the message-independent reference (the one-letter Eve marginal tensored
  to block length),
* the average deviation of the reference-side marginal from its target and
  the trace-norm cost of the Uhlmann repair that removes it.

The decoder choice is a design decision: the PGM stands in for the abstract
decoder of the coding theorem.  Reported leakage uses the fixed reference
state, so it upper-bounds the best-reference leakage.  Codeword sampling is
not restricted to typical sequences.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass, field
from functools import reduce
from itertools import product
from typing import Sequence

import numpy as np
from scipy import stats as scipy_stats

from .channels import CqEnsemble, QuantumChannel, ResourceState, apply
from .qcore import (
    DEFAULT_TOL,
    DensityOperator,
    LabeledSpace,
    ResourceLimitError,
    Tolerances,
    ValidationError,
    hermitian_trace_norm,
    partial_trace,
    uhlmann_fixup,
)
from .rates import theorem1_rate
from .scenario import Scenario

__all__ = [
    "DEFAULT_MAX_DIM",
    "max_dim_cap",
    "Codebook",
    "CodeParams",
    "LeakageStats",
    "SimReport",
    "code_parameters",
    "sample_codebook",
    "symbol_frequencies",
    "codebook_chi_square",
    "pgm_decoder",
    "pgm_success",
    "leakage",
    "exact_mixture_leakage",
    "marginal_residual_and_fixup",
    "run_experiment",
]

DEFAULT_MAX_DIM = 4096
DEFAULT_WORD_CAP = 50_000_000


def max_dim_cap() -> int:
    """Per-side dimension cap; override with WIRETAP_MAX_DIM."""
    value = os.environ.get("WIRETAP_MAX_DIM")
    if value is None:
        return DEFAULT_MAX_DIM
    try:
        cap = int(value)
    except ValueError:
        raise ValidationError(f"WIRETAP_MAX_DIM={value!r} is not an integer") from None
    if cap < 1:
        raise ValidationError(f"WIRETAP_MAX_DIM={cap} must be positive")
    return cap


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class Codebook:
    """M x S codewords of length n, sampled i.i.d. from the ensemble law."""

    n: int
    M: int
    S: int
    words: np.ndarray  # (M, S, n) integer indices into the ensemble labels
    seed: int

    def __post_init__(self) -> None:
        if self.words.shape != (self.M, self.S, self.n):
            raise ValidationError(
                f"words shape {self.words.shape} != ({self.M}, {self.S}, {self.n})"
            )


@dataclass(frozen=True)
class CodeParams:
    """Message and bin counts plus the real-valued exponents behind them.

    The exponents are reported alongside the rounded integers so rounding
    is visible at small block lengths; ``rate`` is the realized log2(M)/n.
    """

    M: int
    S: int
    rate: float
    m_exponent: float
    s_exponent: float
    ms_exponent: float
    degenerate: bool


@dataclass(frozen=True)
class LeakageStats:
    average: float
    per_message_max: float


@dataclass(frozen=True)
class SimReport:
    """Per-blocklength summary of the Monte Carlo runs."""

    n: int
    M: int
    S: int
    rate: float
    lambda_hat: float
    mu_hat: float
    marginal_residual: float
    fixup_cost: float
    trials: int
    ci_halfwidth: float
    lambda_trials: tuple[float, ...] = field(default_factory=tuple)
    mu_trials: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if not 0.0 <= self.lambda_hat <= 1.0:
            raise ValidationError(f"lambda_hat {self.lambda_hat} outside [0, 1]")
        if not 0.0 <= self.mu_hat <= 2.0:
            raise ValidationError(f"mu_hat {self.mu_hat} outside [0, 2]")
        if not 0.0 <= self.fixup_cost <= 2.0:
            raise ValidationError(f"fixup_cost {self.fixup_cost} outside [0, 2]")
        if self.marginal_residual < 0 or self.trials < 1 or self.ci_halfwidth < 0:
            raise ValidationError("negative residual, trial count or CI halfwidth")


def code_parameters(
    ens: CqEnsemble,
    channel: QuantumChannel,
    res: ResourceState,
    n: int,
    epsilon: float,
    rate: float | None = None,
) -> CodeParams:
    """Message and bin counts for block length ``n`` at slack ``epsilon``.

    By default M = round(2^(n rate - 2 n eps)) with the rate taken from the
    one-letter functional; an explicit ``rate`` overrides the exponent to
    M = round(2^(n rate)) (used to hold a code above or below the
    functional).  S = round(2^(n max(I(U:EE'), I(U:A')) + n eps)) always.
    """
    if epsilon <= 0:
        raise ValidationError("epsilon must be positive")
    rep = theorem1_rate(ens, channel, res)
    i_max = max(rep.i_u_ee, rep.i_u_aprime)
    s_exponent = n * (i_max + epsilon)
    if rate is None:
        m_exponent = n * (rep.rate - 2 * epsilon)
    else:
        m_exponent = n * rate
    m = max(1, _round_half_up(2.0**m_exponent))
    s = max(1, _round_half_up(2.0**s_exponent))
    degenerate = m == 1 and m_exponent <= 0.0
    if degenerate and rate is None:
        warnings.warn(
            f"rate - 2*epsilon <= 0 at n={n}: degenerate single-message code",
            stacklevel=2,
        )
    return CodeParams(
        M=m,
        S=s,
        rate=math.log2(m) / n,
        m_exponent=m_exponent,
        s_exponent=s_exponent,
        ms_exponent=n * (rep.i_u_bb - epsilon),
        degenerate=degenerate,
    )


def sample_codebook(
    ens: CqEnsemble, n: int, M: int, S: int, seed: int, word_cap: int = DEFAULT_WORD_CAP
) -> Codebook:
    """Draw the (M, S, n) codeword array i.i.d. from the ensemble law."""
    total = M * S * n
    if total > word_cap:
        raise ResourceLimitError(f"codebook would hold {total} symbols (> cap {word_cap})")
    gen = np.random.default_rng(seed)
    p = np.asarray(ens.probs, dtype=float)
    p = p / p.sum()
    words = gen.choice(len(ens), size=(M, S, n), p=p)
    return Codebook(n=n, M=M, S=S, words=words, seed=seed)


def symbol_frequencies(codebook: Codebook, num_symbols: int) -> np.ndarray:
    counts = np.bincount(codebook.words.reshape(-1), minlength=num_symbols)
    return counts / codebook.words.size


def codebook_chi_square(codebook: Codebook, probs: Sequence[float]) -> tuple[float, float]:
    """Chi-square sanity check of empirical symbol counts against the law."""
    probs = np.asarray(probs, dtype=float)
    counts = np.bincount(codebook.words.reshape(-1), minlength=len(probs)).astype(float)
    keep = probs > 0
    expected = probs[keep] / probs[keep].sum() * counts.sum()
    stat, pvalue = scipy_stats.chisquare(counts[keep], expected)
    return float(stat), float(pvalue)


def pgm_decoder(
    states: Sequence[DensityOperator],
    priors: Sequence[float] | None = None,
    support_cutoff: float = 1e-12,
) -> list[np.ndarray]:
    """Pretty-good-measurement POVM for the given output states.

    Elements are avg^{-1/2} (p_m rho_m) avg^{-1/2} with the inverse square
    root taken on the support of the prior-weighted average state; they sum
    to the support projector (<= identity).
    """
    if not states:
        raise ValidationError("pgm_decoder needs at least one state")
    m_count = len(states)
    if priors is None:
        priors = np.full(m_count, 1.0 / m_count)
    else:
        priors = np.asarray(priors, dtype=float)
        if priors.shape != (m_count,) or np.any(priors < 0):
            raise ValidationError("priors must be nonnegative, one per state")
    avg = sum(p * s.matrix for p, s in zip(priors, states))
    if abs(np.trace(avg)) < support_cutoff:
        raise ValidationError("average state is zero; nothing to decode")
    w, v = np.linalg.eigh(avg)
    keep = w > support_cutoff
    inv_sqrt = (v[:, keep] / np.sqrt(w[keep])) @ v[:, keep].conj().T
    return [inv_sqrt @ (p * s.matrix) @ inv_sqrt for p, s in zip(priors, states)]


def pgm_success(
    states: Sequence[DensityOperator],
    povm: Sequence[np.ndarray],
    priors: Sequence[float] | None = None,
) -> float:
    """Success probability sum_m p_m Tr(rho_m D_m)."""
    m_count = len(states)
    if priors is None:
        priors = np.full(m_count, 1.0 / m_count)
    total = sum(
        float(np.real(np.trace(s.matrix @ d))) * p for p, s, d in zip(priors, states, povm)
    )
    return min(max(total, 0.0), 1.0)


# ---------------------------------------------------------------------------
# Block-length helpers
# ---------------------------------------------------------------------------


def _power_space(space: LabeledSpace, n: int) -> LabeledSpace:
    factors = []
    for i in range(n):
        for lab, d in space.factors:
            factors.append((f"{lab}@{i}", d))
    return LabeledSpace(tuple(factors))


def _kron_chain(mats: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, mats)


def _member_outputs(
    ens: CqEnsemble, channel: QuantumChannel, res: ResourceState
) -> tuple[list[DensityOperator], list[DensityOperator]]:
    """One-letter Bob-side and Eve-side output states per ensemble symbol."""
    signal = [lab for lab in ens.space.labels if lab != res.aux_label]
    bob = {channel.output_space.labels[0], res.bob_label}
    eve = {channel.output_space.labels[1], res.eve_label}
    bobs, eves = [], []
    for s in ens.states:
        g = apply(channel, s, on=signal)
        g = apply(res.z_channel, g, on=[res.aux_label])
        bobs.append(partial_trace(g, bob))
        eves.append(partial_trace(g, eve))
    return bobs, eves


def _bin_average(matrices: list[np.ndarray], words: np.ndarray) -> list[np.ndarray]:
    """Per-message uniform mixture of Kronecker products along each bin row."""
    m_count, s_count, _ = words.shape
    out = []
    for m in range(m_count):
        acc = None
        for s in range(s_count):
            prod_mat = _kron_chain([matrices[u] for u in words[m, s]])
            acc = prod_mat if acc is None else acc + prod_mat
        out.append(acc / s_count)
    return out


def leakage(
    codebook: Codebook,
    ens: CqEnsemble,
    channel: QuantumChannel,
    res: ResourceState,
    cap: int | None = None,
) -> LeakageStats:
    """Average and worst-case trace norm between Eve's per-message states
    and the block-length power of the one-letter Eve marginal."""
    cap = cap or max_dim_cap()
    _, eves = _member_outputs(ens, channel, res)
    d_eve = eves[0].dim
    if d_eve**codebook.n > cap:
        raise ResourceLimitError(
            f"Eve-side dimension {d_eve}^{codebook.n} = {d_eve**codebook.n} exceeds cap {cap}"
        )
    reference = _kron_chain(
        [sum(q * e.matrix for q, e in zip(ens.probs, eves))] * codebook.n
    )
    eve_mats = [e.matrix for e in eves]
    dists = [
        hermitian_trace_norm(bin_avg - reference)
        for bin_avg in _bin_average(eve_mats, codebook.words)
    ]
    return LeakageStats(average=float(np.mean(dists)), per_message_max=float(np.max(dists)))


def exact_mixture_leakage(
    ens: CqEnsemble,
    channel: QuantumChannel,
    res: ResourceState,
    n: int,
    cap: int | None = None,
) -> float:
    """Distance of the exactly weighted all-words mixture from the reference.

    This is the S -> infinity sanity case: the full mixture over all length-n
    words with their product weights reproduces the reference state.
    """
    cap = cap or max_dim_cap()
    _, eves = _member_outputs(ens, channel, res)
    d_eve = eves[0].dim
    if d_eve**n > cap:
        raise ResourceLimitError(f"Eve-side dimension {d_eve**n} exceeds cap {cap}")
    eve_mats = [e.matrix for e in eves]
    probs = np.asarray(ens.probs, dtype=float)
    mixture = np.zeros((d_eve**n,) * 2, dtype=np.complex128)
    for word in product(range(len(ens)), repeat=n):
        weight = float(np.prod(probs[list(word)]))
        if weight == 0.0:
            continue
        mixture += weight * _kron_chain([eve_mats[u] for u in word])
    reference = _kron_chain([sum(q * e for q, e in zip(probs, eve_mats))] * n)
    return hermitian_trace_norm(mixture - reference)


def marginal_residual_and_fixup(
    codebook: Codebook,
    ens: CqEnsemble,
    res: ResourceState,
    cap: int | None = None,
    tol: Tolerances = DEFAULT_TOL,
) -> tuple[float, float]:
    """Reference-marginal deviation of the bin-averaged signal states and
    the trace-norm cost of repairing it exactly.

    Builds each message's bin-averaged joint state, measures how far its
    reference-side marginal sits from the block power of the resource
    marginal, applies the Uhlmann repair, and checks that the average cost
    satisfies the 4*sqrt(residual) budget.
    """
    cap = cap or max_dim_cap()
    n = codebook.n
    d_mem = ens.space.dim
    if d_mem**n > cap:
        raise ResourceLimitError(
            f"signal-side dimension {d_mem}^{n} = {d_mem**n} exceeds cap {cap}"
        )
    member_space_n = _power_space(ens.space, n)
    aux_labels = [f"{res.aux_label}@{i}" for i in range(n)]
    target_space = _power_space(res.zeta_marginal.space, n).relabeled(
        {f"{res.alice_label}@{i}": aux_labels[i] for i in range(n)}
    )
    target = DensityOperator(
        target_space, _kron_chain([res.zeta_marginal.matrix] * n), validate=False
    )
    member_mats = [s.matrix for s in ens.states]
    residuals, costs = [], []
    for avg_mat in _bin_average(member_mats, codebook.words):
        eta_tilde = DensityOperator(member_space_n, avg_mat, validate=False).clamped(tol)
        marg = partial_trace(eta_tilde, set(aux_labels))
        residuals.append(hermitian_trace_norm(marg.matrix - target.matrix))
        eta = uhlmann_fixup(eta_tilde, target, aux_labels, tol=tol)
        costs.append(hermitian_trace_norm(eta.matrix - eta_tilde.matrix))
    residual = float(np.mean(residuals))
    cost = float(np.mean(costs))
    if cost > 4.0 * math.sqrt(residual) + 1e-9:
        raise ValidationError(
            f"repair cost {cost:.3e} exceeds the 4*sqrt(residual) budget "
            f"({4.0 * math.sqrt(residual):.3e})"
        )
    return residual, cost


def _trial_seed(seed: int, n: int, trial: int) -> int:
    return int(np.random.SeedSequence([seed, n, trial]).generate_state(1)[0])


# ---------------------------------------------------------------------------
# Diagonal (classical) fast path
# ---------------------------------------------------------------------------


def _diag_or_none(mats: Sequence[np.ndarray]) -> list[np.ndarray] | None:
    """Real diagonals of exactly-diagonal matrices, or None."""
    vecs = []
    for m in mats:
        d = np.diagonal(m)
        if np.any(m != np.diag(d)) or np.any(d.imag != 0.0):
            return None
        vecs.append(np.ascontiguousarray(d.real))
    return vecs


def _bin_average_vec(vecs: list[np.ndarray], words: np.ndarray) -> list[np.ndarray]:
    m_count, s_count, _ = words.shape
    out = []
    for m in range(m_count):
        acc = None
        for s in range(s_count):
            prod_vec = _kron_chain([vecs[u] for u in words[m, s]])
            acc = prod_vec if acc is None else acc + prod_vec
        out.append(acc / s_count)
    return out


def _pgm_error_diag(bin_vecs: list[np.ndarray]) -> float:
    """Decoding error of the PGM for diagonal states under a uniform prior.

    For commuting states the PGM elements are the likelihood ratios
    p v_m / avg on the support of the average; the success probability is
    the same expression the dense path computes.
    """
    m_count = len(bin_vecs)
    prior = 1.0 / m_count
    avg = sum(bin_vecs) * prior
    mask = avg > 0.0
    succ = 0.0
    for v in bin_vecs:
        ratio = np.zeros_like(avg)
        ratio[mask] = prior * v[mask] / avg[mask]
        succ += prior * float(np.dot(v, ratio))
    return 1.0 - min(max(succ, 0.0), 1.0)


def run_experiment(
    scenario: Scenario,
    n_list: Sequence[int],
    epsilon: float,
    trials: int,
    seed: int,
    rate: float | None = None,
    cap: int | None = None,
) -> list[SimReport]:
    """Run the random-code experiment for each block length in ``n_list``.

    Deterministic in ``seed``: each (block length, trial) pair owns a
    derived seed.  All requested block lengths are checked against the
    dimension caps up front.
    """
    if scenario.ensemble is None:
        raise ValidationError("code simulation needs a scenario with an ensemble")
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    cap = cap or max_dim_cap()
    ens = scenario.ensemble
    channel = scenario.channel
    res = scenario.resource_state()

    bobs, eves = _member_outputs(ens, channel, res)
    d_bob, d_eve, d_mem = bobs[0].dim, eves[0].dim, ens.space.dim
    for n in n_list:
        sizes = {"bob": d_bob**n, "eve": d_eve**n, "signal": d_mem**n}
        over = {k: v for k, v in sizes.items() if v > cap}
        if over:
            raise ResourceLimitError(
                f"block length {n} exceeds the dimension cap {cap}: "
                + ", ".join(f"{k} side {v}" for k, v in over.items())
            )

    bob_mats = [b.matrix for b in bobs]
    eve_mats = [e.matrix for e in eves]
    member_mats = [s.matrix for s in ens.states]

    # Classical instances (all diagonal matrices) run on probability
    # vectors: same quantities, no dense eigensolves.  The dense path is
    # the reference implementation; the two agree exactly on diagonal
    # inputs (see the test suite).
    bob_diag = _diag_or_none(bob_mats)
    eve_diag = _diag_or_none(eve_mats)
    member_diag = _diag_or_none(member_mats)
    marg_target_diag = _diag_or_none([res.zeta_marginal.matrix])
    diagonal = None
    if None not in (bob_diag, eve_diag, member_diag, marg_target_diag):
        d_aux = res.phi0.space.dim_of(res.aux_label)
        marg_diag = [v.reshape(-1, d_aux).sum(axis=0) for v in member_diag]
        diagonal = (bob_diag, eve_diag, marg_diag, marg_target_diag[0])

    bob_space_cache: dict[int, LabeledSpace] = {}
    reports = []
    for n in n_list:
        params = code_parameters(ens, channel, res, n, epsilon, rate)
        if params.degenerate:
            warnings.warn(f"degenerate single-message code at n={n}", stacklevel=2)
        lams, mus, resids, costs = [], [], [], []
        for t in range(trials):
            cb = sample_codebook(ens, n, params.M, params.S, _trial_seed(seed, n, t))
            if diagonal is not None:
                b_diag, e_diag, m_diag, t_diag = diagonal
                lams.append(_pgm_error_diag(_bin_average_vec(b_diag, cb.words)))
                eve_ref = _kron_chain(
                    [sum(q * v for q, v in zip(ens.probs, e_diag))] * n
                )
                mus.append(
                    float(
                        np.mean(
                            [
                                np.abs(b - eve_ref).sum()
                                for b in _bin_average_vec(e_diag, cb.words)
                            ]
                        )
                    )
                )
                target_vec = _kron_chain([t_diag] * n)
                r_list = [
                    float(np.abs(m - target_vec).sum())
                    for m in _bin_average_vec(m_diag, cb.words)
                ]
                r = float(np.mean(r_list))
                if r <= 1e-12:
                    c = 0.0
                else:
                    r, c = marginal_residual_and_fixup(cb, ens, res, cap=cap)
                resids.append(r)
                costs.append(c)
            else:
                bob_space = bob_space_cache.setdefault(
                    n, LabeledSpace(tuple((f"b{i}", d_bob) for i in range(n)))
                )
                bin_states = [
                    DensityOperator(bob_space, m, validate=False).clamped()
                    for m in _bin_average(bob_mats, cb.words)
                ]
                povm = pgm_decoder(bin_states)
                lams.append(1.0 - pgm_success(bin_states, povm))
                mus.append(leakage(cb, ens, channel, res, cap=cap).average)
                r, c = marginal_residual_and_fixup(cb, ens, res, cap=cap)
                resids.append(r)
                costs.append(c)
        lam_arr = np.asarray(lams)
        ci = (
            1.96 * float(lam_arr.std(ddof=1)) / math.sqrt(trials) if trials > 1 else 0.0
        )
        reports.append(
            SimReport(
                n=n,
                M=params.M,
                S=params.S,
                rate=params.rate,
                lambda_hat=float(np.clip(lam_arr.mean(), 0.0, 1.0)),
                mu_hat=float(np.mean(mus)),
                marginal_residual=float(np.mean(resids)),
                fixup_cost=float(np.mean(costs)),
                trials=trials,
                ci_halfwidth=ci,
                lambda_trials=tuple(float(x) for x in lams),
                mu_trials=tuple(float(x) for x in mus),
            )
        )
    return reports
