"""Derivative-free search over signal ensembles and channels.

The search engine is a coordinate random search with shrinking steps and
independent restarts.  Every restart owns a deterministic RNG sub-stream
derived from (seed, restart index), so results are reproducible and adding
restarts can only improve the best value.  Restart 0 (and 1, where
applicable) start from structured candidates -- a discrete-Weyl modulated
reference state for the assisted problem, a computational-basis ensemble
for the unassisted one, identity/constant isometries for channel searches
-- so the optimizer never reports worse than these known-good witnesses.

Ensembles are parametrized by unnormalized purification vectors (every
member state is a partial trace of a unit vector on member x purifier) plus
probability logits, so any real coordinate vector is a valid candidate.
Channels are parametrized by Stinespring isometry coordinates; the polar
projection keeps them CPTP by construction.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from itertools import combinations_with_replacement, product
from typing import Callable, Sequence

import numpy as np

from .channels import CqEnsemble, QuantumChannel, ResourceState, apply, cq_state
from .qcore import (
    DensityOperator,
    LabeledSpace,
    ResourceLimitError,
    ValidationError,
    hermitian_trace_norm,
    maximally_mixed,
    tensor,
)
from .rates import (
    FEASIBILITY_THRESHOLD,
    RateReport,
    theorem1_rate,
    unassisted_rate,
)

__all__ = [
    "OptimizerConfig",
    "OptResult",
    "TracePoint",
    "OptimizationError",
    "GridOracleSpec",
    "optimize_theorem1",
    "optimize_unassisted",
    "optimize_channel_functional",
    "grid_oracle",
]


class OptimizationError(RuntimeError):
    """Optimization could not deliver a feasible witness; carries diagnostics."""


@dataclass(frozen=True)
class OptimizerConfig:
    """Knobs for the coordinate random search.

    ``num_labels_max=None`` resolves to the heuristic 2 * dim(signal) *
    dim(reference copy) at the call site; it caps the ensemble size searched
    over, not any provable sufficiency.  ``step_schedule`` is
    "geometric(initial, shrink, patience)": the step shrinks by ``shrink``
    after ``patience`` consecutive rejected proposals.
    """

    seed: int
    num_labels_max: int | None = None
    restarts: int = 6
    max_iters: int = 1200
    penalty_weight: float = 32.0
    step_schedule: str = "geometric(0.5,0.5,25)"
    tolerance: float = 1e-9

    def __post_init__(self) -> None:
        if self.seed < 0:
            raise ValidationError("seed must be a nonnegative integer")
        if self.num_labels_max is not None and self.num_labels_max < 1:
            raise ValidationError("num_labels_max must be positive")
        for name in ("restarts", "max_iters"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be positive")
        for name in ("penalty_weight", "tolerance"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be positive")
        _parse_schedule(self.step_schedule)


@dataclass(frozen=True)
class TracePoint:
    restart: int
    iteration: int
    value: float
    residual: float


@dataclass(frozen=True)
class OptResult:
    best_value: float
    best_ensemble: CqEnsemble | None = None
    best_channel: QuantumChannel | None = None
    report: RateReport | float | None = None
    trace: tuple[TracePoint, ...] = field(default_factory=tuple)


def _parse_schedule(text: str) -> tuple[float, float, int]:
    m = re.fullmatch(
        r"geometric\(\s*([0-9.eE+-]+)\s*,\s*([0-9.eE+-]+)\s*,\s*(\d+)\s*\)", text.strip()
    )
    if not m:
        raise ValidationError(
            f"step_schedule {text!r} not understood; expected geometric(initial,shrink,patience)"
        )
    init, shrink, patience = float(m.group(1)), float(m.group(2)), int(m.group(3))
    if not (init > 0 and 0 < shrink < 1 and patience >= 1):
        raise ValidationError(f"step_schedule {text!r} has out-of-range parameters")
    return init, shrink, patience


def _coordinate_search(
    x0: np.ndarray,
    objective: Callable[[np.ndarray], float],
    gen: np.random.Generator,
    max_iters: int,
    schedule: tuple[float, float, int],
    tolerance: float,
    on_accept: Callable[[int, float], None] | None = None,
) -> tuple[np.ndarray, float]:
    """Greedy single-coordinate random search, maximizing ``objective``."""
    step0, shrink, patience = schedule
    x = x0.copy()
    best = objective(x)
    step = step0
    stall = 0
    for it in range(max_iters):
        idx = int(gen.integers(len(x)))
        delta = step * float(gen.standard_normal())
        improved = False
        for sign in (1.0, -1.0):
            y = x.copy()
            y[idx] += sign * delta
            val = objective(y)
            if val > best:
                x, best = y, val
                improved = True
                if on_accept is not None:
                    on_accept(it, best)
                break
        if improved:
            stall = 0
        else:
            stall += 1
            if stall >= patience:
                step *= shrink
                stall = 0
                if step < tolerance:
                    break
    return x, best


# ---------------------------------------------------------------------------
# Ensemble parametrization
# ---------------------------------------------------------------------------


class _EnsembleParam:
    """Members as partial traces of unit vectors on member x purifier."""

    def __init__(self, member_space: LabeledSpace, k: int) -> None:
        self.space = member_space
        self.d = member_space.dim
        self.k = k
        self.block = 2 * self.d * self.d  # real coords of one purification vector
        self.size = k * self.block + k  # plus one logit per member

    def unpack(self, x: np.ndarray) -> CqEnsemble:
        states = []
        for u in range(self.k):
            blk = x[u * self.block : (u + 1) * self.block]
            v = blk[: self.d * self.d] + 1j * blk[self.d * self.d :]
            norm = np.linalg.norm(v)
            if norm < 1e-12:
                v = np.zeros(self.d * self.d, dtype=np.complex128)
                v[0] = 1.0
                norm = 1.0
            m = (v / norm).reshape(self.d, self.d)
            states.append(DensityOperator(self.space, m @ m.conj().T, validate=False))
        logits = x[self.k * self.block :]
        z = np.exp(logits - logits.max())
        probs = z / z.sum()
        return CqEnsemble(list(range(self.k)), probs, states)

    def pack(self, ens: CqEnsemble) -> np.ndarray:
        if len(ens) > self.k or ens.space.dim != self.d:
            raise ValidationError("ensemble does not fit this parametrization")
        x = np.zeros(self.size)
        probs = np.full(self.k, 1e-9)
        for u in range(self.k):
            if u < len(ens):
                w, v = np.linalg.eigh(ens.states[u].matrix)
                m = v * np.sqrt(np.clip(w, 0.0, None))
                probs[u] = max(float(ens.probs[u]), 1e-12)
            else:
                m = np.zeros((self.d, self.d))
                m[0, 0] = 1.0
            vec = m.reshape(-1)
            x[u * self.block : u * self.block + self.d * self.d] = vec.real
            x[u * self.block + self.d * self.d : (u + 1) * self.block] = vec.imag
        x[self.k * self.block :] = np.log(probs)
        return x

    def random(self, gen: np.random.Generator) -> np.ndarray:
        return gen.standard_normal(self.size)


def _discrete_weyl(dim: int) -> list[np.ndarray]:
    """The dim^2 shift/phase unitaries X^a Z^b."""
    omega = np.exp(2j * np.pi / dim)
    shift = np.zeros((dim, dim), dtype=np.complex128)
    for j in range(dim):
        shift[(j + 1) % dim, j] = 1.0
    phase = np.diag(omega ** np.arange(dim))
    out = []
    for a in range(dim):
        for b in range(dim):
            out.append(np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(phase, b))
    return out


def _weyl_modulated_init(
    member_space: LabeledSpace, res: ResourceState, k: int
) -> CqEnsemble | None:
    """Reference state modulated by discrete-Weyl unitaries; feasible by construction."""
    r = res.phi0.space.dim_of(res.aux_label)
    d_sig = member_space.dim // res.phi0.space.dim_of(res.aux_label)
    if d_sig != r or k < 1:
        return None
    unitaries = _discrete_weyl(r)[: min(k, r * r)]
    members = []
    eye_aux = np.eye(r)
    for u in unitaries:
        big = np.kron(u, eye_aux)
        members.append(
            DensityOperator(member_space, big @ res.phi0.matrix @ big.conj().T, validate=False)
        )
    n = len(members)
    return CqEnsemble(list(range(n)), [1.0 / n] * n, members)


def _product_basis_init(
    member_space: LabeledSpace, signal_space: LabeledSpace, res: ResourceState, k: int
) -> CqEnsemble:
    """Computational-basis signals tensored with the resource marginal."""
    d_sig = signal_space.dim
    marg = res.zeta_marginal
    n = min(k, d_sig)
    members = []
    for i in range(n):
        vec = np.zeros(d_sig, dtype=np.complex128)
        vec[i] = 1.0
        sig = DensityOperator(signal_space, np.outer(vec, vec.conj()), validate=False)
        m = np.kron(sig.matrix, marg.matrix)
        members.append(DensityOperator(member_space, m, validate=False))
    return CqEnsemble(list(range(n)), [1.0 / n] * n, members)


def _fresh_label(labels: Sequence) -> str:
    cand = "repair"
    taken = {str(lab) for lab in labels}
    i = 0
    while cand in taken:
        i += 1
        cand = f"repair{i}"
    return cand


def _project_to_feasible(
    ens: CqEnsemble, res: ResourceState, signal_space: LabeledSpace
) -> CqEnsemble:
    """Exact average-marginal repair by mixing in one corrective member.

    Finds the smallest mixing weight t such that (target - (1-t) achieved)/t
    is a state, and appends (maximally mixed signal) x that state.  The
    repaired average marginal matches the target up to matmul noise.
    """
    aux = res.aux_label
    target = res.zeta_marginal.matrix
    from .qcore import partial_trace  # local import to avoid cycle noise

    avg = sum(q * partial_trace(s, {aux}).matrix for q, s in zip(ens.probs, ens.states))
    diff = target - avg
    resid = hermitian_trace_norm(diff)
    if resid <= 1e-12:
        return ens

    def min_eig(t: float) -> float:
        return float(np.linalg.eigvalsh(avg + diff / t)[0])

    margin = 1e-14
    hi = 1.0
    lo = min(1.0, resid / 4.0)
    while lo > 1e-12 and min_eig(lo) >= margin:
        hi = lo
        lo /= 2.0
    if min_eig(hi) < margin:
        hi = 1.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if min_eig(mid) >= margin:
            hi = mid
        else:
            lo = mid
    t = hi
    corr = DensityOperator(
        res.zeta_marginal.space, avg + diff / t, validate=False
    ).clamped()
    member = tensor(
        maximally_mixed(signal_space), corr.relabeled({res.alice_label: aux})
    )
    member = DensityOperator(ens.space, member.matrix, validate=False)
    labels = list(ens.labels) + [_fresh_label(ens.labels)]
    probs = list((1.0 - t) * ens.probs) + [t]
    states = list(ens.states) + [member]
    return CqEnsemble(labels, probs, states)


# ---------------------------------------------------------------------------
# Ensemble optimizers
# ---------------------------------------------------------------------------


def optimize_theorem1(
    channel: QuantumChannel, res: ResourceState, cfg: OptimizerConfig
) -> OptResult:
    """Maximize the average-constrained side-information rate over ensembles.

    Each restart runs a penalty continuation (quadratic penalty on the
    trace-norm marginal residual, weight x4 per stage), then applies the
    exact projection and scores the projected ensemble with the true rate.
    The returned value is always the re-evaluated rate of the returned
    (feasible) witness.
    """
    r_aux = res.phi0.space.dim_of(res.aux_label)
    signal_space = channel.input_space
    member_space = signal_space.tensor(LabeledSpace.of((res.aux_label, r_aux)))
    k = cfg.num_labels_max or 2 * signal_space.dim * r_aux
    param = _EnsembleParam(member_space, k)
    schedule = _parse_schedule(cfg.step_schedule)

    inits: list[np.ndarray | None] = []
    weyl = _weyl_modulated_init(member_space, res, k)
    if weyl is not None:
        inits.append(param.pack(weyl))
    inits.append(param.pack(_product_basis_init(member_space, signal_space, res, k)))

    trace: list[TracePoint] = []
    best: tuple[float, int] | None = None
    best_ens: CqEnsemble | None = None
    best_rep: RateReport | None = None

    for restart in range(cfg.restarts):
        gen = np.random.default_rng([cfg.seed, restart])
        x = (
            inits[restart].copy()
            if restart < len(inits)
            else param.random(gen)
        )
        iters_per_stage = max(1, cfg.max_iters // 3)
        offset = 0
        for stage in range(3):
            weight = cfg.penalty_weight * (4.0**stage)
            last_eval: list[tuple[float, float]] = [(0.0, 0.0)]

            def objective(xv: np.ndarray) -> float:
                rep = theorem1_rate(param.unpack(xv), channel, res)
                last_eval[0] = (rep.rate, rep.constraint_residual)
                return rep.rate - weight * rep.constraint_residual**2

            def on_accept(it: int, _val: float, _off=offset, _last=last_eval) -> None:
                trace.append(TracePoint(restart, _off + it, _last[0][0], _last[0][1]))

            x, _ = _coordinate_search(
                x, objective, gen, iters_per_stage, schedule, cfg.tolerance, on_accept
            )
            offset += iters_per_stage

        ens = _project_to_feasible(param.unpack(x), res, signal_space)
        rep = theorem1_rate(ens, channel, res)
        trace.append(TracePoint(restart, offset, rep.rate, rep.constraint_residual))
        if rep.constraint_residual > FEASIBILITY_THRESHOLD:
            raise OptimizationError(
                f"projection left residual {rep.constraint_residual:.3e} > "
                f"{FEASIBILITY_THRESHOLD} at restart {restart}"
            )
        if best is None or rep.rate > best[0]:
            best = (rep.rate, restart)
            best_ens, best_rep = ens, rep

    assert best_ens is not None and best_rep is not None
    return OptResult(
        best_value=best_rep.rate,
        best_ensemble=best_ens,
        report=best_rep,
        trace=tuple(trace),
    )


def optimize_unassisted(channel: QuantumChannel, cfg: OptimizerConfig) -> OptResult:
    """Maximize the plain single-letter wiretap rate over input ensembles."""
    signal_space = channel.input_space
    k = cfg.num_labels_max or 2 * signal_space.dim
    param = _EnsembleParam(signal_space, k)
    schedule = _parse_schedule(cfg.step_schedule)

    basis = []
    for i in range(min(k, signal_space.dim)):
        vec = np.zeros(signal_space.dim, dtype=np.complex128)
        vec[i] = 1.0
        basis.append(DensityOperator(signal_space, np.outer(vec, vec.conj()), validate=False))
    init0 = param.pack(CqEnsemble(list(range(len(basis))), [1.0 / len(basis)] * len(basis), basis))

    trace: list[TracePoint] = []
    best: tuple[float, int] | None = None
    best_ens: CqEnsemble | None = None
    best_rep: RateReport | None = None

    def objective(xv: np.ndarray) -> float:
        return unassisted_rate(param.unpack(xv), channel).rate

    for restart in range(cfg.restarts):
        gen = np.random.default_rng([cfg.seed, restart])
        x = init0.copy() if restart == 0 else param.random(gen)
        x, val = _coordinate_search(
            x,
            objective,
            gen,
            cfg.max_iters,
            schedule,
            cfg.tolerance,
            on_accept=lambda it, v, _r=restart: trace.append(TracePoint(_r, it, v, 0.0)),
        )
        ens = param.unpack(x)
        rep = unassisted_rate(ens, channel)
        if best is None or rep.rate > best[0]:
            best = (rep.rate, restart)
            best_ens, best_rep = ens, rep

    assert best_ens is not None and best_rep is not None
    return OptResult(
        best_value=best_rep.rate,
        best_ensemble=best_ens,
        report=best_rep,
        trace=tuple(trace),
    )


# ---------------------------------------------------------------------------
# Channel-space optimizer
# ---------------------------------------------------------------------------


class _StinespringParam:
    """Channels as polar projections of complex (d_out * env, d_in) matrices."""

    def __init__(self, input_space: LabeledSpace, output_space: LabeledSpace, env_dim: int):
        self.input_space = input_space
        self.output_space = output_space
        self.d_in = input_space.dim
        self.d_out = output_space.dim
        self.env = env_dim
        self.rows = self.d_out * self.env
        if self.rows < self.d_in:
            raise ValidationError(
                f"environment dimension {env_dim} too small for an isometry "
                f"({self.rows} rows < {self.d_in} columns)"
            )
        self.size = 2 * self.rows * self.d_in

    def unpack(self, x: np.ndarray) -> QuantumChannel:
        half = self.rows * self.d_in
        v = (x[:half] + 1j * x[half:]).reshape(self.rows, self.d_in)
        u, _, vh = np.linalg.svd(v, full_matrices=False)
        iso = u @ vh
        kraus = [iso[e * self.d_out : (e + 1) * self.d_out, :] for e in range(self.env)]
        return QuantumChannel(self.input_space, self.output_space, kraus, tp_tol=1e-8)

    def pack(self, ch: QuantumChannel) -> np.ndarray:
        if len(ch.kraus) > self.env:
            raise ValidationError(f"channel has {len(ch.kraus)} Kraus operators > env {self.env}")
        v = np.zeros((self.rows, self.d_in), dtype=np.complex128)
        for e, kr in enumerate(ch.kraus):
            v[e * self.d_out : (e + 1) * self.d_out, :] = kr
        x = np.zeros(self.size)
        x[: self.rows * self.d_in] = v.real.reshape(-1)
        x[self.rows * self.d_in :] = v.imag.reshape(-1)
        return x

    def random(self, gen: np.random.Generator) -> np.ndarray:
        return gen.standard_normal(self.size)


def _env_ladder(full: int) -> list[int]:
    ladder = []
    e = 1
    while e < full:
        ladder.append(e)
        e *= 2
    ladder.append(full)
    return ladder


def optimize_channel_functional(
    objective: Callable[[QuantumChannel], float],
    input_space: LabeledSpace,
    output_space: LabeledSpace,
    sense: str,
    cfg: OptimizerConfig,
    env_dim: int | None = None,
    inits: Sequence[QuantumChannel] = (),
) -> OptResult:
    """Optimize a scalar functional over CPTP maps of a fixed signature.

    Stinespring coordinates guarantee feasibility: every parameter vector
    maps to a valid channel.  ``inits`` seed the first restarts at the full
    environment dimension; the remaining restarts cycle through a ladder of
    smaller environments (Kraus-rank caps), which explore far better while
    staying inside the same channel family.  A final polish pass re-runs
    the search from the incumbent.  ``env_dim`` pins the environment
    instead, disabling the ladder.
    """
    if sense not in ("max", "min"):
        raise ValidationError(f"sense must be 'max' or 'min', got {sense!r}")
    sign = 1.0 if sense == "max" else -1.0
    full_env = input_space.dim * output_space.dim
    ladder = [env_dim] if env_dim is not None else _env_ladder(full_env)
    ladder = [e for e in ladder if e * output_space.dim >= input_space.dim]
    params = {e: _StinespringParam(input_space, output_space, e) for e in ladder}
    full_param = (
        params[ladder[-1]]
        if env_dim is not None
        else _StinespringParam(input_space, output_space, full_env)
    )
    schedule = _parse_schedule(cfg.step_schedule)

    packed_inits = []
    for ch in inits:
        if len(ch.kraus) <= full_param.env:
            packed_inits.append(full_param.pack(ch))
    trace: list[TracePoint] = []
    best: tuple[float, int] | None = None
    best_x: np.ndarray | None = None
    best_param: _StinespringParam | None = None

    def make_objective(param: _StinespringParam) -> Callable[[np.ndarray], float]:
        def signed(xv: np.ndarray) -> float:
            return sign * objective(param.unpack(xv))

        return signed

    for restart in range(cfg.restarts):
        gen = np.random.default_rng([cfg.seed, restart])
        if restart < len(packed_inits):
            param = full_param
            x = packed_inits[restart].copy()
        else:
            param = params[ladder[(restart - len(packed_inits)) % len(ladder)]]
            x = param.random(gen)
        x, val = _coordinate_search(
            x,
            make_objective(param),
            gen,
            cfg.max_iters,
            schedule,
            cfg.tolerance,
            on_accept=lambda it, v, _r=restart: trace.append(TracePoint(_r, it, sign * v, 0.0)),
        )
        if best is None or val > best[0]:
            best = (val, restart)
            best_x, best_param = x, param

    assert best is not None and best_x is not None and best_param is not None
    gen = np.random.default_rng([cfg.seed, cfg.restarts])
    best_x, val = _coordinate_search(
        best_x,
        make_objective(best_param),
        gen,
        cfg.max_iters,
        schedule,
        cfg.tolerance,
        on_accept=lambda it, v: trace.append(TracePoint(cfg.restarts, it, sign * v, 0.0)),
    )
    best_ch = best_param.unpack(best_x)
    value = sign * val
    return OptResult(
        best_value=value, best_channel=best_ch, report=value, trace=tuple(trace)
    )


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridOracleSpec:
    """Discretization of the product-member family used for validation.

    Members are pure qubit signals from a polar-angle grid tensored with
    the resource marginal (always feasible); probabilities come from a
    simplex grid with denominator ``prob_points``.
    """

    num_members: int = 2
    theta_points: int = 9
    phi_points: int = 6
    prob_points: int = 8
    cap: int = 10_000_000


def _n_choose_k(n: int, k: int) -> int:
    return math.comb(n, k)


def grid_oracle(
    channel: QuantumChannel, res: ResourceState, spec: GridOracleSpec = GridOracleSpec()
) -> float:
    """Exhaustive search over a discretized feasible-ensemble family.

    Only meant to validate the optimizers on tiny instances: signal space
    must be a qubit, and the total number of grid points must stay under
    ``spec.cap`` (refused otherwise, with the size estimate).
    """
    signal_space = channel.input_space
    if signal_space.dim != 2:
        raise ValidationError("grid oracle supports two-dimensional signal spaces only")

    vectors = [np.array([1.0, 0.0], dtype=np.complex128), np.array([0.0, 1.0], dtype=np.complex128)]
    thetas = np.linspace(0.0, np.pi, spec.theta_points)[1:-1]
    phis = np.linspace(0.0, 2 * np.pi, spec.phi_points, endpoint=False)
    for th in thetas:
        for ph in phis:
            vectors.append(
                np.array(
                    [np.cos(th / 2), np.exp(1j * ph) * np.sin(th / 2)], dtype=np.complex128
                )
            )

    k = spec.num_members
    n_states = len(vectors)
    n_member_sets = _n_choose_k(n_states + k - 1, k)
    n_prob_vectors = _n_choose_k(spec.prob_points + k - 1, k - 1)
    total = n_member_sets * n_prob_vectors
    if total > spec.cap:
        raise ResourceLimitError(
            f"grid oracle would evaluate {total} points (> cap {spec.cap}); "
            f"shrink the grid or raise the cap"
        )

    aux_dim = res.phi0.space.dim_of(res.aux_label)
    member_space = signal_space.tensor(LabeledSpace.of((res.aux_label, aux_dim)))
    marg = res.zeta_marginal.matrix
    members_pool = [
        DensityOperator(member_space, np.kron(np.outer(v, v.conj()), marg), validate=False)
        for v in vectors
    ]

    # Every grid member is (pure signal) x (resource marginal), so the
    # channel pushforward and the reference marginal can be cached per pool
    # state; the per-combination work is only the cq assembly and entropies.
    from .entropic import holevo_information, mutual_information
    from .qcore import partial_trace

    signal = list(signal_space.labels)
    pushed_pool = []
    marg_pool = []
    for m in members_pool:
        out = apply(channel, m, signal)
        pushed_pool.append(apply(res.z_channel, out, [res.aux_label]))
        marg_pool.append(partial_trace(m, {res.aux_label}))
    bob = {channel.output_space.labels[0], res.bob_label}
    eve = {channel.output_space.labels[1], res.eve_label}

    prob_vectors = []
    for comp in product(range(spec.prob_points + 1), repeat=k):
        if sum(comp) == spec.prob_points:
            prob_vectors.append(np.array(comp, dtype=float) / spec.prob_points)

    best = -np.inf
    for combo in combinations_with_replacement(range(n_states), k):
        for q in prob_vectors:
            keep = q > 0
            if not np.any(keep):
                continue
            labels = [i for i, f in enumerate(keep) if f]
            probs = q[keep]
            gamma = cq_state(
                CqEnsemble(labels, probs, [pushed_pool[combo[i]] for i in labels])
            )
            i_bb = mutual_information(gamma, {"U"}, bob).value
            i_ee = mutual_information(gamma, {"U"}, eve).value
            i_ap = holevo_information(
                CqEnsemble(labels, probs, [marg_pool[combo[i]] for i in labels])
            )
            rate = i_bb - max(i_ee, i_ap)
            if rate > best:
                best = rate
    return float(best)
