"""Direct Lyapunov-exponent estimation by orbit products, and the
renormalization dichotomy: drive the matrix pair with the accelerated Rauzy
moves of the base rotation until it either reaches the absorbing uniformly
hyperbolic type (HH+ with a cone certificate), stays certified-bounded in
trace norm, or the base terminates at a rational angle.

Move bookkeeping.  Elementary induction steps are grouped into maximal
same-winner runs; a run of length N with Bottom winner applies tau1^N, with
Top winner tau2^N.  Because the accelerated digit chart closes each digit
with one step of the opposite letter, the run lengths are (a_1 - 1, a_2,
a_3, ...) where a_n are the continued-fraction digits of alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cocycle import (
    CocyclePair,
    ConeCertificate,
    DegeneratePairError,
    TraceCoords,
    classify_pair,
    cone_certificate,
    k_membership,
    tau_power,
    trace_bound,
    trace_coords,
)
from .iet import (
    BudgetExceededError,
    Rotation2IET,
    Winner,
    continued_fraction,
    run_steps,
)
from .mat2 import Matrix2, NonUnimodularError, mul, spectral_radius

LOG_OVERFLOW = 600.0
RENORM_CADENCE = 32
DEFAULT_SAMPLES = 8


@dataclass(frozen=True)
class LyapunovEstimate:
    chi: float
    n_iters: int
    sample_points: int
    stderr: float


@dataclass(frozen=True)
class DecisionBudget:
    max_accel_steps: int = 60
    max_digit: int = 10**6
    trace_bound: float | None = None  # default: bound from c, plus slack 4

    def __post_init__(self):
        if self.max_accel_steps < 1 or self.max_digit < 1:
            raise ValueError("budget fields must be positive")
        if self.trace_bound is not None and self.trace_bound <= 0:
            raise ValueError("trace_bound must be positive")


@dataclass(frozen=True)
class StepRecord:
    index: int
    digit: int
    winner: Winner | None   # None for the step-0 record of the input pair
    pair_type: str          # type code after the move
    coords: TraceCoords
    in_k_escort: bool       # pair or a one-step tau-preimage is in K


@dataclass(frozen=True)
class Verdict:
    """Tagged outcome of a renormalization run.

    kind: "UniformlyHyperbolic" (some step reached HH+; certificate and
    at_step set), "CertifiedBounded" (budget exhausted with every step's
    traces below the bound; max_trace_norm set), "FiniteOrder" (rational
    angle; last_pair and spectrum_member set), "Undecided" (budget_note
    explains).
    """

    kind: str
    at_step: int | None = None
    certificate: ConeCertificate | None = None
    max_trace_norm: float | None = None
    spectrum_member: bool | None = None
    last_pair: CocyclePair | None = None
    budget_note: str | None = None


@dataclass(frozen=True)
class RenormTrace:
    steps: tuple[StepRecord, ...] = field(default_factory=tuple)
    verdict: Verdict = None


def winner_move(w: Winner) -> int:
    """Bottom winner applies tau1, Top winner tau2."""
    return 1 if w is Winner.BOTTOM else 2


# ---------------------------------------------------------------------------
# Direct exponent


def direct_exponent(p: CocyclePair, t: Rotation2IET, n_iters: int,
                    n_samples: int = DEFAULT_SAMPLES,
                    seed: int = 0) -> LyapunovEstimate:
    """Estimate chi by iterating v -> rho(x) v along orbits of the rotation
    from n_samples random starting points, renormalizing the vectors every
    32 steps.  Negative round-off estimates are clipped at 0 (exponents of
    determinant-1 cocycles are nonnegative).
    """
    if n_iters < 1:
        raise ValueError("n_iters must be >= 1")
    rng = np.random.default_rng(seed)
    alpha = float(t.alpha)
    split = 1.0 - alpha
    x = rng.random(n_samples)
    at = np.array([[p.A.a, p.A.b], [p.A.c, p.A.d]]).T
    bt = np.array([[p.B.a, p.B.b], [p.B.c, p.B.d]]).T
    v = np.zeros((n_samples, 2))
    v[:, 0] = 1.0
    logsum = np.zeros(n_samples)
    done = 0
    while done < n_iters:
        block = min(RENORM_CADENCE, n_iters - done)
        # Letters for the whole block at once.
        ks = np.arange(block)[:, None]
        xs = (x[None, :] + ks * alpha) % 1.0
        in_a = xs <= split
        for j in range(block):
            va = v @ at
            vb = v @ bt
            v = np.where(in_a[j][:, None], va, vb)
        x = (x + block * alpha) % 1.0
        norms = np.sqrt(np.sum(v * v, axis=1))
        logsum += np.log(norms)
        v /= norms[:, None]
        done += block
    per = logsum / n_iters
    chi = max(float(per.mean()), 0.0)
    stderr = float(per.std(ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else 0.0
    return LyapunovEstimate(chi=chi, n_iters=n_iters,
                            sample_points=n_samples, stderr=stderr)


# ---------------------------------------------------------------------------
# Renormalization dichotomy


def _tau_preimages(p: CocyclePair):
    yield CocyclePair(p.A, mul(p.B, p.A.inv()))
    yield CocyclePair(mul(p.B.inv(), p.A), p.B)


def _k_escort(p: CocyclePair) -> bool:
    if k_membership(p).in_k:
        return True
    return any(k_membership(q).in_k for q in _tau_preimages(p))


def _log_size(m: Matrix2) -> float:
    return math.log(max(abs(m.a), abs(m.b), abs(m.c), abs(m.d), 1.0))


def _move_overflows(p: CocyclePair, move: int, n: int) -> bool:
    base = p.A if move == 1 else p.B
    r = spectral_radius(base)
    grow = n * math.log(r) if r > 1.0 else 0.0
    return grow + _log_size(p.A) + _log_size(p.B) > LOG_OVERFLOW


def _ladder_probe(p: CocyclePair, move: int, n: int):
    """For a move whose full power would overflow, probe powers 1, 2, 4, ...
    looking for the absorbing HH+ type; return (k, pair) at the first HH+
    hit, or None if every safe power stays non-absorbing."""
    k = 1
    while k <= n and not _move_overflows(p, move, k):
        q = tau_power(p, move, k)
        if classify_pair(q).code == "HH+":
            return k, q
        k *= 2
    return None


def renorm_decision(p: CocyclePair, alpha: float,
                    budget: DecisionBudget | None = None) -> RenormTrace:
    """Run the accelerated renormalization of (alpha, p) and decide.

    Returns UniformlyHyperbolic at the first HH+ pair (with its cone
    certificate), FiniteOrder on rational termination (spectrum membership
    decided by whether the moved matrix of the final step fails to be
    hyperbolic: the first matrix for tau1, the second for tau2),
    CertifiedBounded when the step budget exhausts with every recorded
    trace below the bound, Undecided otherwise.
    """
    if budget is None:
        budget = DecisionBudget()
    t0 = classify_pair(p)
    if t0.is_degenerate:
        raise DegeneratePairError(t0.reason)
    bound = budget.trace_bound
    if bound is None:
        bound = trace_bound(trace_coords(p).c) + 4.0

    steps: list[StepRecord] = []
    if t0.code == "HH+":
        cert = cone_certificate(p)
        rec0 = StepRecord(index=0, digit=0, winner=None, pair_type="HH+",
                          coords=trace_coords(p), in_k_escort=_k_escort(p))
        return RenormTrace(steps=(rec0,), verdict=Verdict(
            kind="UniformlyHyperbolic", at_step=0, certificate=cert))

    cur = p
    all_bounded = True
    max_norm = 0.0
    last_move = None
    terminated = False
    index = 0
    gen = run_steps(Rotation2IET(alpha), max_digit=budget.max_digit)
    try:
        for winner, run_len, _state in gen:
            move = winner_move(winner)
            if _move_overflows(cur, move, run_len):
                hit = _ladder_probe(cur, move, run_len)
                if hit is None:
                    return RenormTrace(tuple(steps), Verdict(
                        kind="Undecided",
                        budget_note="matrix power overflow before a decision"))
                _k, cur = hit
            else:
                cur = tau_power(cur, move, run_len)
            last_move = move
            index += 1
            ptype = classify_pair(cur)
            coords = trace_coords(cur)
            escort = _k_escort(cur)
            steps.append(StepRecord(index=index, digit=run_len, winner=winner,
                                    pair_type=ptype.code, coords=coords,
                                    in_k_escort=escort))
            if ptype.is_degenerate:
                raise DegeneratePairError(ptype.reason)
            if ptype.code == "HH+":
                cert = cone_certificate(cur)
                return RenormTrace(tuple(steps), Verdict(
                    kind="UniformlyHyperbolic", at_step=index,
                    certificate=cert))
            norm = max(abs(coords.x), abs(coords.y), abs(coords.z))
            max_norm = max(max_norm, norm)
            if norm > bound:
                all_bounded = False
            if index >= budget.max_accel_steps:
                break
        else:
            terminated = True
    except BudgetExceededError:
        return RenormTrace(tuple(steps), Verdict(
            kind="Undecided", budget_note="run length exceeded max_digit"))
    except DegeneratePairError:
        raise
    except (NonUnimodularError, ValueError) as exc:
        return RenormTrace(tuple(steps), Verdict(
            kind="Undecided",
            budget_note=f"numerical breakdown during renormalization: {exc}"))

    if terminated:
        if last_move is None:
            raise DegeneratePairError("no induction step before termination")
        checked = cur.A if last_move == 1 else cur.B
        member = abs(checked.trace) <= 2.0
        return RenormTrace(tuple(steps), Verdict(
            kind="FiniteOrder", at_step=index, last_pair=cur,
            spectrum_member=member))
    if all_bounded:
        return RenormTrace(tuple(steps), Verdict(
            kind="CertifiedBounded", at_step=index, max_trace_norm=max_norm))
    return RenormTrace(tuple(steps), Verdict(
        kind="Undecided",
        budget_note="trace bound exceeded without reaching HH+"))


def bounded_prefix(trace: RenormTrace, bound: float) -> int:
    """Number of leading recorded steps whose trace coordinates all stay
    within the bound; measures how long the run tracked a bounded orbit."""
    n = 0
    for s in trace.steps:
        if max(abs(s.coords.x), abs(s.coords.y), abs(s.coords.z)) > bound:
            break
        n += 1
    return n


def exponent_lower_bound(trace: RenormTrace, alpha: float) -> float:
    """Certified lower bound on chi from a UniformlyHyperbolic verdict:
    the expansion factor mu of the absorbing step, spread over the first
    return time of the induced interval, ln(mu) / (q_m + q_{m-1}).  Returns
    0.0 when the bound is not computable (no certificate or too-deep step).
    """
    v = trace.verdict
    if v.kind != "UniformlyHyperbolic" or v.certificate is None:
        return 0.0
    m = v.at_step + 1
    cf = continued_fraction(alpha, max_digits=m + 2)
    qs = cf.convergent_denominators
    if m + 1 > len(qs) - 1:
        m = len(qs) - 2
    if m < 1:
        return 0.0
    return math.log(v.certificate.expansion_factor) / (qs[m + 1] + qs[m])


# ---------------------------------------------------------------------------
# Bounded renormalization implies zero exponent (observable check)


def boundedness_implies_zero(p: CocyclePair, t: Rotation2IET,
                             trace: RenormTrace, n_check: int,
                             x0: float = 0.2137) -> float:
    """Direct norm-growth audit for a CertifiedBounded run: accumulate the
    full 2x2 orbit product up to n_check and return the maximum over the
    checkpoints n_check, n_check/2, n_check/4, ... (down to 1000) of
    log||product_n|| / n.  Bounded renormalization predicts decay to 0.
    """
    if trace.verdict.kind != "CertifiedBounded":
        raise ValueError("requires a CertifiedBounded renormalization trace")
    if n_check < 1:
        raise ValueError("n_check must be >= 1")
    checkpoints = set()
    n = n_check
    while n >= min(1000, n_check):
        checkpoints.add(n)
        n //= 2
    alpha = float(t.alpha)
    split = 1.0 - alpha
    a = np.array([[p.A.a, p.A.b], [p.A.c, p.A.d]])
    b = np.array([[p.B.a, p.B.b], [p.B.c, p.B.d]])
    prod = np.eye(2)
    log_scale = 0.0
    x = x0 % 1.0
    worst = -math.inf
    for k in range(1, n_check + 1):
        m = a if x <= split else b
        prod = m @ prod
        x = (x + alpha) % 1.0
        nrm = np.linalg.norm(prod, 2)
        if nrm > 1e100 or nrm < 1e-100:
            log_scale += math.log(nrm)
            prod /= nrm
            nrm = 1.0
        if k in checkpoints:
            worst = max(worst, (log_scale + math.log(nrm)) / k)
    return worst
