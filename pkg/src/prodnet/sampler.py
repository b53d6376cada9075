"""Ensembles of firm-level shocks with fixed industry aggregates.

Scenarios are built per industry in two stages: a draw stage piles random
shock increments onto random firms until the industry totals reach their
currency targets, then a rescale stage nudges the draft onto the exact
constraint pair (in-strength weighted and out-strength weighted totals)
by solving a small linear system repeatedly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .network import FirmNetwork, strength_profile

DEFAULT_EPSILON = 0.01
DEFAULT_MAX_RESCALE_ITERS = 1000
DEFAULT_MAX_SCENARIO_RETRIES = 5


class SamplingError(RuntimeError):
    """Raised when a target is infeasible or rescaling fails to converge."""

    def __init__(self, message: str, residual_in: float = math.nan, residual_out: float = math.nan):
        super().__init__(message)
        self.residual_in = residual_in
        self.residual_out = residual_out


@dataclass(frozen=True)
class SamplingTarget:
    """Currency-unit totals one industry's shock must reproduce."""

    target_in: float
    target_out: float
    epsilon: float = DEFAULT_EPSILON


@dataclass(frozen=True)
class EmpiricalDonor:
    """Resamples shock increments from observed values."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or len(v) == 0:
            raise ValueError("empirical donor needs a non-empty 1-d value array")
        if np.isnan(v).any() or v.min() < 0 or v.max() > 1:
            raise ValueError("donor values must lie in [0, 1]")
        object.__setattr__(self, "values", v)

    def draw(self, rng: np.random.Generator) -> float:
        return float(self.values[rng.integers(len(self.values))])


@dataclass(frozen=True)
class BetaDonor:
    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError("beta donor needs positive shape parameters")

    def draw(self, rng: np.random.Generator) -> float:
        return float(rng.beta(self.a, self.b))


def parse_donor_spec(text: str):
    """'empirical' -> None (use per-industry observed values), 'beta(a,b)' -> BetaDonor."""
    token = text.strip().lower()
    if token == "empirical":
        return None
    if token.startswith("beta(") and token.endswith(")"):
        parts = token[len("beta(") : -1].split(",")
        if len(parts) == 2:
            return BetaDonor(float(parts[0]), float(parts[1]))
    raise ValueError(f"unknown donor spec {text!r}; use 'empirical' or 'beta(a,b)'")


def draw_shocks(
    s_in: np.ndarray,
    s_out: np.ndarray,
    donor,
    target: SamplingTarget,
    rng: np.random.Generator,
) -> np.ndarray:
    """Accumulate random shock increments until a currency target is hit.

    Firms are visited in random order without replacement; the visiting
    pool is reshuffled and refilled once exhausted.  The loop stops as
    soon as either the in-weighted or the out-weighted total reaches its
    target, leaving the exact match to the rescaling stage.
    """
    n = len(s_in)
    if n == 0:
        raise SamplingError("cannot draw shocks for an empty industry")
    cap_in = float(np.sum(s_in))
    cap_out = float(np.sum(s_out))
    slack = 1e-9 * (1.0 + max(cap_in, cap_out))
    if target.target_in < 0 or target.target_out < 0:
        raise SamplingError("negative shock target")
    if target.target_in > cap_in + slack or target.target_out > cap_out + slack:
        raise SamplingError(
            f"target exceeds industry capacity (in {target.target_in} vs {cap_in}, "
            f"out {target.target_out} vs {cap_out})"
        )

    zeta = np.zeros(n)
    acc_in = 0.0
    acc_out = 0.0
    order = np.empty(0, dtype=np.int64)
    pos = 0
    stall = 0
    while acc_in < target.target_in and acc_out < target.target_out:
        if pos >= len(order):
            if np.all(zeta >= 1.0):
                raise SamplingError(
                    "all firms saturated below target",
                    residual_in=target.target_in - acc_in,
                    residual_out=target.target_out - acc_out,
                )
            stall += 1
            if stall > 10_000:
                raise SamplingError(
                    "draw stage stalled (donor keeps yielding zero increments)",
                    residual_in=target.target_in - acc_in,
                    residual_out=target.target_out - acc_out,
                )
            order = rng.permutation(n)
            pos = 0
        i = order[pos]
        pos += 1
        eta = donor.draw(rng)
        bumped = min(1.0, zeta[i] + eta)
        acc_in += (bumped - zeta[i]) * s_in[i]
        acc_out += (bumped - zeta[i]) * s_out[i]
        zeta[i] = bumped
    return zeta


def _pinv2x2(a_mat: np.ndarray, rcond: float = 1e-12) -> np.ndarray:
    """Moore-Penrose inverse of a 2x2 matrix with a relative cutoff.

    Small singular values (below rcond times the largest) are treated as
    zero, matching numpy's pinv semantics without the general machinery.
    Entries are normalized by the largest magnitude first so squaring
    cannot overflow or underflow; pinv(c A) = pinv(A) / c undoes it.
    """
    scale = float(np.abs(a_mat).max())
    if scale == 0.0:
        return np.zeros((2, 2))
    a, b = a_mat[0] / scale
    c, d = a_mat[1] / scale
    t = a * a + b * b + c * c + d * d
    det = a * d - b * c
    disc = math.sqrt(max(0.0, t * t - 4.0 * det * det))
    s1_sq = (t + disc) / 2.0
    s2_sq = max(0.0, (t - disc) / 2.0)
    if math.sqrt(s2_sq) > rcond * math.sqrt(s1_sq):
        inv = np.array([[d, -b], [-c, a]]) / det
    else:
        # effectively rank one: transpose over the dominant singular value
        inv = np.array([[a, c], [b, d]]) / s1_sq
    return inv / scale


def _partition_unlocked(
    s_in: np.ndarray, s_out: np.ndarray, unlocked: np.ndarray, b_in: float, b_out: float
) -> np.ndarray:
    """Split unlocked firms into in-heavy vs out-heavy by strength ratio.

    The comparison s_in/s_out > b_in/b_out is done in cross-multiplied
    form so zero strengths need no special casing.  Exact ties join
    whichever group is currently smaller (in-heavy when equal), one tie
    at a time in firm order.
    """
    lhs = s_in * b_out
    rhs = b_in * s_out
    in_heavy = unlocked & (lhs > rhs)
    out_heavy = unlocked & (lhs < rhs)
    n_in = int(in_heavy.sum())
    n_out = int(out_heavy.sum())
    for i in np.flatnonzero(unlocked & (lhs == rhs)):
        if n_in <= n_out:
            in_heavy[i] = True
            n_in += 1
        else:
            out_heavy[i] = True
            n_out += 1
    return in_heavy


def _lock_after_scale(over_one: np.ndarray, positive: np.ndarray, rule: str) -> np.ndarray:
    """Which just-scaled firms become locked; the two readings live here."""
    if rule == "clamped":
        return over_one
    if rule == "positive":
        return positive
    raise ValueError(f"unknown lock rule {rule!r}")


def rescale_shocks(
    s_in: np.ndarray,
    s_out: np.ndarray,
    zeta_draft: np.ndarray,
    target: SamplingTarget,
    rng: np.random.Generator,
    max_iters: int = DEFAULT_MAX_RESCALE_ITERS,
    lock_rule: str = "clamped",
) -> np.ndarray:
    """Adjust a draft shock until both currency totals sit within epsilon.

    Each pass scales the in-heavy and out-heavy halves of the unlocked
    firms by the (pseudo-)solution of a 2x2 system; firms clamped at 1
    are locked for the remainder.  Four degenerate system shapes (a zero
    row or column) are repaired by seeding an eligible zero-shock firm
    with a uniform draw before solving.
    """
    zeta = np.asarray(zeta_draft, dtype=np.float64).copy()
    n = len(zeta)
    locked = np.zeros(n, dtype=bool)
    eps = target.epsilon

    def residuals():
        return (
            float(np.dot(s_in, zeta)) - target.target_in,
            float(np.dot(s_out, zeta)) - target.target_out,
        )

    for _ in range(max_iters):
        o_in, o_out = residuals()
        if abs(o_in) <= eps and abs(o_out) <= eps:
            return zeta

        b_in = target.target_in - float(np.dot(s_in[locked], zeta[locked]))
        b_out = target.target_out - float(np.dot(s_out[locked], zeta[locked]))
        unlocked = ~locked
        in_heavy = _partition_unlocked(s_in, s_out, unlocked, b_in, b_out)
        out_heavy = unlocked & ~in_heavy

        def build_a():
            return np.array(
                [
                    [np.dot(s_in[in_heavy], zeta[in_heavy]), np.dot(s_in[out_heavy], zeta[out_heavy])],
                    [np.dot(s_out[in_heavy], zeta[in_heavy]), np.dot(s_out[out_heavy], zeta[out_heavy])],
                ]
            )

        a_mat = build_a()
        zero_shock = unlocked & (zeta == 0.0)
        repairs = (
            (a_mat[0, 0] == 0 and a_mat[0, 1] == 0, zero_shock & (s_in > 0)),
            (a_mat[1, 0] == 0 and a_mat[1, 1] == 0, zero_shock & (s_out > 0)),
            (a_mat[0, 0] == 0 and a_mat[1, 0] == 0, zero_shock & in_heavy & ((s_in > 0) | (s_out > 0))),
            (a_mat[0, 1] == 0 and a_mat[1, 1] == 0, zero_shock & out_heavy & ((s_in > 0) | (s_out > 0))),
        )
        for degenerate, eligible in repairs:
            if degenerate:
                idx = np.flatnonzero(eligible)
                if len(idx):
                    zeta[idx[0]] = rng.random()
                    zero_shock[idx[0]] = False
                    a_mat = build_a()

        v = _pinv2x2(a_mat) @ np.array([b_in, b_out])
        v = np.maximum(v, 0.0)
        scaled = zeta.copy()
        scaled[in_heavy] = zeta[in_heavy] * v[0]
        scaled[out_heavy] = zeta[out_heavy] * v[1]
        over_one = scaled > 1.0
        np.clip(scaled, 0.0, 1.0, out=scaled)
        zeta = scaled
        locked |= _lock_after_scale(over_one, zeta > 0.0, lock_rule) & unlocked

    o_in, o_out = residuals()
    raise SamplingError(
        f"rescaling did not converge in {max_iters} iterations "
        f"(residuals in={o_in:.6g}, out={o_out:.6g})",
        residual_in=o_in,
        residual_out=o_out,
    )


@dataclass(frozen=True)
class ScenarioEnsemble:
    """Sampled capacity vectors plus the per-industry aggregation residuals."""

    psi: np.ndarray  # (scenarios, firms)
    residual_in: np.ndarray  # (scenarios, industries), currency units
    residual_out: np.ndarray
    industry_labels: tuple[str, ...]
    seed: int
    epsilon: float = DEFAULT_EPSILON

    @property
    def n_scenarios(self) -> int:
        return self.psi.shape[0]


def sample_ensemble(
    net: FirmNetwork,
    base_psi: np.ndarray,
    count: int,
    seed: int = 0,
    epsilon: float = DEFAULT_EPSILON,
    donor: str = "empirical",
    max_rescale_iters: int = DEFAULT_MAX_RESCALE_ITERS,
    max_scenario_retries: int = DEFAULT_MAX_SCENARIO_RETRIES,
    industry: np.ndarray | None = None,
    industry_labels: tuple[str, ...] | None = None,
    lock_rule: str = "clamped",
) -> ScenarioEnsemble:
    """Sample `count` capacity vectors whose industry aggregates match base_psi.

    Sampling granularity defaults to the network's own industries; pass
    `industry`/`industry_labels` to constrain at a different grouping.
    Each (scenario, industry, attempt) triple gets its own child seed, so
    results do not depend on execution order.
    """
    base_psi = np.asarray(base_psi, dtype=np.float64)
    if base_psi.shape != (net.n_firms,):
        raise ValueError("base_psi must have one value per firm")
    if np.isnan(base_psi).any() or base_psi.min() < 0 or base_psi.max() > 1:
        raise ValueError("base_psi must be complete with values in [0, 1]")
    if industry is None:
        codes = net.industry
        labels = net.industry_labels
    else:
        codes = np.asarray(industry, dtype=np.int64)
        if industry_labels is None:
            raise ValueError("industry override requires industry_labels")
        labels = tuple(industry_labels)
        if codes.shape != (net.n_firms,) or (len(codes) and (codes.min() < 0 or codes.max() >= len(labels))):
            raise ValueError("industry override codes out of range")

    sp = strength_profile(net)
    m = len(labels)
    base_zeta = 1.0 - base_psi
    target_in = np.bincount(codes, weights=sp.s_in * base_zeta, minlength=m)
    target_out = np.bincount(codes, weights=sp.s_out * base_zeta, minlength=m)

    donor_spec = parse_donor_spec(donor) if isinstance(donor, str) else donor
    members = [np.flatnonzero(codes == k) for k in range(m)]
    donors = []
    for k in range(m):
        if donor_spec is not None:
            donors.append(donor_spec)
        elif len(members[k]):
            donors.append(EmpiricalDonor(base_zeta[members[k]]))
        else:
            donors.append(None)

    psi = np.empty((count, net.n_firms))
    res_in = np.zeros((count, m))
    res_out = np.zeros((count, m))
    for l in range(count):
        last_err = None
        for attempt in range(max_scenario_retries):
            zeta = np.zeros(net.n_firms)
            try:
                for k in range(m):
                    idx = members[k]
                    if not len(idx):
                        continue
                    rng = np.random.default_rng(np.random.SeedSequence((seed, l, k, attempt)))
                    tgt = SamplingTarget(float(target_in[k]), float(target_out[k]), epsilon)
                    draft = draw_shocks(sp.s_in[idx], sp.s_out[idx], donors[k], tgt, rng)
                    final = rescale_shocks(
                        sp.s_in[idx], sp.s_out[idx], draft, tgt, rng, max_rescale_iters, lock_rule
                    )
                    zeta[idx] = final
                    res_in[l, k] = np.dot(sp.s_in[idx], final) - tgt.target_in
                    res_out[l, k] = np.dot(sp.s_out[idx], final) - tgt.target_out
                break
            except SamplingError as err:
                last_err = err
        else:
            raise SamplingError(
                f"scenario {l} failed after {max_scenario_retries} attempts: {last_err}",
                residual_in=getattr(last_err, "residual_in", math.nan),
                residual_out=getattr(last_err, "residual_out", math.nan),
            )
        psi[l] = 1.0 - zeta

    return ScenarioEnsemble(
        psi=psi,
        residual_in=res_in,
        residual_out=res_out,
        industry_labels=labels,
        seed=seed,
        epsilon=epsilon,
    )


def write_residuals(path, ensemble: ScenarioEnsemble, header: str = "") -> None:
    """scenario,industry,res_in,res_out rows for every sampled scenario."""
    with open(path, "w", newline="") as fh:
        if header:
            fh.write(header)
        fh.write("scenario,industry,res_in,res_out\n")
        for l in range(ensemble.n_scenarios):
            for k, label in enumerate(ensemble.industry_labels):
                fh.write(
                    f"{l},{label},"
                    f"{float(ensemble.residual_in[l, k])!r},"
                    f"{float(ensemble.residual_out[l, k])!r}\n"
                )
