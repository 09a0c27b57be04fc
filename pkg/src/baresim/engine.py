"""Estimators for constrained divergence minima by rare-event simulation.

The pipeline: split the index range 1..n into K blocks matching a
reference probability vector, draw i.i.d. weights with the generator's
conjugate law, sum them blockwise into a K-vector xi, and estimate the
probability that xi hits the constraint set.  ``-(1/n) log`` of that
probability approximates the constrained minimum, up to an explicit
inversion map per target quantity.

Three modes:

* "deterministic": Omega is a subset of R^K with nonvoid interior; the
  unnormalized vector xi = (blocksums)/n is tested against Omega/M_P.
* "simplex": Omega lives in A * (probability simplex), the reference
  vector is a known probability vector; the component-normalized xi is
  tested.  The raw rate then encodes inf over m of D(m Q, P) and is mapped
  back per target.
* "empirical": like simplex but the blocks are category counts of an
  observed sample and P is its (unknown) limit; A = 1.

Importance sampling tilts each block toward a proxy of the constrained
minimizer and corrects with the per-block factor
``exp(n_k Lambda(tau_k) - tau_k * blocksum)``, accumulated in log space.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from .constraints import ConstraintSet
from .divergence import Generator, PowerGamma, check_prob_vector, divergence, normalize_bs1
from .entropy import EntropySpec
from .laws import WeightLaw, law_for_generator

__all__ = [
    "BlockPartition",
    "EstimatorConfig",
    "ProxySpec",
    "ProxyResult",
    "Estimate",
    "partition",
    "ingest_sample",
    "xi_vectors",
    "naive_estimate",
    "proxy_q_star",
    "compute_taus",
    "is_estimate",
    "invert",
    "finalize",
    "solve_m_equation",
    "bounds_general",
    "estimate_min_divergence",
    "estimate_entropy_extremum",
]

INF = math.inf

_PHASE_MAIN = 0
_PHASE_PROXY = 1
_PHASE_BOUNDS = 2


def _rng(seed: int, *path: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(seed, spawn_key=tuple(path)))
    )


@dataclass(frozen=True)
class BlockPartition:
    """Contiguous index blocks of sizes n_k matching a reference vector."""

    n: int
    sizes: np.ndarray
    p_tilde: np.ndarray
    mode: str = "deterministic"  # "deterministic" | "empirical"
    exact: bool = True

    @property
    def K(self) -> int:
        return int(self.sizes.size)

    def block_ranges(self):
        offsets = np.concatenate(([0], np.cumsum(self.sizes)))
        return [(int(offsets[k]), int(offsets[k + 1])) for k in range(self.K)]


def partition(p_tilde, n: int) -> BlockPartition:
    """Deterministic partition: n_k = floor(n * p_k) with the last block
    absorbing the remainder.  Requires every block nonempty."""
    p = check_prob_vector(p_tilde)
    if np.any(p == 0):
        raise ValueError("reference vector must be strictly positive")
    n_min = int(math.ceil(max(1.0 / p)))
    if n < n_min:
        raise ValueError(f"n={n} too small: need n >= {n_min} for nonempty blocks")
    sizes = np.floor(n * p).astype(int)
    sizes[-1] = n - int(sizes[:-1].sum())
    if np.any(sizes < 1):
        raise ValueError("empty block; increase n")
    exact = bool(np.all(np.abs(n * p - np.round(n * p)) < 1e-9))
    return BlockPartition(n=n, sizes=sizes, p_tilde=p, mode="deterministic", exact=exact)


def ingest_sample(observations: Sequence, categories: Optional[Sequence] = None) -> BlockPartition:
    """Empirical partition from category-valued observations: block sizes
    are the category counts, the reference vector the empirical
    frequencies.  Batch and stream orders give the same partition."""
    obs = list(observations)
    if not obs:
        raise ValueError("no observations")
    if categories is None:
        categories = sorted(set(obs))
    counts = np.array([sum(1 for o in obs if o == c) for c in categories], dtype=int)
    if np.any(counts == 0):
        raise ValueError("every category must occur at least once")
    n = int(counts.sum())
    if n != len(obs):
        raise ValueError("observations contain labels outside the category list")
    return BlockPartition(
        n=n, sizes=counts, p_tilde=counts / n, mode="empirical", exact=True
    )


def xi_vectors(weights, part: BlockPartition):
    """Blockwise sums of a length-n weight vector: returns
    (xi_det, xi_norm) with xi_det = blocksums/n and xi_norm =
    blocksums/total (None when the total is zero)."""
    w = np.asarray(weights, dtype=float)
    if w.size != part.n:
        raise ValueError("weight vector length must equal n")
    sums = np.array([w[a:b].sum() for a, b in part.block_ranges()])
    xi_det = sums / part.n
    total = sums.sum()
    xi_norm = sums / total if total != 0.0 else None
    return xi_det, xi_norm


@dataclass(frozen=True)
class ProxySpec:
    """How to find the tilt target Q*.

    method "given": use ``q_star`` (original/user coordinates).
    method "hit_run": repeat xi-runs of a short length ``m_run`` (default:
    the smallest run with nonempty blocks) until the constraint set is
    hit; among the hits collected within the budget the divergence-smallest
    is kept.
    method "density": sample from the density proportional to
    exp(-D(q, p)) until the set is hit (suited to large minima); exact
    Gaussian sampling when the generator is quadratic, independence
    Metropolis-Hastings otherwise.

    Unless ``refine`` is disabled, the hit is then pushed toward the
    boundary by bisecting the segment to the reference vector; the
    divergence decreases monotonically along that ray, so the refined
    point is a strictly better proxy of the dominating point while
    remaining feasible.  A poor proxy degrades only the variance of the
    estimator, never its unbiasedness.
    """

    method: str = "hit_run"
    q_star: Optional[np.ndarray] = None
    budget: int = 200_000
    m_run: Optional[int] = None
    collect: int = 64
    refine: bool = True
    mh_burn_in: int = 1000
    mh_thinning: int = 10


@dataclass(frozen=True)
class EstimatorConfig:
    n: int
    L: int = 10_000
    seed: int = 0
    proxy: ProxySpec = field(default_factory=ProxySpec)
    batches: int = 32
    bisection_tol: float = 1e-10
    threads: int = 1
    per_coordinate: bool = False  # force the n*L path instead of block sums

    def __post_init__(self):
        if self.n < 1 or self.L < 1:
            raise ValueError("n and L must be >= 1")
        if self.batches < 10:
            raise ValueError("need at least 10 batches for the stderr")
        if self.bisection_tol <= 0:
            raise ValueError("bisection tolerance must be > 0")


@dataclass
class Estimate:
    """Hitting-probability estimate and the inverted optimum value."""

    log_pi_hat: float
    value: float
    hits: int
    stderr: float
    stderr_log_pi: float
    n: int
    L: int
    seed: int
    hit_rate: float
    batch_log_means: np.ndarray
    warnings: list = field(default_factory=list)

    @property
    def pi_hat(self) -> float:
        return math.exp(self.log_pi_hat) if math.isfinite(self.log_pi_hat) else 0.0


# ---------------------------------------------------------------------------
# core accumulation


def _membership_points(mode: str, omega: ConstraintSet, sums: np.ndarray,
                       part: BlockPartition, mass: float):
    """Map raw block sums (L, K) to the user's constraint coordinates."""
    if mode == "deterministic":
        return mass * sums / part.n, None
    totals = sums.sum(axis=1)
    ok = totals != 0.0
    pts = np.empty_like(sums)
    pts[ok] = omega.scale * sums[ok] / totals[ok, None]
    pts[~ok] = np.nan  # guaranteed non-member
    return pts, ok


def _run_batches(law: WeightLaw, part: BlockPartition, omega: ConstraintSet,
                 config: EstimatorConfig, mode: str, mass: float,
                 taus: Optional[np.ndarray], phase: int = _PHASE_MAIN):
    """Per-batch log-contribution pools.

    Returns (per-batch arrays of log ISF values of the hits, batch sizes).
    Batch b uses its own counter-based stream and the batches are reduced
    in index order, so the result is bit-identical for any thread count.
    """
    B = config.batches
    base, rem = divmod(config.L, B)
    batch_sizes = [base + (1 if b < rem else 0) for b in range(B)]
    K = part.K
    sizes = part.sizes

    def one_batch(b: int):
        size = batch_sizes[b]
        if size == 0:
            return np.empty(0)
        rng = _rng(config.seed, phase, b)
        sums = np.empty((size, K))
        for k in range(K):
            nk = int(sizes[k])
            if taus is None:
                if config.per_coordinate:
                    draws = law.sample(rng, size * nk).reshape(size, nk)
                    sums[:, k] = draws.sum(axis=1)
                else:
                    sums[:, k] = law.sample_block_sum(nk, rng, size)
            else:
                if config.per_coordinate:
                    draws = law.sample_tilted_block(
                        float(taus[k]), 1, rng, size * nk
                    ).reshape(size, nk)
                    sums[:, k] = draws.sum(axis=1)
                else:
                    sums[:, k] = law.sample_tilted_block(float(taus[k]), nk, rng, size)
        pts, ok = _membership_points(mode, omega, sums, part, mass)
        if ok is None:
            member = omega.contains(pts)
        else:
            member = np.zeros(size, dtype=bool)
            if np.any(ok):
                member[ok] = omega.contains(pts[ok])
        if taus is None:
            return np.zeros(int(member.sum()))
        lam = np.array([float(law.log_mgf(float(t))) for t in taus])
        log_isf = sizes @ lam - sums[member] @ taus
        return log_isf

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            batch_logs = list(pool.map(one_batch, range(B)))
    else:
        batch_logs = [one_batch(b) for b in range(B)]
    return batch_logs, np.array(batch_sizes)


def _estimate_from_batches(batch_logs, batch_sizes, config: EstimatorConfig,
                           n: int) -> Estimate:
    hits = int(sum(len(v) for v in batch_logs))
    L = int(batch_sizes.sum())
    warnings = []
    batch_log_means = np.array(
        [
            (logsumexp(v) - math.log(s)) if len(v) else -INF
            for v, s in zip(batch_logs, batch_sizes)
        ]
    )
    if hits == 0:
        warnings.append(
            f"zero hits in {L} replications; rule-of-three bound pi <= {3.0 / L:.3e}"
        )
        return Estimate(
            log_pi_hat=-INF, value=INF, hits=0, stderr=INF, stderr_log_pi=INF,
            n=n, L=L, seed=config.seed, hit_rate=0.0,
            batch_log_means=batch_log_means, warnings=warnings,
        )
    all_logs = np.concatenate([v for v in batch_logs if len(v)])
    log_pi = float(logsumexp(all_logs) - math.log(L))
    # batch-means stderr on a relative scale, safe against underflow
    finite = batch_log_means[np.isfinite(batch_log_means)]
    ref = float(np.max(batch_log_means))
    rel = np.exp(np.where(np.isfinite(batch_log_means), batch_log_means, -INF) - ref)
    rel_se = float(rel.std(ddof=1) / math.sqrt(len(rel)) / rel.mean())
    if len(finite) < len(batch_log_means):
        warnings.append("some batches had zero hits; stderr is rough")
    return Estimate(
        log_pi_hat=log_pi, value=math.nan, hits=hits, stderr=math.nan,
        stderr_log_pi=rel_se, n=n, L=L, seed=config.seed,
        hit_rate=hits / L, batch_log_means=batch_log_means, warnings=warnings,
    )


def _prepare(gen: Optional[Generator], P, part: Optional[BlockPartition],
             config: EstimatorConfig, mode: str, law: Optional[WeightLaw]):
    if mode not in ("deterministic", "simplex", "empirical"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "empirical":
        if part is None:
            raise ValueError("empirical mode needs an ingest_sample partition")
        mass = 1.0
        p_tilde = part.p_tilde
    else:
        P = np.asarray(P, dtype=float)
        if mode == "simplex":
            p_tilde = check_prob_vector(P)
            if np.any(p_tilde == 0):
                raise ValueError("reference vector must be strictly positive")
            mass = 1.0
        else:
            p_tilde, mass = normalize_bs1(P)
            if np.any(p_tilde == 0):
                raise ValueError("reference vector must be strictly positive")
        part = partition(p_tilde, config.n)
    if law is None:
        if gen is None:
            raise ValueError("need a generator or an explicit weight law")
        law = law_for_generator(gen, extra_scale=mass)
    return part, mass, law


def naive_estimate(gen: Optional[Generator], P, omega: ConstraintSet,
                   config: EstimatorConfig, mode: str = "deterministic",
                   part: Optional[BlockPartition] = None,
                   law: Optional[WeightLaw] = None) -> Estimate:
    """Plain frequency estimator of the hitting probability (poor hit rate
    for rare sets; kept as the importance-sampling baseline)."""
    part, mass, law = _prepare(gen, P, part, config, mode, law)
    batch_logs, batch_sizes = _run_batches(law, part, omega, config, mode, mass, None)
    est = _estimate_from_batches(batch_logs, batch_sizes, config, part.n)
    if not part.exact and mode == "deterministic":
        est.warnings.append(
            "n * p_k not integral: floor-and-remainder blocks add O(1/n) bias"
        )
    return est


@dataclass(frozen=True)
class ProxyResult:
    q_star: np.ndarray  # normalized (simplex modes) or Omega/M coordinates
    w_bar: Optional[float] = None  # None: solve the m-equation at q_star
    draws_used: int = 0


def proxy_q_star(gen: Optional[Generator], part: BlockPartition, omega: ConstraintSet,
                 config: EstimatorConfig, mode: str, mass: float,
                 law: Optional[WeightLaw] = None) -> ProxyResult:
    """Find a tilt target inside the constraint set."""
    spec = config.proxy
    if law is None:
        law = law_for_generator(gen, extra_scale=mass)
    if spec.method == "given":
        q = np.asarray(spec.q_star, dtype=float)
        if q.size != part.K:
            raise ValueError("q_star has the wrong length")
        if mode == "deterministic":
            return ProxyResult(q_star=q / mass, w_bar=1.0)
        return ProxyResult(q_star=q / omega.scale, w_bar=None)
    if spec.method == "hit_run":
        return _proxy_hit_run(gen, law, part, omega, config, mode, mass)
    if spec.method == "density":
        return _proxy_density(gen, part, omega, config, mode, mass)
    raise ValueError(f"unknown proxy method {spec.method!r}")


def _proxy_rank(gen, mode, mass, omega, part):
    """Divergence value used to rank candidate proxies (lower is better)."""
    p = part.p_tilde

    def value(q_reduced: np.ndarray) -> float:
        if gen is None:
            return 0.0
        if mode == "deterministic":
            return divergence(gen, mass * q_reduced, mass * p)
        return divergence(gen, omega.scale * q_reduced, p)

    return value


def _member_fn(part, omega, mode, mass):
    def member(x: np.ndarray) -> bool:
        pts = np.atleast_2d(x)
        if mode == "deterministic":
            return bool(omega.contains(mass * pts)[0])
        return bool(omega.contains(omega.scale * pts)[0])

    return member


def _refine_toward_reference(q, part, omega, mode, mass) -> np.ndarray:
    """Bisect the segment from a feasible point toward the reference vector,
    keeping feasibility; the divergence is convex along the segment and
    decreases toward the reference, so the crossing point improves the
    proxy."""
    p = part.p_tilde
    member = _member_fn(part, omega, mode, mass)
    if member(p):
        return p.copy()
    t_feasible, t_not = 0.0, 1.0  # q + t * (p - q)
    for _ in range(60):
        t = 0.5 * (t_feasible + t_not)
        if member(q + t * (p - q)):
            t_feasible = t
        else:
            t_not = t
    return q + t_feasible * (p - q)


def _polish_proxy(gen, q, part, omega, mode, mass,
                  rounds: int = 5) -> np.ndarray:
    """Feasibility-constrained local descent of the divergence around a
    proxy point: approximates the dominating point, which controls the
    importance-sampling variance (a rough proxy stays unbiased but noisy).
    Simplex modes move mass pairwise (sum preserved); the deterministic
    mode moves single coordinates."""
    if gen is None:
        return q
    p = part.p_tilde
    member = _member_fn(part, omega, mode, mass)

    def objective(x: np.ndarray) -> float:
        return divergence(gen, x, p)

    best = objective(q)
    if not math.isfinite(best):
        return q
    x = q.copy()
    K = x.size
    h = 0.05
    pairwise = mode != "deterministic"
    for _ in range(rounds):
        improved = True
        while improved:
            improved = False
            moves = []
            if pairwise:
                moves = [(i, j) for i in range(K) for j in range(K) if i != j]
            else:
                moves = [(i, None) for i in range(K)] + [(None, i) for i in range(K)]
            for i, j in moves:
                y = x.copy()
                if pairwise:
                    y[i] += h
                    y[j] -= h
                    if y[j] < 0:
                        continue
                elif i is not None:
                    y[i] += h
                else:
                    y[j] -= h
                if not member(y):
                    continue
                val = objective(y)
                if val < best - 1e-14:
                    x, best = y, val
                    improved = True
        h /= 2.0
    return x


def _proxy_hit_run(gen, law, part, omega, config, mode, mass) -> ProxyResult:
    spec = config.proxy
    if spec.m_run is not None:
        m_run = spec.m_run
    else:
        m_run = int(math.ceil(max(1.0 / part.p_tilde)))
    if mode == "empirical" and m_run >= part.n:
        # replicate the observations so the proxy run length is a multiple of n
        mult = max(1, math.ceil(m_run / part.n))
        sizes = part.sizes * mult
        m_run = part.n * mult
    else:
        # short coarse runs at the reference frequencies: best hit rate,
        # and any feasible hit is an admissible tilt target
        sizes = partition(part.p_tilde, max(m_run, part.K)).sizes
        m_run = int(sizes.sum())
    rank = _proxy_rank(gen, mode, mass, omega, part)
    chunk = 256
    used = 0
    ci = 0
    best_q, best_w, best_val, hits = None, 1.0, INF, 0
    while used < spec.budget and hits < spec.collect:
        rng = _rng(config.seed, _PHASE_PROXY, ci)
        ci += 1
        sums = np.empty((chunk, part.K))
        for k in range(part.K):
            sums[:, k] = law.sample_block_sum(int(sizes[k]), rng, chunk)
        used += chunk
        if mode == "deterministic":
            cand = sums / m_run
            member = omega.contains(mass * cand)
        else:
            totals = sums.sum(axis=1)
            ok = totals != 0.0
            cand = np.full_like(sums, np.nan)
            cand[ok] = sums[ok] / totals[ok, None]
            member = np.zeros(chunk, dtype=bool)
            if np.any(ok):
                member[ok] = omega.contains(omega.scale * cand[ok])
        for i in np.nonzero(member)[0]:
            hits += 1
            val = rank(cand[i])
            if val < best_val:
                best_val = val
                best_q = cand[i].copy()
                best_w = 1.0 if mode == "deterministic" else float(
                    sums[i].sum() / m_run
                )
    if best_q is None:
        raise RuntimeError(
            "proxy search exhausted its budget: the constraint set is too "
            "rare at this run length; raise the budget, change m_run, or "
            "supply q_star"
        )
    if spec.refine:
        refined = _refine_toward_reference(best_q, part, omega, mode, mass)
        if np.all(np.isfinite(refined)):
            refined = _polish_proxy(gen, refined, part, omega, mode, mass)
            w = 1.0 if mode == "deterministic" else None
            return ProxyResult(q_star=refined, w_bar=w, draws_used=used)
    return ProxyResult(q_star=best_q, w_bar=best_w, draws_used=used)


def _proxy_density(gen, part, omega, config, mode, mass) -> ProxyResult:
    """Sample T from the density proportional to exp(-D(T, p)) until T is
    in the set.  Exact product-Gaussian sampling for the quadratic
    generator, independence Metropolis-Hastings otherwise."""
    if gen is None:
        raise ValueError("the density proxy needs the generator")
    spec = config.proxy
    p = part.p_tilde
    gen_scaled_curv = mass * gen.phi_curvature_at_one()
    sd = np.sqrt(p / gen_scaled_curv)
    gaussian_exact = isinstance(gen, PowerGamma) and gen.gamma == 2.0

    def log_target(t: np.ndarray) -> float:
        val = divergence(gen, t, p)
        return -mass * val if math.isfinite(val) else -INF

    rng = _rng(config.seed, _PHASE_PROXY, 0)
    used = 0

    def check(t: np.ndarray):
        if mode == "deterministic":
            return omega.contains_point(mass * t), t
        total = t.sum()
        if total == 0:
            return False, t
        q = t / total
        return omega.contains_point(omega.scale * q), q

    def finish(t: np.ndarray, q: np.ndarray, used: int) -> ProxyResult:
        if spec.refine:
            refined = _refine_toward_reference(q, part, omega, mode, mass)
            if np.all(np.isfinite(refined)):
                refined = _polish_proxy(gen, refined, part, omega, mode, mass)
                w = 1.0 if mode == "deterministic" else None
                return ProxyResult(q_star=refined, w_bar=w, draws_used=used)
        wb = float(t.sum()) if mode != "deterministic" else 1.0
        return ProxyResult(q_star=q, w_bar=wb, draws_used=used)

    if gaussian_exact:
        chunk = 512
        while used < spec.budget:
            ts = rng.normal(p, sd, size=(chunk, part.K))
            used += chunk
            if mode == "deterministic":
                member = omega.contains(mass * ts)
                if np.any(member):
                    i = int(np.argmax(member))
                    return finish(ts[i], ts[i], used)
            else:
                totals = ts.sum(axis=1)
                ok = totals != 0.0
                member = np.zeros(chunk, dtype=bool)
                if np.any(ok):
                    member[ok] = omega.contains(
                        omega.scale * ts[ok] / totals[ok, None]
                    )
                if np.any(member):
                    i = int(np.argmax(member))
                    return finish(ts[i], ts[i] / ts[i].sum(), used)
        raise RuntimeError("density proxy exhausted its budget")
    # independence MH with the Gaussian proposal matched to the curvature
    cur = p.copy()
    cur_ratio = log_target(cur) + 0.5 * float((((cur - p) / sd) ** 2).sum())
    it = 0
    while used < spec.budget:
        t = rng.normal(p, sd)
        prop_ratio = log_target(t) + 0.5 * float((((t - p) / sd) ** 2).sum())
        if math.log(max(rng.random(), 1e-300)) < prop_ratio - cur_ratio:
            cur, cur_ratio = t, prop_ratio
        it += 1
        used += 1
        if it <= spec.mh_burn_in or (it - spec.mh_burn_in) % spec.mh_thinning:
            continue
        hit, q = check(cur)
        if hit:
            return finish(cur, q, used)
    raise RuntimeError("density proxy exhausted its budget")


def _m_minimizer(gen: Generator, q: np.ndarray, p: np.ndarray) -> float:
    """Minimizer of m -> D(m q, p) for a normalized q: the unnormalized
    vector must be tilted to m* q, the dominating point of the
    normalized-vector rate function."""
    from .divergence import min_over_m_closed

    try:
        if isinstance(gen, PowerGamma):
            return float(min_over_m_closed(gen, q, p)[1])
        return solve_m_equation(gen, q, p)
    except (ValueError, ZeroDivisionError):
        return 1.0


def compute_taus(gen: Generator, part: BlockPartition, proxy: ProxyResult,
                 mode: str, mass: float) -> np.ndarray:
    """Per-block tilts tau_k = (M phi)'(target ratio)."""
    p = part.p_tilde
    if mode == "deterministic":
        ratios = proxy.q_star / p
    else:
        w_bar = proxy.w_bar
        if w_bar is None:
            w_bar = _m_minimizer(gen, proxy.q_star, p)
        ratios = w_bar * proxy.q_star / p
    taus = mass * np.asarray(gen.phi_prime(ratios), dtype=float)
    if np.any(~np.isfinite(taus)):
        raise ValueError(
            f"tilt target ratio outside int(dom phi): ratios={ratios}"
        )
    return taus


def is_estimate(gen: Optional[Generator], part_or_P, omega: ConstraintSet,
                config: EstimatorConfig, mode: str = "deterministic",
                q_star: Optional[ProxyResult] = None,
                law: Optional[WeightLaw] = None) -> Estimate:
    """Importance-sampling estimator of the hitting probability, tilted
    toward a proxy of the constrained minimizer."""
    if mode == "empirical":
        part, P = part_or_P, None
    else:
        part, P = None, part_or_P
    part, mass, law = _prepare(gen, P, part, config, mode, law)
    if q_star is None:
        q_star = proxy_q_star(gen, part, omega, config, mode, mass, law=law)
    if gen is not None:
        taus = compute_taus(gen, part, q_star, mode, mass)
    else:
        raise ValueError("importance sampling needs the generator for the tilts")
    for t in taus:
        law.check_tau(float(t))
    batch_logs, batch_sizes = _run_batches(law, part, omega, config, mode, mass, taus)
    est = _estimate_from_batches(batch_logs, batch_sizes, config, part.n)
    if not part.exact and mode == "deterministic":
        est.warnings.append(
            "n * p_k not integral: floor-and-remainder blocks add O(1/n) bias"
        )
    return est


# ---------------------------------------------------------------------------
# inversion


def _power_divergence_from_rate(gamma: float, scale: float, A: float, r: float) -> float:
    """Map r = (1/n) log pi_hat to inf D_{c phi_gamma} over A * Omega."""
    c = scale
    if gamma == 0.0:
        return -r + c * (A - 1.0 - math.log(A))
    if gamma == 1.0:
        arg = 1.0 + r / c
        if arg <= 0:
            raise ValueError("inversion argument nonpositive: n too small for this set")
        return c * (1.0 - A * (1.0 + math.log(arg / A)))
    arg = 1.0 + gamma * r / c
    if arg <= 0:
        raise ValueError("inversion argument nonpositive: n too small for this set")
    return (
        c
        / (gamma * (gamma - 1.0))
        * (A**gamma * arg ** (1.0 - gamma) + gamma * (1.0 - A) - 1.0)
    )


def invert(target, log_pi_hat: float, n: int, gen: Optional[Generator] = None,
           A: float = 1.0, K: Optional[int] = None,
           entropy_spec: Optional[EntropySpec] = None) -> float:
    """Map the estimated log hitting probability to the target quantity.

    Targets: "deterministic" (also the inf-over-m value for general
    generators), "divergence", "hellinger", "renyi", "modified_kl",
    "modified_rev_kl", "power_sum", "renyi_entropy", "shannon", "sm2",
    "entropy" (with ``entropy_spec``).
    """
    if log_pi_hat == -INF:
        return INF
    r = log_pi_hat / n
    if target == "deterministic":
        return -r
    if not isinstance(gen, PowerGamma):
        raise ValueError(f"target {target!r} needs a power generator")
    g, c = gen.gamma, gen.scale
    if target == "divergence":
        return _power_divergence_from_rate(g, c, A, r)

    def hellinger() -> float:
        d = _power_divergence_from_rate(g, c, A, r)
        return 1.0 + g * (A - 1.0) + g * (g - 1.0) * d / c

    def mod_kl() -> float:
        if g != 1.0:
            raise ValueError("modified KL inversion needs gamma = 1")
        return _power_divergence_from_rate(1.0, c, A, r) / c + A - 1.0

    if target == "hellinger":
        return hellinger()
    if target == "renyi":
        return math.log(hellinger()) / (g * (g - 1.0))
    if target == "modified_kl":
        return mod_kl()
    if target == "modified_rev_kl":
        if g != 0.0:
            raise ValueError("modified reverse KL inversion needs gamma = 0")
        return _power_divergence_from_rate(0.0, c, A, r) / c + 1.0 - A
    if target in ("power_sum", "renyi_entropy", "shannon", "sm2", "entropy"):
        if K is None:
            raise ValueError("entropy targets need the dimension K")
        if target == "shannon":
            return A * math.log(K) - mod_kl()
        if target == "sm2":
            if entropy_spec is None or entropy_spec.kind != "sm2":
                raise ValueError("sm2 inversion needs its entropy spec")
            y = mod_kl() - A * math.log(K)  # optimal sum q log q
            return (math.exp((entropy_spec.s - 1.0) * y) - 1.0) / (1.0 - entropy_spec.s)
        h = hellinger()
        psum = K ** (1.0 - g) * h
        if target == "power_sum":
            return psum
        if target == "renyi_entropy":
            return math.log(psum) / (1.0 - g)
        # entropy family
        if entropy_spec is None:
            raise ValueError("entropy target needs an entropy spec")
        if entropy_spec.kind == "power":
            return entropy_spec.c1 * (psum**entropy_spec.c2 - entropy_spec.c3)
        if entropy_spec.kind == "log":
            return entropy_spec.c4 / entropy_spec.fprime0 * math.log(psum)
        raise ValueError("shannon/sm2 entropy specs use their named targets")
    raise ValueError(f"unknown inversion target {target!r}")


def _delta_stderr(target, est: Estimate, n: int, gen, A, K, entropy_spec) -> float:
    """Propagate the log-scale stderr through the inversion numerically."""
    if not math.isfinite(est.log_pi_hat) or not math.isfinite(est.stderr_log_pi):
        return INF
    h = max(est.stderr_log_pi, 1e-9)
    try:
        up = invert(target, est.log_pi_hat + h, n, gen=gen, A=A, K=K,
                    entropy_spec=entropy_spec)
        dn = invert(target, est.log_pi_hat - h, n, gen=gen, A=A, K=K,
                    entropy_spec=entropy_spec)
    except ValueError:
        return INF
    return abs(up - dn) / 2.0


def finalize(est: Estimate, target, n: int, gen=None, A: float = 1.0,
             K: Optional[int] = None, entropy_spec=None) -> Estimate:
    """Fill in the inverted value and its delta-method stderr."""
    if est.hits == 0:
        est.value = INF
        return est
    est.value = invert(target, est.log_pi_hat, n, gen=gen, A=A, K=K,
                       entropy_spec=entropy_spec)
    est.stderr = _delta_stderr(target, est, n, gen, A, K, entropy_spec)
    return est


# ---------------------------------------------------------------------------
# bounds for generators without a closed-form inversion


def solve_m_equation(gen: Generator, Q, P, tol: float = 1e-10) -> float:
    """Unique root of sum_k q_k phi'(m q_k / p_k) = 0 by bisection on
    [min p_k/q_k, max p_k/q_k]."""
    Q = np.asarray(Q, dtype=float)
    P = np.asarray(P, dtype=float)
    if np.any(Q <= 0) or np.any(P <= 0):
        raise ValueError("m-equation needs strictly positive Q and P")

    def psi(m: float) -> float:
        vals = np.asarray(gen.phi_prime(m * Q / P), dtype=float)
        if np.any(~np.isfinite(vals)):
            raise ValueError("ratio left int(dom phi) during bisection")
        return float(Q @ vals)

    lo = float(np.min(P / Q))
    hi = float(np.max(P / Q))
    if lo == hi:
        return lo
    flo, fhi = psi(lo), psi(hi)
    if flo > 0 or fhi < 0:  # numerical guard; theory gives flo <= 0 <= fhi
        lo *= 0.999
        hi *= 1.001
        flo, fhi = psi(lo), psi(hi)
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if psi(mid) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, abs(lo)):
            break
    return 0.5 * (lo + hi)


def bounds_general(gen: Generator, part_or_P, omega: ConstraintSet,
                   config: EstimatorConfig, mode: str = "simplex",
                   law: Optional[WeightLaw] = None):
    """Sharp lower/upper bounds for the constrained minimum of a general
    (non power type) divergence over a simplex constraint set.

    Lower bound: the estimated inf over (Q, m) of D(m Q, P).  Upper bound:
    D(Q_hat, P) at a feasible Q_hat found by iterative descent, accepted
    once its m-projected value is within eta of the lower estimate.
    For power-type generators the exact inversion collapses both bounds.
    """
    if isinstance(gen, PowerGamma):
        est = is_estimate(gen, part_or_P, omega, config, mode=mode, law=law)
        A = omega.scale
        est = finalize(est, "divergence", config.n, gen=gen, A=A)
        return est.value, est.value, None, est
    if mode == "empirical":
        part, P = part_or_P, None
    else:
        part, P = None, part_or_P
    part, mass, law = _prepare(gen, P, part, config, mode, law)
    if omega.scale != 1.0:
        raise ValueError("general-divergence bounds run on probability-simplex sets")
    p_ref = part.p_tilde
    est = is_estimate(gen, part_or_P, omega, config, mode=mode, law=law)
    lower = -est.log_pi_hat / config.n if math.isfinite(est.log_pi_hat) else INF
    eta = 1e-3 * max(abs(lower), 1e-6)

    # descent for the upper bound: short feasible runs, refined toward the
    # reference (the divergence decreases along that ray), accepted once
    # the m-projected value comes within eta of the lower estimate
    m_short = int(math.ceil(max(1.0 / part.p_tilde)))
    sizes = partition(part.p_tilde, max(m_short, part.K)).sizes
    m_short = int(sizes.sum())
    chunk = 512
    best_q = None
    best_div = INF
    q_hat = None
    budget = max(20, config.proxy.budget // chunk)
    warnings = list(est.warnings)
    for ci in range(budget):
        rng = _rng(config.seed, _PHASE_BOUNDS, ci)
        sums = np.empty((chunk, part.K))
        for k in range(part.K):
            sums[:, k] = law.sample_block_sum(int(sizes[k]), rng, chunk)
        totals = sums.sum(axis=1)
        ok = totals > 0
        if not np.any(ok):
            continue
        qs = sums[ok] / totals[ok, None]
        member = omega.contains(qs)
        if not np.any(member):
            continue
        for q in qs[member]:
            q = _refine_toward_reference(q, part, omega, "simplex", mass)
            q = _polish_proxy(gen, q, part, omega, "simplex", mass)
            if np.any(q <= 0):
                continue
            d = divergence(gen, q, p_ref)
            if d >= best_div:
                continue
            best_div, best_q = d, q
            m = solve_m_equation(gen, q, p_ref, tol=config.bisection_tol)
            if divergence(gen, m * q, p_ref) < lower + eta:
                q_hat = q
                break
        if q_hat is not None:
            break
    if q_hat is None:
        q_hat = best_q
        warnings.append("descent budget exhausted; upper bound is best-so-far")
    if q_hat is None:
        raise RuntimeError("no feasible point found for the upper bound")
    upper = divergence(gen, q_hat, p_ref)
    est.warnings = warnings
    est.value = lower
    est.stderr = est.stderr_log_pi / config.n if math.isfinite(est.stderr_log_pi) else INF
    return lower, upper, q_hat, est


# ---------------------------------------------------------------------------
# high-level pipelines


def estimate_min_divergence(gen: Generator, P, omega: ConstraintSet,
                            config: EstimatorConfig, mode: str = "deterministic",
                            target: Optional[str] = None,
                            law: Optional[WeightLaw] = None,
                            naive: bool = False) -> Estimate:
    """Full pipeline: partition, proxy search, importance sampling,
    inversion.  ``P`` is the reference vector (deterministic/simplex) or a
    BlockPartition from ``ingest_sample`` (empirical)."""
    if target is None:
        target = "deterministic" if mode == "deterministic" else "divergence"
    if naive:
        if mode == "empirical":
            est = naive_estimate(gen, None, omega, config, mode, part=P, law=law)
        else:
            est = naive_estimate(gen, P, omega, config, mode, law=law)
    else:
        est = is_estimate(gen, P, omega, config, mode=mode, law=law)
    A = omega.scale if mode != "deterministic" else 1.0
    K = P.K if isinstance(P, BlockPartition) else len(np.atleast_1d(P))
    return finalize(est, target, config.n, gen=gen, A=A, K=K)


def estimate_entropy_extremum(spec: EntropySpec, K: int, omega: ConstraintSet,
                              config: EstimatorConfig) -> Estimate:
    """Constrained entropy extremum over Omega in A * simplex, via the
    uniform reference vector."""
    if spec.kind in ("shannon", "sm2"):
        gen = PowerGamma(1.0, 1.0)
        target = "shannon" if spec.kind == "shannon" else "sm2"
    else:
        gen = PowerGamma(spec.gamma, 1.0)
        target = "entropy"
    p_unif = np.full(K, 1.0 / K)
    est = is_estimate(gen, p_unif, omega, config, mode="simplex")
    return finalize(est, target, config.n, gen=gen, A=omega.scale, K=K,
                    entropy_spec=spec)
