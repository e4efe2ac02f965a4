"""Classical binary-quadratic samplers and the penalty-retune loop.

All stochastic solvers are bit-reproducible for a fixed (seed, parameters)
pair; per-read randomness is derived from (seed, read index) so batched and
sequential execution agree.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .errors import NoValidSolution, TooLarge
from .qubo import PenaltyConfig, Qubo
from .routes import RouteSolution

BRUTE_FORCE_MAX_VARS = 28
_EPS = 1e-12


@dataclass(frozen=True)
class SolveReport:
    best_energy: float
    best_assignment: np.ndarray
    samples_evaluated: int
    wall_time: float
    solver_name: str
    seed: int
    retunes: int = 0


def _finish(q: Qubo, x: np.ndarray, samples: int, t0: float, name: str, seed: int) -> SolveReport:
    x = np.asarray(x, dtype=np.uint8)
    # reported energy is always a fresh evaluation of the assignment
    return SolveReport(
        best_energy=q.energy(x),
        best_assignment=x,
        samples_evaluated=samples,
        wall_time=time.perf_counter() - t0,
        solver_name=name,
        seed=seed,
    )


# --- exhaustive enumeration -------------------------------------------------

def enumerate_all_energies(q: Qubo) -> np.ndarray:
    """Energies of all 2^n assignments; entry p has bit j of p as x_j.

    Incremental doubling fill: O(2^n) work and memory, exact for
    integer-valued coefficients.
    """
    n = q.n
    if n > BRUTE_FORCE_MAX_VARS:
        raise TooLarge(f"{n} variables > enumeration cap {BRUTE_FORCE_MAX_VARS}")
    energies = np.empty(1 << n)
    energies[0] = q.offset
    if n == 0:
        return energies
    cols: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for (i, j), v in q.quadratic.items():
        cols[j].append((i, v))  # i < j by construction
    cross = np.empty(1 << (n - 1)) if n > 1 else np.empty(1)
    for i in range(n):
        h = 1 << i
        col = dict(cols[i])
        cross[0] = 0.0
        for j in range(i):
            hj = 1 << j
            c = col.get(j)
            if c is None:
                cross[hj : 2 * hj] = cross[:hj]
            else:
                np.add(cross[:hj], c, out=cross[hj : 2 * hj])
        np.add(energies[:h], q.linear.get(i, 0.0), out=energies[h : 2 * h])
        energies[h : 2 * h] += cross[:h]
    return energies


def _lex_keys(indices: np.ndarray, n: int) -> np.ndarray:
    """Key comparing assignments as tuples (x_0, x_1, ...) lexicographically."""
    keys = np.zeros_like(indices)
    for j in range(n):
        keys |= ((indices >> j) & 1) << (n - 1 - j)
    return keys


def bits_of(index: int, n: int) -> np.ndarray:
    return np.array([(index >> j) & 1 for j in range(n)], dtype=np.uint8)


def brute_force(q: Qubo) -> SolveReport:
    """Global minimum over all assignments; ties break to the
    lexicographically smallest bit tuple."""
    t0 = time.perf_counter()
    n = q.n
    energies = enumerate_all_energies(q)
    best = float(energies.min())
    best_key = None
    chunk = 1 << 20
    for lo in range(0, len(energies), chunk):
        block = energies[lo : lo + chunk]
        local = np.flatnonzero(block == best)
        if len(local):
            keys = _lex_keys(local.astype(np.int64) + lo, n)
            k = int(keys.min())
            if best_key is None or k < best_key:
                best_key = k
    assert best_key is not None
    # invert the key back into an assignment index
    index = 0
    for j in range(n):
        if best_key & (1 << (n - 1 - j)):
            index |= 1 << j
    return _finish(q, bits_of(index, n), 1 << n, t0, "brute", 0)


# --- local search -----------------------------------------------------------

def _row_energies(q: Qubo, states: np.ndarray) -> np.ndarray:
    lin, _, _, _ = q.as_arrays()
    sym = q.dense_symmetric()
    return q.offset + states @ lin + 0.5 * np.einsum("bi,bi->b", states @ sym, states)


def _descend(q: Qubo, states: np.ndarray) -> tuple[np.ndarray, int]:
    """Steepest single-flip descent on each row until no move improves."""
    lin, _, _, _ = q.as_arrays()
    sym = q.dense_symmetric()
    x = states.astype(np.float64)
    deltas = (1.0 - 2.0 * x) * (lin + x @ sym)
    flips = 0
    while True:
        best_col = np.argmin(deltas, axis=1)
        rows_all = np.arange(len(x))
        best_val = deltas[rows_all, best_col]
        active = best_val < -_EPS
        if not active.any():
            break
        rows = np.flatnonzero(active)
        cols = best_col[rows]
        flips += len(rows)
        sign = 1.0 - 2.0 * x[rows, cols]
        x[rows, cols] = 1.0 - x[rows, cols]
        old = deltas[rows, cols].copy()
        deltas[rows, :] += (1.0 - 2.0 * x[rows, :]) * sym[cols, :] * sign[:, None]
        deltas[rows, cols] = -old
    return x, flips


def greedy_descent(q: Qubo, starts: int = 64, seed: int = 0) -> SolveReport:
    """Steepest descent from `starts` random states; best local optimum wins."""
    if starts < 1:
        raise ValueError("need at least one start")
    t0 = time.perf_counter()
    if q.n == 0:
        return _finish(q, np.zeros(0), 1, t0, "greedy", seed)
    rng = np.random.default_rng(seed)
    states = (rng.random((starts, q.n)) < 0.5).astype(np.float64)
    final, flips = _descend(q, states)
    energies = _row_energies(q, final)
    best_row = int(np.argmin(energies))
    return _finish(q, final[best_row], starts + flips, t0, "greedy", seed)


def greedy_post(q: Qubo, report: SolveReport) -> SolveReport:
    """Descend from a previous report's best assignment; never worse."""
    t0 = time.perf_counter()
    start = np.asarray(report.best_assignment, dtype=np.float64).reshape(1, -1)
    if start.shape[1] != q.n:
        raise ValueError(f"assignment length {start.shape[1]} != {q.n}")
    if q.n == 0:
        return replace(report, solver_name=report.solver_name + "+greedy")
    final, flips = _descend(q, start)
    out = _finish(
        q,
        final[0],
        report.samples_evaluated + flips,
        t0,
        report.solver_name + "+greedy",
        report.seed,
    )
    return replace(
        out,
        retunes=report.retunes,
        wall_time=report.wall_time + out.wall_time,
    )


def _read_batch_size(reads: int, sweeps: int, n: int) -> int:
    budget = 48_000_000  # pre-drawn uniforms per batch (~0.4 GB)
    per_read = max(sweeps * n, 1)
    return max(1, min(reads, budget // per_read))


def simulated_annealing(
    q: Qubo,
    sweeps: int = 1000,
    beta_schedule: tuple[float, float] = (0.1, 10.0),
    reads: int = 1000,
    seed: int = 0,
) -> SolveReport:
    """Metropolis sweeps over a geometric inverse-temperature ramp.

    Each read is an independent restart with its own RNG stream; uphill
    flips are accepted with probability exp(-beta * delta).
    """
    beta_min, beta_max = beta_schedule
    if not beta_min < beta_max:
        raise ValueError("need beta_min < beta_max")
    if reads < 1 or sweeps < 1:
        raise ValueError("reads and sweeps must be >= 1")
    t0 = time.perf_counter()
    n = q.n
    if n == 0:
        return _finish(q, np.zeros(0), reads, t0, "sa", seed)
    lin, _, _, _ = q.as_arrays()
    # float32 state: exact for integer-valued instances, and the winning
    # assignment is re-evaluated in float64 at the end either way
    lin = lin.astype(np.float32)
    sym = q.dense_symmetric().astype(np.float32)
    betas = np.geomspace(beta_min, beta_max, sweeps)

    best_state = None
    best_energy = np.inf
    batch = _read_batch_size(reads, sweeps, n)
    for first in range(0, reads, batch):
        count = min(batch, reads - first)
        inits = np.empty((count, n))
        thresholds = np.empty((count, sweeps, n))
        for r in range(count):
            gen = np.random.Generator(
                np.random.Philox(key=[seed & 0xFFFFFFFFFFFFFFFF, first + r])
            )
            inits[r] = gen.random(n)
            thresholds[r] = gen.random((sweeps, n))
        # accepting delta d with probability exp(-beta * max(d, 0)) against a
        # uniform u in [0,1) is exactly the test d < -log(u)/beta
        np.log(thresholds, out=thresholds)
        thresholds *= -1.0
        thresholds /= betas[None, :, None]
        thresholds = thresholds.astype(np.float32)
        x = (inits < 0.5).astype(np.float32)
        deltas = (1.0 - 2.0 * x) * (lin + x @ sym)
        current = _row_energies(q, x.astype(np.float64))
        floor = float(current.min())
        if floor < best_energy:
            best_energy = floor
            best_state = x[int(np.argmin(current))].copy()
        for s in range(sweeps):
            for i in range(n):
                rows = np.flatnonzero(deltas[:, i] < thresholds[:, s, i])
                if not len(rows):
                    continue
                sign = 1.0 - 2.0 * x[rows, i]
                x[rows, i] = 1.0 - x[rows, i]
                old = deltas[rows, i].copy()
                deltas[rows, :] += (1.0 - 2.0 * x[rows, :]) * sym[i, :] * sign[:, None]
                deltas[rows, i] = -old
                current[rows] += old
                floor = float(current[rows].min())
                if floor < best_energy:
                    best_energy = floor
                    best_state = x[rows[int(np.argmin(current[rows]))]].copy()
    assert best_state is not None
    return _finish(q, best_state, reads * sweeps * n, t0, "sa", seed)


def tabu_search(
    q: Qubo,
    tenure: int | None = None,
    iterations: int | None = None,
    seed: int = 0,
) -> SolveReport:
    """Best-improvement single flips with a recency tabu and aspiration.

    Recently flipped variables stay tabu for `tenure` iterations unless the
    move would beat the incumbent best.
    """
    t0 = time.perf_counter()
    n = q.n
    if n == 0:
        return _finish(q, np.zeros(0), 1, t0, "tabu", seed)
    if tenure is None:
        tenure = max(10, n // 10)
    if tenure < 1:
        raise ValueError("tenure must be >= 1")
    if iterations is None:
        iterations = 1000 + 10 * n
    lin, _, _, _ = q.as_arrays()
    sym = q.dense_symmetric()
    rng = np.random.default_rng(seed)
    x = (rng.random(n) < 0.5).astype(np.float64)
    deltas = (1.0 - 2.0 * x) * (lin + x @ sym)
    current = float(q.energy(x))
    best_state = x.copy()
    best_energy = current
    tabu_until = np.zeros(n, dtype=np.int64)
    for it in range(iterations):
        candidate = deltas.copy()
        tabu = tabu_until > it
        aspiration = current + deltas < best_energy - _EPS
        blocked = tabu & ~aspiration
        if blocked.all():
            blocked[:] = False  # everything tabu: fall back to the plain best move
        candidate[blocked] = np.inf
        j = int(np.argmin(candidate))
        sign = 1.0 - 2.0 * x[j]
        x[j] = 1.0 - x[j]
        old = deltas[j]
        deltas += (1.0 - 2.0 * x) * sym[j, :] * sign
        deltas[j] = -old
        current += old
        tabu_until[j] = it + 1 + tenure
        if current < best_energy:
            best_energy = current
            best_state = x.copy()
    return _finish(q, best_state, iterations * n, t0, "tabu", seed)


# --- retune loop -------------------------------------------------------------

Sampler = Callable[[Qubo], SolveReport]


@dataclass
class CompiledInstance:
    """What the retune loop needs from a compiled problem."""

    qubo: Qubo
    decode: Callable[[Sequence[int]], RouteSolution]
    constraint_values: Callable[[Sequence[int]], dict[str, float]]


def solve_with_retune(
    builder: Callable[[PenaltyConfig], CompiledInstance],
    pen: PenaltyConfig,
    sampler: Sampler,
    max_retunes: int = 5,
) -> tuple[SolveReport, RouteSolution]:
    """Solve, decode, validate; double the violated penalty families and
    retry until the decode is valid or the retune budget runs out.

    Turn bonuses are objective terms, not validity constraints, so they are
    never retuned.
    """
    if max_retunes < 0:
        raise ValueError("max_retunes must be >= 0")
    retunes = 0
    while True:
        instance = builder(pen)
        report = sampler(instance.qubo)
        solution = instance.decode(report.best_assignment)
        if solution.is_valid:
            return replace(report, retunes=retunes), solution
        values = instance.constraint_values(report.best_assignment)
        violated = sorted(
            fam for fam, v in values.items() if fam != "turn" and v > 1e-9
        )
        if retunes >= max_retunes or not violated:
            raise NoValidSolution(
                f"no valid decode after {retunes} retunes; "
                f"violated families: {violated or 'none'}"
            )
        pen = pen.scaled(violated, 2.0)
        retunes += 1


# --- named sampler construction ----------------------------------------------

SOLVER_NAMES = ("brute", "greedy", "sa", "tabu", "sa+greedy", "tabu+greedy")


def make_sampler(
    name: str,
    seed: int = 0,
    starts: int = 64,
    sweeps: int = 1000,
    reads: int = 1000,
    beta_schedule: tuple[float, float] = (0.1, 10.0),
    tenure: int | None = None,
    iterations: int | None = None,
) -> Sampler:
    """Sampler closure for a solver name like 'sa+greedy'."""
    if name not in SOLVER_NAMES:
        raise ValueError(f"unknown solver {name!r}; pick one of {SOLVER_NAMES}")
    base, _, post = name.partition("+")

    def run(q: Qubo) -> SolveReport:
        if base == "brute":
            report = brute_force(q)
        elif base == "greedy":
            report = greedy_descent(q, starts=starts, seed=seed)
        elif base == "sa":
            report = simulated_annealing(
                q, sweeps=sweeps, beta_schedule=beta_schedule, reads=reads, seed=seed
            )
        else:
            report = tabu_search(q, tenure=tenure, iterations=iterations, seed=seed)
        if post == "greedy":
            report = greedy_post(q, report)
        return report

    return run
