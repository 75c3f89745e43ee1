"""Mass fuzzing of the algebraic DDVV core and numerical sharpness search."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ambient import AmbientModel, ambient_scalar_curvature, conformal_correction, ric_tangent_trace
from .equality import EqualityCertificate, canonical_operators, detect_equality
from .errors import DimensionError
from .inequalities import InequalityId, gap
from .invariants import SecondFundamentalForm, k_n_from_components

VIOLATION_TOL = 1e-9
SMOOTHING_EPS = 1e-18
STRUCTURED_FRACTION = 0.2


@dataclass(frozen=True, eq=False)
class DdvvInstance:
    """One evaluation of  sum (h_ii - h_jj)^2 + 2n sum h_ij^2  >=  2n sqrt(K_N)."""

    h: SecondFundamentalForm
    lhs: float
    rhs: float
    typeset: bool = False

    @property
    def n(self) -> int:
        return self.h.n

    @property
    def codim(self) -> int:
        return self.h.codim

    @property
    def slack(self) -> float:
        return self.lhs - self.rhs


def _ddvv_sides(H: np.ndarray, typeset: bool) -> tuple[float, float]:
    n = H.shape[1]
    iu, ju = np.triu_indices(n, k=1)
    d = np.diagonal(H, axis1=1, axis2=2)
    diffs = float(np.sum((d[:, iu] - d[:, ju]) ** 2))
    second = float(np.sum(d[:, iu] ** 2)) if typeset else float(np.sum(H[:, iu, ju] ** 2))
    lhs = diffs + 2 * n * second
    rhs = 2 * n * math.sqrt(k_n_from_components(H))
    return lhs, rhs


def ddvv_slack(h: SecondFundamentalForm, typeset: bool = False) -> DdvvInstance:
    """Evaluate the core algebraic inequality on ``h``.

    ``typeset=True`` uses squared *diagonal* entries in the middle term instead
    of squared off-diagonal entries; that variant is not a valid inequality and
    is kept only for comparison.
    """
    lhs, rhs = _ddvv_sides(np.asarray(h.h), typeset)
    return DdvvInstance(h, lhs, rhs, typeset)


def slack_batch(H: np.ndarray, typeset: bool = False) -> np.ndarray:
    """Vectorised slack for a stack of forms of shape (N, codim, n, n)."""
    n = H.shape[-1]
    iu, ju = np.triu_indices(n, k=1)
    d = np.diagonal(H, axis1=-2, axis2=-1)
    diffs = np.sum((d[..., iu] - d[..., ju]) ** 2, axis=(-2, -1))
    second = np.sum(d[..., iu] ** 2 if typeset else H[..., iu, ju] ** 2, axis=(-2, -1))
    lhs = diffs + 2 * n * second
    prod = np.einsum("prik,pskj->prsij", H, H)
    comm = prod - prod.transpose(0, 2, 1, 3, 4)
    codim = H.shape[1]
    ir, js = np.triu_indices(codim, k=1)
    k_n = np.sum(comm[:, ir, js][:, :, iu, ju] ** 2, axis=(1, 2))
    return lhs - 2 * n * np.sqrt(k_n)


def _random_orthogonal(rng: np.random.Generator, k: int, count: int) -> np.ndarray:
    Z = rng.standard_normal((count, k, k))
    Q, R = np.linalg.qr(Z)
    return Q * np.sign(np.diagonal(R, axis1=1, axis2=2))[:, None, :]


def sample_forms(rng: np.random.Generator, n: int, codim: int, count: int,
                 structured_fraction: float = STRUCTURED_FRACTION) -> np.ndarray:
    """Random h stacks: uniform entries plus umbilical, rank-one and near-equality draws."""
    X = rng.uniform(-1.0, 1.0, size=(count, codim, n, n))
    H = 0.5 * (X + X.transpose(0, 1, 3, 2))
    n_struct = int(round(structured_fraction * count))
    kinds = rng.integers(0, 3, size=n_struct)
    idx = rng.permutation(count)[:n_struct]
    for slot, kind in zip(idx, kinds):
        if kind == 0:
            H[slot] = rng.uniform(-1, 1, size=codim)[:, None, None] * np.eye(n)
        elif kind == 1:
            v = rng.standard_normal(n)
            v /= np.linalg.norm(v)
            H[slot] = rng.uniform(-1, 1, size=codim)[:, None, None] * np.outer(v, v)
        else:
            H[slot] = perturbed_canonical(rng, n, codim)
    return H


def perturbed_canonical(rng: np.random.Generator, n: int, codim: int, scale: float = 1e-3) -> np.ndarray:
    a = rng.uniform(-1, 1, size=3)
    if codim < 3:
        a[2] = 0.0
    if codim < 2:
        a[1] = 0.0
    beta = rng.uniform(-1, 1) if codim >= 2 else 0.0
    A = canonical_operators(n, codim, a[0], a[1], a[2], beta)
    Q = _random_orthogonal(rng, n, 1)[0]
    N = _random_orthogonal(rng, codim, 1)[0]
    A = np.einsum("sr,ia,sij,jb->rab", N, Q, A, Q)
    E = rng.uniform(-1, 1, size=A.shape)
    return A + scale * 0.5 * (E + E.transpose(0, 2, 1))


@dataclass
class FuzzCell:
    n: int
    codim: int
    samples: int
    min_slack: float
    violations: int
    worst: DdvvInstance


@dataclass
class FuzzSummary:
    seed: int
    samples: int
    min_slack: float
    violations: int
    worst: DdvvInstance
    cells: list[FuzzCell] = field(default_factory=list)
    typeset: bool = False


def fuzz(n_range, codim_range, samples: int, seed: int, typeset: bool = False,
         structured_fraction: float = STRUCTURED_FRACTION, chunk: int = 2048) -> FuzzSummary:
    """Fuzz the DDVV core over every (n, codim) pair, ``samples`` draws per pair.

    Deterministic for a given seed: each cell draws from its own child stream
    and cells are reduced in the order given.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    n_range, codim_range = list(n_range), list(codim_range)
    root = np.random.SeedSequence(seed)
    children = root.spawn(len(n_range) * len(codim_range))
    cells = []
    k = 0
    for n in n_range:
        for codim in codim_range:
            if n < 2 or codim < 1:
                raise DimensionError(f"invalid cell n={n}, codim={codim}")
            rng = np.random.default_rng(children[k])
            k += 1
            best_val, best_h, violations = math.inf, None, 0
            done = 0
            while done < samples:
                count = min(chunk, samples - done)
                H = sample_forms(rng, n, codim, count, structured_fraction)
                s = slack_batch(H, typeset)
                violations += int(np.sum(s < -VIOLATION_TOL))
                j = int(np.argmin(s))
                if s[j] < best_val:
                    best_val, best_h = float(s[j]), H[j].copy()
                done += count
            worst = ddvv_slack(SecondFundamentalForm(best_h), typeset)
            cells.append(FuzzCell(n, codim, samples, worst.slack, violations, worst))
    top = min(cells, key=lambda c: c.min_slack)
    return FuzzSummary(seed, samples * len(cells), top.min_slack, sum(c.violations for c in cells),
                       top.worst, cells, typeset)


# -- sharpness search ---------------------------------------------------------


@dataclass(frozen=True)
class SearchConfig:
    max_iter: int = 5000
    fd_step: float = 1e-6
    stall_tol: float = 1e-10
    certificate_tol: float = 1e-6
    initial_step: float = 0.5
    seed: int = 0
    initial_h: SecondFundamentalForm | None = None


@dataclass(frozen=True, eq=False)
class SearchResult:
    best_h: SecondFundamentalForm
    best_gap: float
    initial_gap: float
    iterations: int
    converged: bool
    certificate: EqualityCertificate | None = None
    diagnostics: str = ""


def _sym_basis(n: int) -> np.ndarray:
    """Orthonormal basis of symmetric n x n matrices under the Frobenius product."""
    mats = []
    for i in range(n):
        E = np.zeros((n, n))
        E[i, i] = 1.0
        mats.append(E)
    for i in range(n):
        for j in range(i + 1, n):
            E = np.zeros((n, n))
            E[i, j] = E[j, i] = 1.0 / math.sqrt(2.0)
            mats.append(E)
    return np.array(mats)


class _GapObjective:
    """prop1_rhoN gap (rhs - lhs) as a function of coordinates of h."""

    def __init__(self, model: AmbientModel, n: int, m: int):
        self.n, self.codim, self.m = n, m - n, m
        self.basis = _sym_basis(n)
        self.corr = conformal_correction(ric_tangent_trace(model, n, m), ambient_scalar_curvature(model, m), n, m)
        self.gauss_const = (n - 1) / (m - 2) * ric_tangent_trace(model, n, m) - n * (n - 1) * ambient_scalar_curvature(
            model, m) / ((m - 1) * (m - 2))
        self.iu, self.ju = np.triu_indices(n, k=1)
        self.ir, self.js = np.triu_indices(self.codim, k=1)

    def to_h(self, x: np.ndarray) -> np.ndarray:
        return np.einsum("rk,kij->rij", x.reshape(self.codim, -1), self.basis)

    def to_x(self, H: np.ndarray) -> np.ndarray:
        return np.einsum("rij,kij->rk", H, self.basis).ravel()

    def __call__(self, x: np.ndarray, eps: float = SMOOTHING_EPS) -> float:
        H = self.to_h(x)
        n, iu, ju = self.n, self.iu, self.ju
        d = np.diagonal(H, axis1=1, axis2=2)
        tau = self.gauss_const + np.sum(d[:, iu] * d[:, ju]) - np.sum(H[:, iu, ju] ** 2)
        rho = 2.0 * tau / (n * (n - 1))
        prod = np.einsum("rjk,ski->rsij", H, H)
        comm = prod - prod.transpose(1, 0, 2, 3)
        k_n = np.sum(comm[self.ir, self.js][:, iu, ju] ** 2)
        rho_n = 2.0 / (n * (n - 1)) * math.sqrt(k_n + eps)
        tr = np.trace(H, axis1=1, axis2=2) / n
        return float(tr @ tr + self.corr - rho - rho_n)

    def gradient(self, x: np.ndarray, step: float) -> np.ndarray:
        g = np.empty_like(x)
        h = step * max(1.0, float(np.linalg.norm(x)))
        for k in range(x.size):
            e = np.zeros_like(x)
            e[k] = h
            g[k] = (self(x + e) - self(x - e)) / (2 * h)
        return g


def maximize_gap(model: AmbientModel, n: int, m: int, config: SearchConfig = SearchConfig()) -> SearchResult:
    """Drive the prop1_rhoN gap to its infimum on the unit sphere of h-space.

    Maximises lhs - rhs by projected gradient ascent (central-difference
    gradients, Armijo backtracking) with ``|h| = 1`` restored after each step.
    """
    if n < 3:
        raise DimensionError(f"search is stated for n >= 3, got {n}")
    if m < max(4, n + 1):
        raise DimensionError(f"need m > n and m >= 4, got n={n}, m={m}")
    obj = _GapObjective(model, n, m)
    if config.initial_h is not None:
        x = obj.to_x(np.asarray(config.initial_h.h))
    else:
        x = np.random.default_rng(config.seed).standard_normal(obj.codim * obj.basis.shape[0])
    norm = np.linalg.norm(x)
    if norm == 0:
        raise ValueError("initial h must be nonzero")
    x = x / norm
    f = obj(x, 0.0)
    initial = f
    step = config.initial_step
    converged = False
    diagnostics = ""
    it = 0
    for it in range(1, config.max_iter + 1):
        if f <= config.stall_tol:
            converged = True
            break
        g = obj.gradient(x, config.fd_step)
        g -= (g @ x) * x  # tangent to the sphere
        gn = float(np.linalg.norm(g))
        if gn == 0.0:
            diagnostics = "zero projected gradient"
            break
        t = step
        while t > 1e-16:
            xn = x - t * g
            xn /= np.linalg.norm(xn)
            fn = obj(xn, 0.0)
            if fn <= f - 1e-4 * t * gn * gn:
                break
            t *= 0.5
        else:
            diagnostics = f"line search failed at gap {f:.3e}"
            break
        x, f = xn, fn
        step = min(2.0 * t, 1.0)
    else:
        diagnostics = f"iteration limit reached at gap {f:.3e}"

    if not converged and abs(f) <= config.certificate_tol and diagnostics.startswith("line search"):
        # stalled inside the certificate tolerance: nonsmooth stratum, accept
        converged = True
    H = SecondFundamentalForm(obj.to_h(x))
    best = gap(H, model, m, InequalityId.PROP1_RHO_N, config.certificate_tol).gap
    cert = None
    if converged and abs(best) <= config.certificate_tol:
        cert = detect_equality(H, model, m, tol=config.certificate_tol, seed=config.seed)
    return SearchResult(H, best, initial, it, converged, cert, diagnostics)


def search(model: AmbientModel, n: int, m: int, restarts: int = 8,
           config: SearchConfig = SearchConfig()) -> tuple[SearchResult, list[SearchResult]]:
    """Independent restarts with seeds derived from ``config.seed``; best by |gap|."""
    seeds = np.random.SeedSequence(config.seed).generate_state(restarts)
    runs = []
    for s in seeds:
        cfg = SearchConfig(config.max_iter, config.fd_step, config.stall_tol, config.certificate_tol,
                           config.initial_step, int(s), config.initial_h)
        runs.append(maximize_gap(model, n, m, cfg))
    best = min(runs, key=lambda r: abs(r.best_gap))
    return best, runs
