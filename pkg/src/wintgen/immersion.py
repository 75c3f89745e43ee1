"""Second fundamental forms of parametrised immersions into Euclidean space.

Derivatives are taken by central differences (one Richardson level by
default); frames are orthonormalised in the ambient space so the resulting
``h`` plugs straight into :mod:`wintgen.invariants`.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .ambient import SpaceForm
from .errors import DimensionError, IncompatibleModelError, InvariantError
from .inequalities import IMMERSION_TOL, GapResult, applicable_inequalities, evaluate
from .invariants import SecondFundamentalForm

DEFAULT_STEP = 1e-4
RANK_TOL = 1e-6

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


@dataclass(frozen=True)
class Immersion:
    n: int
    m: int
    evaluator: Callable[[np.ndarray], np.ndarray]
    catalog_id: str | None = None
    domain: tuple[tuple[float, float], ...] | None = None

    def __call__(self, u) -> np.ndarray:
        return np.asarray(self.evaluator(np.asarray(u, dtype=float)), dtype=float)

    def grid(self, k: int) -> list[np.ndarray]:
        """``k`` points per parameter axis, interior of the domain box."""
        if self.domain is None:
            raise ValueError(f"immersion {self.catalog_id!r} has no parameter domain")
        axes = [lo + (hi - lo) * (np.arange(k) + 0.5) / k for lo, hi in self.domain]
        return [np.array(p) for p in itertools.product(*axes)]

    def padded(self, m: int) -> "Immersion":
        """Same immersion followed by the inclusion E^self.m -> E^m."""
        if m < self.m:
            raise DimensionError(f"cannot embed E^{self.m} into E^{m}")
        f, extra = self.evaluator, m - self.m
        return Immersion(self.n, m, lambda u: np.concatenate([f(u), np.zeros(extra)]),
                         self.catalog_id, self.domain)

    def moved(self, rotation, translation=None) -> "Immersion":
        """Compose with the rigid motion x -> rotation @ x + translation."""
        Rm = np.asarray(rotation, dtype=float)
        b = np.zeros(self.m) if translation is None else np.asarray(translation, dtype=float)
        f = self.evaluator
        return Immersion(self.n, self.m, lambda u: Rm @ f(u) + b, self.catalog_id, self.domain)


@dataclass(frozen=True, eq=False)
class PointFrame:
    point: np.ndarray
    tangent_frame: np.ndarray  # m x n, columns e_i
    normal_frame: np.ndarray  # m x (m - n), columns v_r
    h: SecondFundamentalForm


# -- catalog ------------------------------------------------------------------


def round_sphere(n: int = 2, radius: float = 1.0, m: int | None = None) -> Immersion:
    """S^n(radius) in E^{n+1} via hyperspherical angles, optionally padded to E^m."""

    def f(u):
        x = np.empty(n + 1)
        s = radius
        for k in range(n):
            x[k] = s * math.cos(u[k])
            s *= math.sin(u[k])
        x[n] = s
        return x

    dom = tuple([(0.3, math.pi - 0.3)] * (n - 1) + [(0.1, 2 * math.pi - 0.1)])
    imm = Immersion(n, n + 1, f, f"sphere:n={n},r={radius}", dom)
    return imm.padded(m) if m is not None else imm


def clifford_torus() -> Immersion:
    def f(u):
        return np.array([math.cos(u[0]), math.sin(u[0]), math.cos(u[1]), math.sin(u[1])]) / math.sqrt(2.0)

    return Immersion(2, 4, f, "clifford_torus", ((0.0, 2 * math.pi), (0.0, 2 * math.pi)))


def product_spheres(p: int = 1, a: float = 1.0, q: int = 1, b: float = 1.0) -> Immersion:
    """S^p(a) x S^q(b) in E^{p+q+2}."""
    s1, s2 = round_sphere(p, a), round_sphere(q, b)

    def f(u):
        return np.concatenate([s1(u[:p]), s2(u[p:])])

    return Immersion(p + q, p + q + 2, f, f"product_spheres:p={p},a={a},q={q},b={b}",
                     s1.domain + s2.domain)


def graph(F: Callable[[np.ndarray], np.ndarray], n: int, k: int, domain=None,
          catalog_id: str = "graph") -> Immersion:
    """u -> (u, F(u)) with F: R^n -> R^k."""

    def f(u):
        return np.concatenate([u, np.atleast_1d(F(u))])

    dom = tuple(domain) if domain is not None else tuple([(-1.0, 1.0)] * n)
    return Immersion(n, n + k, f, catalog_id, dom)


def holomorphic_graph() -> Immersion:
    """Graph of z -> z^2 in C^2 = E^4; a Wintgen-equality surface."""
    return graph(lambda u: np.array([u[0] ** 2 - u[1] ** 2, 2 * u[0] * u[1]]), 2, 2,
                 catalog_id="holomorphic_graph")


def polynomial_immersion(components: Sequence[Sequence], n: int, domain=None,
                         catalog_id: str = "polynomial") -> Immersion:
    """Each ambient coordinate is a sum of ``[coefficient, [exponents...]]`` terms."""
    terms = []
    for c, comp in enumerate(components):
        parsed = []
        for term in comp:
            coef, powers = term
            powers = [int(p) for p in powers]
            if len(powers) != n or any(p < 0 for p in powers):
                raise InvariantError(f"component {c}: exponents {powers} do not match n={n}")
            parsed.append((float(coef), powers))
        terms.append(parsed)

    def f(u):
        return np.array([sum(coef * math.prod(u[i] ** p for i, p in enumerate(pw)) for coef, pw in comp)
                         for comp in terms])

    dom = tuple(tuple(map(float, d)) for d in domain) if domain is not None else tuple([(-1.0, 1.0)] * n)
    return Immersion(n, len(terms), f, catalog_id, dom)


def load_polynomial_immersion(path) -> Immersion:
    path = Path(path)
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    try:
        n = int(data["n"])
        comps = data["components"]
    except KeyError as exc:
        raise InvariantError(f"{path}: missing field {exc.args[0]!r}") from None
    return polynomial_immersion(comps, n, data.get("domain"), catalog_id=f"file:{path.name}")


CATALOG: dict[str, Callable[..., Immersion]] = {
    "sphere": round_sphere,
    "clifford_torus": clifford_torus,
    "product_spheres": product_spheres,
    "holomorphic_graph": holomorphic_graph,
}


def from_catalog(spec: str) -> Immersion:
    """``name`` or ``name:key=value,...``, e.g. ``sphere:n=3,r=1``."""
    name, _, args = spec.partition(":")
    if name not in CATALOG:
        raise KeyError(f"unknown catalog immersion {name!r}; known: {', '.join(sorted(CATALOG))}")
    kwargs = {}
    aliases = {"r": "radius"}
    for item in filter(None, args.split(",")):
        key, _, val = item.partition("=")
        key = aliases.get(key.strip(), key.strip())
        kwargs[key] = int(val) if key in ("n", "m", "p", "q") else float(val)
    return CATALOG[name](**kwargs)


# -- frames and second fundamental form ---------------------------------------


def _central(f, u: np.ndarray, s: float) -> tuple[np.ndarray, np.ndarray]:
    n = u.shape[0]
    f0 = f(u)
    m = f0.shape[0]
    J = np.empty((m, n))
    Hs = np.empty((n, n, m))
    I = np.eye(n) * s
    plus = [f(u + I[i]) for i in range(n)]
    minus = [f(u - I[i]) for i in range(n)]
    for i in range(n):
        J[:, i] = (plus[i] - minus[i]) / (2 * s)
        Hs[i, i] = (plus[i] - 2 * f0 + minus[i]) / s**2
        for j in range(i + 1, n):
            mixed = (f(u + I[i] + I[j]) - f(u + I[i] - I[j]) - f(u - I[i] + I[j]) + f(u - I[i] - I[j])) / (4 * s**2)
            Hs[i, j] = Hs[j, i] = mixed
    return J, Hs


def derivatives(imm: Immersion, u, step: float = DEFAULT_STEP, richardson: bool = True):
    """Jacobian (m x n) and Hessian stack (n x n x m) at ``u``."""
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    u = np.asarray(u, dtype=float)
    if u.shape != (imm.n,):
        raise DimensionError(f"parameter point must have length {imm.n}")
    J, Hs = _central(imm, u, step)
    if richardson:
        J2, Hs2 = _central(imm, u, step / 2)
        J, Hs = (4 * J2 - J) / 3, (4 * Hs2 - Hs) / 3
    return J, Hs


def _point_seed(u: np.ndarray) -> int:
    return int.from_bytes(hashlib.sha256(np.ascontiguousarray(u, dtype=float).tobytes()).digest()[:8], "little")


def _orthonormal_columns(M: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(M)
    return q * np.where(np.diagonal(r) < 0, -1.0, 1.0)


def frame_at(imm: Immersion, u, step: float = DEFAULT_STEP, richardson: bool = True,
             normal_seed: int | None = None) -> PointFrame:
    """Orthonormal tangent/normal frames and h at parameter point ``u``.

    The normal frame completes the tangent frame from random vectors seeded
    by ``normal_seed`` (default: a hash of ``u``), so results are reproducible
    while still exercising the gauge freedom in the normal bundle.
    """
    u = np.asarray(u, dtype=float)
    J, Hs = derivatives(imm, u, step, richardson)
    n, m = imm.n, J.shape[0]
    if m <= n:
        raise DimensionError(f"ambient dimension {m} must exceed n={n}")
    sv = np.linalg.svd(J, compute_uv=False)
    if sv[-1] < RANK_TOL:
        raise InvariantError(f"Jacobian is rank-deficient at {u.tolist()} (sigma_min={sv[-1]:.2e})")
    q, r = np.linalg.qr(J)
    signs = np.where(np.diagonal(r) < 0, -1.0, 1.0)
    E = q * signs
    T = np.linalg.inv(r * signs[:, None])  # J @ T = E
    rng = np.random.default_rng(_point_seed(u) if normal_seed is None else normal_seed)
    G = rng.standard_normal((m, m - n))
    for _ in range(2):
        G = G - E @ (E.T @ G)
    Nf = _orthonormal_columns(G)
    proj = np.einsum("ijk,kr->rij", Hs, Nf)
    h = np.einsum("ia,rij,jb->rab", T, proj, T)
    h = 0.5 * (h + h.transpose(0, 2, 1))
    return PointFrame(u, E, Nf, SecondFundamentalForm(h))


def verify_immersion(imm: Immersion, points, model=None, ids=None, tol: float = IMMERSION_TOL,
                     step: float = DEFAULT_STEP, richardson: bool = True) -> list[GapResult]:
    """Gaps at each point, in point order then id order."""
    model = SpaceForm(0.0) if model is None else model
    if not (isinstance(model, SpaceForm) and model.c == 0.0):
        raise IncompatibleModelError("numerical immersions live in Euclidean space (spaceform:0)")
    out = []
    for u in points:
        pf = frame_at(imm, u, step, richardson)
        use = ids if ids is not None else applicable_inequalities(model, imm.n, imm.m, pf.h, tol)
        out.extend(evaluate(pf.h, model, imm.m, use, tol))
    return out
