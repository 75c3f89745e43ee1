"""Scenario files and ambient-model specifications.

A scenario is a TOML file with three sections::

    [ambient]
    model = "quasi"          # spaceform | quasi | grw | explicit
    p = 1.0
    q = 0.5
    tangency = "tangent"     # or v_tangential = [...], v_normal_norm_sq = ...

    [submanifold]
    n = 3
    m = 6
    source = "explicit"      # explicit | canonical | random | immersion
    h.1.1.1 = 1.0            # h^r_ij, 1-based; (i, j) symmetry is completed

    [run]
    inequalities = ["prop1_rhoN", "thm1_rhoPerp"]
    tol = 1e-8
    certificate = true
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ambient import GRW, AmbientModel, Explicit, QuasiConstant, SpaceForm
from .equality import canonical_operators
from .errors import WintgenError
from .extremal import _random_orthogonal
from .immersion import Immersion, frame_at, from_catalog, load_polynomial_immersion
from .inequalities import EXACT_TOL, IMMERSION_TOL, InequalityId
from .invariants import SecondFundamentalForm

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

SEED_ENV = "WINTGEN_SEED"


class ScenarioError(WintgenError, ValueError):
    """Malformed scenario file or ambient specification."""


def default_seed(fallback: int = 0) -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return fallback
    try:
        return int(raw)
    except ValueError:
        raise ScenarioError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


@dataclass
class Scenario:
    name: str
    ambient: AmbientModel
    n: int
    m: int
    source: str
    forms: list[SecondFundamentalForm]
    labels: list[str]
    inequalities: list[InequalityId] | None
    tol: float
    violation_tol: float
    certificate: bool
    inputs: dict = field(default_factory=dict)


# -- ambient ------------------------------------------------------------------


def _num(section: dict, key: str, where: str, default=None) -> float:
    if key not in section:
        if default is not None:
            return default
        raise ScenarioError(f"{where}: missing field {key!r}")
    val = section[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ScenarioError(f"{where}.{key}: expected a number, got {val!r}")
    return float(val)


def _split(section: dict, n: int, where: str, vec_key: str, norm_key: str) -> tuple[tuple, float]:
    tangency = section.get("tangency")
    if tangency == "tangent":
        return (1.0,) + (0.0,) * (n - 1), 0.0
    if tangency == "normal":
        return (), 1.0
    if tangency is not None:
        raise ScenarioError(f"{where}.tangency: expected 'tangent' or 'normal', got {tangency!r}")
    vec = tuple(float(x) for x in section.get(vec_key, ()))
    if vec and len(vec) != n:
        raise ScenarioError(f"{where}.{vec_key}: expected {n} components, got {len(vec)}")
    default = 1.0 - sum(x * x for x in vec)
    return vec, _num(section, norm_key, where, default)


def ambient_from_section(section: dict, n: int, where: str = "ambient") -> AmbientModel:
    kind = section.get("model")
    try:
        if kind == "spaceform":
            return SpaceForm(_num(section, "c", where))
        if kind == "quasi":
            vec, nn = _split(section, n, where, "v_tangential", "v_normal_norm_sq")
            return QuasiConstant(_num(section, "p", where), _num(section, "q", where), vec, nn)
        if kind == "grw":
            vec, nn = _split(section, n, where, "t_tangential", "t_normal_norm_sq")
            return GRW(_num(section, "c", where), _num(section, "f", where), _num(section, "f_prime", where),
                       _num(section, "f_second", where), vec, nn)
        if kind == "explicit":
            return Explicit(_num(section, "ric_tangent_trace", where), _num(section, "tau_ambient", where))
    except ScenarioError:
        raise
    except (WintgenError, ValueError) as exc:
        raise ScenarioError(f"{where}: {exc}") from None
    raise ScenarioError(f"{where}.model: expected spaceform|quasi|grw|explicit, got {kind!r}")


def parse_ambient_spec(spec: str, n: int) -> AmbientModel:
    """Compact ambient strings used on the command line.

    ``spaceform:c``, ``quasi:p,q[,|V^T|^2]``, ``grw:c,f,f',f''[,tangent|normal]``,
    ``explicit:ric_trace,tau``.
    """
    kind, _, rest = spec.partition(":")
    parts = [s.strip() for s in rest.split(",")] if rest else []
    try:
        if kind == "spaceform" and len(parts) == 1:
            return SpaceForm(float(parts[0]))
        if kind == "quasi" and len(parts) in (2, 3):
            t = float(parts[2]) if len(parts) == 3 else 0.0
            vec = (math.sqrt(t),) + (0.0,) * (n - 1) if t > 0 else ()
            return QuasiConstant(float(parts[0]), float(parts[1]), vec, 1.0 - t)
        if kind == "grw" and len(parts) in (4, 5):
            g = GRW(*(float(x) for x in parts[:4]))
            return g.with_tangency(parts[4], n) if len(parts) == 5 else g
        if kind == "explicit" and len(parts) == 2:
            return Explicit(float(parts[0]), float(parts[1]))
    except (WintgenError, ValueError) as exc:
        raise ScenarioError(f"ambient {spec!r}: {exc}") from None
    raise ScenarioError(
        f"cannot parse ambient {spec!r}; expected spaceform:c | quasi:p,q[,t] | "
        "grw:c,f,fp,fpp[,tangent|normal] | explicit:ric,tau"
    )


# -- submanifold --------------------------------------------------------------


def explicit_h(entries: dict, n: int, codim: int, where: str = "submanifold.h") -> SecondFundamentalForm:
    """Assemble h from nested ``{r: {i: {j: value}}}`` (1-based), completing symmetry."""
    H = np.zeros((codim, n, n))
    seen: dict[tuple[int, int, int], float] = {}

    def index(key, bound, label):
        try:
            k = int(key)
        except (TypeError, ValueError):
            raise ScenarioError(f"{where}: {label} index {key!r} is not an integer") from None
        if not 1 <= k <= bound:
            raise ScenarioError(f"{where}: {label} index {k} outside 1..{bound}")
        return k - 1

    if not isinstance(entries, dict):
        raise ScenarioError(f"{where}: expected h.r.i.j = value entries")
    for rk, row in entries.items():
        r = index(rk, codim, "normal")
        for ik, col in (row.items() if isinstance(row, dict) else ()):
            i = index(ik, n, "tangent")
            for jk, val in (col.items() if isinstance(col, dict) else ()):
                j = index(jk, n, "tangent")
                if isinstance(val, bool) or not isinstance(val, (int, float)):
                    raise ScenarioError(f"{where}.{rk}.{ik}.{jk}: expected a number, got {val!r}")
                key = (r, min(i, j), max(i, j))
                if key in seen and seen[key] != float(val):
                    raise ScenarioError(
                        f"{where}.{rk}.{ik}.{jk}: conflicts with symmetric entry ({seen[key]!r} vs {val!r})"
                    )
                seen[key] = float(val)
                H[r, i, j] = H[r, j, i] = float(val)
    return SecondFundamentalForm(H)


def _int(section: dict, key: str, where: str, default=None) -> int:
    if key not in section:
        if default is not None:
            return default
        raise ScenarioError(f"{where}: missing field {key!r}")
    val = section[key]
    if isinstance(val, bool) or not isinstance(val, int):
        raise ScenarioError(f"{where}.{key}: expected an integer, got {val!r}")
    return val


def _immersion_for(sub: dict, base: Path) -> Immersion:
    where = "submanifold"
    if "catalog" in sub:
        try:
            imm = from_catalog(str(sub["catalog"]))
        except (KeyError, TypeError) as exc:
            raise ScenarioError(f"{where}.catalog: {exc}") from None
    elif "file" in sub:
        path = base / str(sub["file"])
        if not path.exists():
            raise ScenarioError(f"{where}.file: {path} does not exist")
        imm = load_polynomial_immersion(path)
    else:
        raise ScenarioError(f"{where}: immersion source needs 'catalog' or 'file'")
    if "m" in sub:
        imm = imm.padded(_int(sub, "m", where))
    return imm


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"{path}: {exc.strerror}") from None
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"{path}: {exc}") from None
    for sec in ("ambient", "submanifold"):
        if not isinstance(data.get(sec), dict):
            raise ScenarioError(f"{path}: missing [{sec}] section")
    sub, run = data["submanifold"], data.get("run", {})
    source = sub.get("source", "explicit")
    inputs = {"file": path.name, "ambient": data["ambient"], "submanifold": {k: v for k, v in sub.items() if k != "h"}}

    labels: list[str]
    if source == "immersion":
        imm = _immersion_for(sub, path.parent)
        n, m = imm.n, imm.m
        k = _int(sub, "grid", "submanifold", 3)
        step = _num(sub, "step", "submanifold", 1e-4)
        points = imm.grid(k)
        forms = [frame_at(imm, u, step).h for u in points]
        labels = ["u=(" + ", ".join(f"{x:.6g}" for x in u) + ")" for u in points]
        tol_default = IMMERSION_TOL
    else:
        n, m = _int(sub, "n", "submanifold"), _int(sub, "m", "submanifold")
        if n < 2 or m <= n:
            raise ScenarioError(f"submanifold: need 2 <= n < m, got n={n}, m={m}")
        codim = m - n
        tol_default = EXACT_TOL
        if source == "explicit":
            forms = [explicit_h(sub.get("h", {}), n, codim)]
            labels = ["explicit"]
        elif source == "canonical":
            alpha = sub.get("alpha", [0.0, 0.0, 0.0])
            if not isinstance(alpha, list) or len(alpha) != 3:
                raise ScenarioError("submanifold.alpha: expected [alpha1, alpha2, alpha3]")
            beta = _num(sub, "beta", "submanifold", 0.0)
            try:
                A = canonical_operators(n, codim, *map(float, alpha), beta)
            except WintgenError as exc:
                raise ScenarioError(f"submanifold: {exc}") from None
            if sub.get("rotate", False):
                rng = np.random.default_rng(_int(sub, "seed", "submanifold", default_seed()))
                Q = _random_orthogonal(rng, n, 1)[0]
                N = _random_orthogonal(rng, codim, 1)[0]
                A = np.einsum("sr,ia,sij,jb->rab", N, Q, A, Q)
            forms = [SecondFundamentalForm(A)]
            labels = ["canonical"]
        elif source == "random":
            seed = _int(sub, "seed", "submanifold", default_seed())
            count = _int(sub, "count", "submanifold", 1)
            rng = np.random.default_rng(seed)
            X = rng.uniform(-1, 1, size=(count, codim, n, n))
            forms = [SecondFundamentalForm(0.5 * (x + x.transpose(0, 2, 1))) for x in X]
            labels = [f"random[{i}]" for i in range(count)]
            inputs["submanifold"]["seed"] = seed
        else:
            raise ScenarioError(f"submanifold.source: expected explicit|canonical|random|immersion, got {source!r}")

    ambient = ambient_from_section(data["ambient"], n)
    ids = run.get("inequalities")
    if ids is not None:
        try:
            ids = [InequalityId(i) for i in ids]
        except ValueError as exc:
            raise ScenarioError(f"run.inequalities: {exc}") from None
    tol = _num(run, "tol", "run", tol_default)
    return Scenario(
        name=str(data.get("name", path.stem)),
        ambient=ambient,
        n=n,
        m=m,
        source=source,
        forms=forms,
        labels=labels,
        inequalities=ids,
        tol=tol,
        violation_tol=_num(run, "violation_tol", "run", 1e-9 if source != "immersion" else IMMERSION_TOL),
        certificate=bool(run.get("certificate", False)),
        inputs=inputs,
    )
