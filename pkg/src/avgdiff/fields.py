"""Time-indexed vector fields f(n, x) on N x B(K).

All norms are the sup norm on coordinates.  Fields come either from a small
closed-form term language (``field_from_spec``) or from a caller-supplied
callback wrapped in :class:`TimeField`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainViolation, SpecError

TIME_KINDS = ("const", "alt", "cos", "sin")
MAX_DEGREE = 3


def sup_norm(x) -> float:
    return float(np.max(np.abs(x))) if np.size(x) else 0.0


@dataclass(frozen=True)
class Domain:
    dim: int
    radius: float

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise SpecError(f"dim must be a positive integer, got {self.dim!r}")
        if not self.radius > 0:
            raise SpecError(f"radius must be positive, got {self.radius!r}")

    def contains(self, x) -> bool:
        return sup_norm(x) <= self.radius

    def check(self, x):
        x = as_state(x, self.dim)
        norm = sup_norm(x)
        if not norm <= self.radius:
            raise DomainViolation(norm, self.radius)
        return x

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.uniform(-self.radius, self.radius, size=(count, self.dim))


def as_state(x, dim: Optional[int] = None) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"state must be a vector, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"state has dimension {arr.shape[0]}, expected {dim}")
    return arr


@dataclass
class TimeField:
    """A map (n, x) -> R^m with optional bound/Lipschitz/period metadata.

    ``func`` receives a nonnegative int and a float vector and must return
    something convertible to a float vector of length ``domain.dim``.
    ``batch``, when given, evaluates many time indices at one state and must
    agree bit-for-bit with ``func``.
    """

    domain: Domain
    func: Callable[[int, np.ndarray], object]
    bound: Optional[float] = None
    lipschitz: Optional[float] = None
    period: Optional[int] = None
    continuity_modulus: Optional[Callable[[float], float]] = None
    batch: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = field(default=None, repr=False)
    spec: Optional[dict] = field(default=None, repr=False)

    def __post_init__(self):
        if self.period is not None and (int(self.period) != self.period or self.period < 1):
            raise SpecError(f"period must be a positive integer, got {self.period!r}")

    @property
    def dim(self) -> int:
        return self.domain.dim

    def __call__(self, n: int, x) -> np.ndarray:
        return eval_field(self, n, x)

    def raw(self, n: int, x: np.ndarray) -> np.ndarray:
        """Evaluate without the domain check."""
        return np.asarray(self.func(n, x), dtype=float).reshape(self.domain.dim)

    def values(self, ns, x) -> np.ndarray:
        """Rows f(n, x) for each n in ``ns``; shape (len(ns), m)."""
        x = self.domain.check(x)
        ns = np.asarray(ns, dtype=np.int64)
        if self.batch is not None:
            return np.asarray(self.batch(ns, x), dtype=float).reshape(len(ns), self.domain.dim)
        out = np.empty((len(ns), self.domain.dim))
        for i, n in enumerate(ns.tolist()):
            out[i] = self.raw(n, x)
        return out

    @property
    def autonomous(self) -> bool:
        return self.period == 1


@dataclass
class AveragedField:
    domain: Domain
    func: Callable[[np.ndarray], object]
    bound: Optional[float] = None
    lipschitz: Optional[float] = None

    def __call__(self, x) -> np.ndarray:
        x = self.domain.check(x)
        return np.asarray(self.func(x), dtype=float).reshape(self.domain.dim)

    def as_time_field(self) -> TimeField:
        """View the average as an autonomous TimeField (period 1)."""
        return TimeField(
            domain=self.domain,
            func=lambda n, x: self.func(x),
            bound=self.bound,
            lipschitz=self.lipschitz,
            period=1,
        )


def eval_field(f: TimeField, n: int, x) -> np.ndarray:
    if n < 0:
        raise ValueError(f"time index must be nonnegative, got {n}")
    x = f.domain.check(x)
    return f.raw(int(n), x)


# -- closed-form term language ------------------------------------------------


def _parse_time(spec) -> tuple[str, int]:
    if not isinstance(spec, str):
        raise SpecError(f"time factor must be a string, got {spec!r}")
    kind, _, arg = spec.partition(":")
    if kind not in TIME_KINDS:
        raise SpecError(f"unknown time factor {spec!r}; expected const, alt, cos:P or sin:P")
    if kind in ("const", "alt"):
        if arg:
            raise SpecError(f"time factor {kind!r} takes no period")
        return kind, 1 if kind == "const" else 2
    try:
        period = int(arg)
    except ValueError:
        raise SpecError(f"time factor {spec!r} needs an integer period") from None
    if period <= 0:
        raise SpecError(f"period must be positive in {spec!r}")
    return kind, period


def normalize_field_spec(spec: dict) -> dict:
    """Validate a field description and return its canonical form.

    Canonical form: ``{"dim": int, "radius": float, "components": [[term, ...], ...]}``
    with each term ``{"coeff": float, "powers": [int, ...], "time": str}``.
    """
    if not isinstance(spec, dict):
        raise SpecError("field spec must be a mapping")
    unknown = set(spec) - {"dim", "radius", "components"}
    if unknown:
        raise SpecError(f"unknown field spec keys: {sorted(unknown)}")
    for key in ("dim", "radius", "components"):
        if key not in spec:
            raise SpecError(f"field spec is missing {key!r}")
    dim = spec["dim"]
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise SpecError(f"dim must be a positive integer, got {dim!r}")
    radius = spec["radius"]
    if isinstance(radius, bool) or not isinstance(radius, (int, float)) or not radius > 0:
        raise SpecError(f"radius must be a positive number, got {radius!r}")
    comps = spec["components"]
    if not isinstance(comps, list) or len(comps) != dim:
        raise SpecError(f"components must be a list of {dim} term lists")
    out = []
    for i, terms in enumerate(comps):
        if not isinstance(terms, list):
            raise SpecError(f"component {i} must be a list of terms")
        norm_terms = []
        for term in terms:
            if not isinstance(term, dict):
                raise SpecError(f"component {i}: term must be a mapping, got {term!r}")
            bad = set(term) - {"coeff", "powers", "time"}
            if bad:
                raise SpecError(f"component {i}: unknown term keys {sorted(bad)}")
            coeff = term.get("coeff")
            if isinstance(coeff, bool) or not isinstance(coeff, (int, float)) or not math.isfinite(coeff):
                raise SpecError(f"component {i}: coeff must be a finite number, got {coeff!r}")
            powers = term.get("powers", [0] * dim)
            if (
                not isinstance(powers, list)
                or len(powers) != dim
                or any(isinstance(p, bool) or not isinstance(p, int) or p < 0 for p in powers)
            ):
                raise SpecError(f"component {i}: powers must be {dim} nonnegative integers, got {powers!r}")
            if sum(powers) > MAX_DEGREE:
                raise SpecError(f"component {i}: total degree {sum(powers)} exceeds {MAX_DEGREE}")
            time = term.get("time", "const")
            _parse_time(time)
            norm_terms.append({"coeff": float(coeff), "powers": list(powers), "time": time})
        out.append(norm_terms)
    return {"dim": dim, "radius": float(radius), "components": out}


@dataclass(frozen=True)
class _Term:
    comp: int
    coeff: float
    powers: tuple
    table: tuple  # time factor over one period, indexed by n mod len(table)

    @property
    def degree(self) -> int:
        return sum(self.powers)

    def monomial(self, xs) -> float:
        m = 1.0
        for xj, p in zip(xs, self.powers):
            if p:
                m *= xj**p
        return m


def _time_table(kind: str, period: int) -> tuple:
    if kind == "const":
        return (1.0,)
    if kind == "alt":
        return (1.0, -1.0)
    trig = math.cos if kind == "cos" else math.sin
    return tuple(trig(2.0 * math.pi * r / period) for r in range(period))


def field_from_spec(spec: dict) -> TimeField:
    spec = normalize_field_spec(spec)
    dim, radius = spec["dim"], spec["radius"]
    terms = []
    period = 1
    for i, comp in enumerate(spec["components"]):
        for t in comp:
            kind, p = _parse_time(t["time"])
            period = math.lcm(period, p)
            terms.append(_Term(i, t["coeff"], tuple(t["powers"]), _time_table(kind, p)))

    def func(n, x):
        xs = x.tolist()
        out = [0.0] * dim
        for t in terms:
            out[t.comp] += t.coeff * t.table[n % len(t.table)] * t.monomial(xs)
        return out

    def batch(ns, x):
        xs = x.tolist()
        out = np.zeros((len(ns), dim))
        for t in terms:
            tf = np.asarray(t.table)[ns % len(t.table)]
            out[:, t.comp] += t.coeff * tf * t.monomial(xs)
        return out

    bound = 0.0
    lip = 0.0
    for i in range(dim):
        comp_terms = [t for t in terms if t.comp == i]
        bound = max(bound, sum(abs(t.coeff) * radius**t.degree for t in comp_terms))
        lip = max(lip, sum(abs(t.coeff) * t.degree * radius ** (t.degree - 1) for t in comp_terms if t.degree))

    return TimeField(Domain(dim, radius), func, bound=bound, lipschitz=lip, period=period, batch=batch, spec=spec)


def zero_field(dim: int = 1, radius: float = 1.0) -> TimeField:
    return field_from_spec({"dim": dim, "radius": radius, "components": [[] for _ in range(dim)]})


# -- combinators --------------------------------------------------------------


def _combine_period(a: Optional[int], b: Optional[int]) -> Optional[int]:
    if a is None or b is None:
        return None
    return math.lcm(a, b)


def residual_field(f: TimeField, avg: AveragedField) -> TimeField:
    """R(n, x) = X(n, x) - Xbar(x)."""
    if f.domain != avg.domain:
        raise SpecError(f"domain mismatch: {f.domain} vs {avg.domain}")
    bound = f.bound + avg.bound if f.bound is not None and avg.bound is not None else None
    lip = f.lipschitz + avg.lipschitz if f.lipschitz is not None and avg.lipschitz is not None else None

    def func(n, x):
        return f.raw(n, x) - np.asarray(avg.func(x), dtype=float)

    batch = None
    if f.batch is not None:
        def batch(ns, x):
            return f.batch(ns, x) - np.asarray(avg.func(x), dtype=float)

    return TimeField(f.domain, func, bound=bound, lipschitz=lip, period=f.period, batch=batch)


def add_fields(a: TimeField, b: TimeField) -> TimeField:
    """Pointwise sum a + b (e.g. X + R in the perturbed equation)."""
    if a.domain != b.domain:
        raise SpecError(f"domain mismatch: {a.domain} vs {b.domain}")
    bound = a.bound + b.bound if a.bound is not None and b.bound is not None else None
    lip = a.lipschitz + b.lipschitz if a.lipschitz is not None and b.lipschitz is not None else None
    batch = None
    if a.batch is not None and b.batch is not None:
        def batch(ns, x):
            return a.batch(ns, x) + b.batch(ns, x)
    return TimeField(
        a.domain,
        lambda n, x: np.add(a.func(n, x), b.func(n, x), dtype=float),
        bound=bound,
        lipschitz=lip,
        period=_combine_period(a.period, b.period),
        batch=batch,
    )


def scale_field(f: TimeField, s: float) -> TimeField:
    s = float(s)
    batch = None
    if f.batch is not None:
        def batch(ns, x):
            return s * f.batch(ns, x)
    return TimeField(
        f.domain,
        lambda n, x: s * f.raw(n, x),
        bound=abs(s) * f.bound if f.bound is not None else None,
        lipschitz=abs(s) * f.lipschitz if f.lipschitz is not None else None,
        period=f.period,
        batch=batch,
    )
