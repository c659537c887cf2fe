"""Model problems: 1D semilinear elliptic and parabolic equations.

Everything in this package works with the divergence-form operator

    -(a(x) u')' + b(x) u' + c(x) u = F(x, u) + source(x[, t])

on an interval (0, L), with Dirichlet data g on the outer boundary.  In
parabolic mode a d/dt term is added on the left and u(x, 0) = g(x) is the
initial state.  Coefficients and data functions come from small closed
sets of evaluable forms, so problem instances stay declarative, cheap to
validate by sampling, and serializable into experiment configs.

Well-posedness conditions enforced by :func:`validate`:

* ellipticity: a(x) >= lambda > 0 on the closed domain,
* a uniform Lipschitz bound C on F in the u argument,
* elliptic mode only: c(x) > C on the closed domain (for C = 0 the
  requirement degenerates to c(x) >= 0).

Parabolic mode needs no sign condition on c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

__all__ = [
    "CoefficientFn",
    "Nonlinearity",
    "DataFn",
    "ProblemSpec",
    "UnknownProblemError",
    "catalog_lookup",
    "catalog_ids",
    "validate",
]


class UnknownProblemError(LookupError):
    """Raised by catalog_lookup for ids that are not in the catalog."""


@dataclass(frozen=True)
class CoefficientFn:
    """A PDE coefficient from a closed set of smooth evaluable forms.

    kinds:
        ``constant``    -- value
        ``polynomial``  -- sum(coeffs[i] * x**i)
        ``scaled-exp``  -- value * exp(rate * x)

    ``lower_bound`` optionally declares a strict positive lower bound
    (the ellipticity constant for the diffusion coefficient); it is
    checked against dense samples by :func:`validate`.
    """

    kind: str
    value: float = 0.0
    coeffs: tuple[float, ...] = ()
    rate: float = 0.0
    lower_bound: float | None = None

    _KINDS = ("constant", "polynomial", "scaled-exp")

    def __post_init__(self) -> None:
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown coefficient kind {self.kind!r}")

    @classmethod
    def constant(cls, value: float, lower_bound: float | None = None) -> "CoefficientFn":
        return cls(kind="constant", value=float(value), lower_bound=lower_bound)

    @classmethod
    def polynomial(cls, coeffs, lower_bound: float | None = None) -> "CoefficientFn":
        return cls(kind="polynomial", coeffs=tuple(float(c) for c in coeffs),
                   lower_bound=lower_bound)

    @classmethod
    def scaled_exp(cls, value: float, rate: float,
                   lower_bound: float | None = None) -> "CoefficientFn":
        return cls(kind="scaled-exp", value=float(value), rate=float(rate),
                   lower_bound=lower_bound)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "constant":
            return np.full_like(x, self.value) if x.ndim else float(self.value)
        if self.kind == "polynomial":
            return np.polynomial.polynomial.polyval(x, np.array(self.coeffs or (0.0,)))
        return self.value * np.exp(self.rate * x)

    def to_dict(self) -> dict:
        if self.kind == "constant":
            body: dict = {"value": self.value}
        elif self.kind == "polynomial":
            body = {"coeffs": list(self.coeffs)}
        else:
            body = {"value": self.value, "rate": self.rate}
        if self.lower_bound is not None:
            body["lower_bound"] = self.lower_bound
        return {self.kind: body}

    @classmethod
    def from_dict(cls, d) -> "CoefficientFn":
        if isinstance(d, (int, float)):
            return cls.constant(float(d))
        if not isinstance(d, dict) or len(d) != 1:
            raise ValueError(f"bad coefficient spec: {d!r}")
        kind, body = next(iter(d.items()))
        if isinstance(body, (int, float)):
            body = {"value": body} if kind != "polynomial" else {"coeffs": body}
        lb = body.get("lower_bound")
        if kind == "constant":
            return cls.constant(body["value"], lb)
        if kind == "polynomial":
            return cls.polynomial(body["coeffs"], lb)
        if kind == "scaled-exp":
            return cls.scaled_exp(body["value"], body.get("rate", 0.0), lb)
        raise ValueError(f"unknown coefficient kind {kind!r}")


@dataclass(frozen=True)
class Nonlinearity:
    """Zeroth-order term F(x, u), uniformly Lipschitz in u.

    kinds:
        ``zero``         -- F = 0, Lipschitz bound 0
        ``linear-in-u``  -- F = param * u
        ``sine``         -- F = param * sin(u)
        ``custom``       -- arbitrary callable fn(x, u) with a declared bound

    For the built-in kinds the Lipschitz bound is |param| and is filled in
    automatically; custom nonlinearities must declare theirs.
    """

    kind: str
    param: float = 0.0
    lipschitz: float = 0.0
    fn: Callable | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.kind not in ("zero", "linear-in-u", "sine", "custom"):
            raise ValueError(f"unknown nonlinearity kind {self.kind!r}")
        if self.kind == "custom" and self.fn is None:
            raise ValueError("custom nonlinearity needs a callable")
        if self.lipschitz < 0:
            raise ValueError("Lipschitz bound must be nonnegative")

    @classmethod
    def zero(cls) -> "Nonlinearity":
        return cls(kind="zero")

    @classmethod
    def linear(cls, slope: float) -> "Nonlinearity":
        return cls(kind="linear-in-u", param=float(slope), lipschitz=abs(float(slope)))

    @classmethod
    def sine(cls, amplitude: float) -> "Nonlinearity":
        return cls(kind="sine", param=float(amplitude), lipschitz=abs(float(amplitude)))

    @classmethod
    def custom(cls, fn: Callable, lipschitz: float) -> "Nonlinearity":
        return cls(kind="custom", fn=fn, lipschitz=float(lipschitz))

    def __call__(self, x, u):
        if self.kind == "zero":
            return np.zeros_like(np.asarray(u, dtype=float))
        if self.kind == "linear-in-u":
            return self.param * np.asarray(u, dtype=float)
        if self.kind == "sine":
            return self.param * np.sin(u)
        return self.fn(x, u)

    def to_dict(self) -> dict:
        if self.kind == "custom":
            raise ValueError("custom nonlinearity is not serializable")
        if self.kind == "zero":
            return {"zero": {}}
        return {self.kind: {"param": self.param}}

    @classmethod
    def from_dict(cls, d) -> "Nonlinearity":
        if not isinstance(d, dict) or len(d) != 1:
            raise ValueError(f"bad nonlinearity spec: {d!r}")
        kind, body = next(iter(d.items()))
        if kind == "zero":
            return cls.zero()
        param = body["param"] if isinstance(body, dict) else body
        if kind == "linear-in-u":
            return cls.linear(param)
        if kind == "sine":
            return cls.sine(param)
        raise ValueError(f"unknown nonlinearity kind {kind!r}")


@dataclass(frozen=True)
class DataFn:
    """Closed-form boundary/initial/source data with an analytic slope.

    kinds:
        ``zero``        -- 0
        ``constant``    -- amplitude
        ``sine``        -- amplitude * sin(mode * pi * x / L)
        ``polynomial``  -- sum(coeffs[i] * x**i)

    The analytic derivative is needed wherever a Robin transmission
    operator is applied to closed-form data (initial guesses).
    """

    kind: str
    amplitude: float = 0.0
    mode: int = 1
    coeffs: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("zero", "constant", "sine", "polynomial"):
            raise ValueError(f"unknown data kind {self.kind!r}")

    @classmethod
    def zero(cls) -> "DataFn":
        return cls(kind="zero")

    @classmethod
    def constant(cls, value: float) -> "DataFn":
        return cls(kind="constant", amplitude=float(value))

    @classmethod
    def sine(cls, amplitude: float = 1.0, mode: int = 1) -> "DataFn":
        return cls(kind="sine", amplitude=float(amplitude), mode=int(mode))

    @classmethod
    def polynomial(cls, coeffs) -> "DataFn":
        return cls(kind="polynomial", coeffs=tuple(float(c) for c in coeffs))

    def value(self, x, length: float):
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(x) if x.ndim else 0.0
        if self.kind == "constant":
            return np.full_like(x, self.amplitude) if x.ndim else self.amplitude
        if self.kind == "sine":
            return self.amplitude * np.sin(self.mode * math.pi * x / length)
        return np.polynomial.polynomial.polyval(x, np.array(self.coeffs or (0.0,)))

    def slope(self, x, length: float):
        x = np.asarray(x, dtype=float)
        if self.kind in ("zero", "constant"):
            return np.zeros_like(x) if x.ndim else 0.0
        if self.kind == "sine":
            w = self.mode * math.pi / length
            return self.amplitude * w * np.cos(w * x)
        dcoeffs = [i * c for i, c in enumerate(self.coeffs)][1:] or [0.0]
        return np.polynomial.polynomial.polyval(x, np.array(dcoeffs))

    def to_dict(self) -> dict:
        if self.kind == "zero":
            return {"zero": {}}
        if self.kind == "constant":
            return {"constant": {"value": self.amplitude}}
        if self.kind == "sine":
            return {"sine": {"amplitude": self.amplitude, "mode": self.mode}}
        return {"polynomial": {"coeffs": list(self.coeffs)}}

    @classmethod
    def from_dict(cls, d) -> "DataFn":
        if isinstance(d, str):
            return _named_data(d)
        if isinstance(d, (int, float)):
            return cls.constant(float(d))
        if not isinstance(d, dict) or len(d) != 1:
            raise ValueError(f"bad data spec: {d!r}")
        kind, body = next(iter(d.items()))
        if kind == "zero":
            return cls.zero()
        if kind == "constant":
            return cls.constant(body["value"] if isinstance(body, dict) else body)
        if kind == "sine":
            body = body if isinstance(body, dict) else {"amplitude": body}
            return cls.sine(body.get("amplitude", 1.0), body.get("mode", 1))
        if kind == "polynomial":
            return cls.polynomial(body["coeffs"] if isinstance(body, dict) else body)
        raise ValueError(f"unknown data kind {kind!r}")


def _named_data(name: str) -> DataFn:
    table = {"zero": DataFn.zero(), "one": DataFn.constant(1.0), "sine": DataFn.sine()}
    if name not in table:
        raise ValueError(f"unknown data shorthand {name!r} (known: {sorted(table)})")
    return table[name]


@dataclass(frozen=True)
class ProblemSpec:
    """A fully specified model problem instance.

    ``source`` may be a DataFn (serializable) or, for manufactured-solution
    studies, any callable ``f(x)`` or ``f(x, t)``.
    """

    mode: str  # "elliptic" | "parabolic"
    a: CoefficientFn
    b: CoefficientFn
    c: CoefficientFn
    F: Nonlinearity
    g: DataFn
    length: float
    time_horizon: float | None = None
    source: DataFn | Callable | None = None
    tags: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.mode not in ("elliptic", "parabolic"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not self.length > 0:
            raise ValueError("domain length must be positive")
        if self.time_horizon is not None and not self.time_horizon > 0:
            raise ValueError("time horizon must be positive")

    def source_values(self, x, t: float = 0.0):
        """Evaluate the source term at nodes x (and time t for parabolic)."""
        x = np.asarray(x, dtype=float)
        if self.source is None:
            return np.zeros_like(x)
        if isinstance(self.source, DataFn):
            return np.asarray(self.source.value(x, self.length), dtype=float)
        try:
            return np.asarray(self.source(x, t), dtype=float) + np.zeros_like(x)
        except TypeError:
            return np.asarray(self.source(x), dtype=float) + np.zeros_like(x)

    def boundary_values(self) -> tuple[float, float]:
        """Dirichlet data (g(0), g(L)) on the outer boundary."""
        return (float(self.g.value(0.0, self.length)),
                float(self.g.value(self.length, self.length)))

    def to_dict(self) -> dict:
        if self.source is not None and not isinstance(self.source, DataFn):
            raise ValueError("callable source terms are not serializable")
        d = {
            "mode": self.mode,
            "L": self.length,
            "a": self.a.to_dict(),
            "b": self.b.to_dict(),
            "c": self.c.to_dict(),
            "F": self.F.to_dict(),
            "g": self.g.to_dict(),
        }
        if self.time_horizon is not None:
            d["T"] = self.time_horizon
        if self.source is not None:
            d["source"] = self.source.to_dict()
        if self.tags:
            d["tags"] = list(self.tags)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ProblemSpec":
        return cls(
            mode=d["mode"],
            a=CoefficientFn.from_dict(d["a"]),
            b=CoefficientFn.from_dict(d["b"]),
            c=CoefficientFn.from_dict(d["c"]),
            F=Nonlinearity.from_dict(d.get("F", {"zero": {}})),
            g=DataFn.from_dict(d.get("g", {"zero": {}})),
            length=float(d["L"]),
            time_horizon=float(d["T"]) if d.get("T") is not None else None,
            source=DataFn.from_dict(d["source"]) if d.get("source") is not None else None,
            tags=tuple(d.get("tags", ())),
        )


# --------------------------------------------------------------------------
# catalog
# --------------------------------------------------------------------------

def _example31() -> ProblemSpec:
    # Constant-coefficient operator u'' - 3u' - 4u = f on (0, 2), stored in
    # divergence form as -(u')' + 3u' + 4u = -f.  Its homogeneous solutions
    # exp(4x), exp(-x) make this the model with closed-form interface maps
    # (see the oracle module); the transmission-side divergence it exhibits
    # is the point of the entry, hence the counterexample-family tag.
    return ProblemSpec(
        mode="elliptic",
        a=CoefficientFn.constant(1.0, lower_bound=1.0),
        b=CoefficientFn.constant(3.0),
        c=CoefficientFn.constant(4.0),
        F=Nonlinearity.zero(),
        g=DataFn.zero(),
        length=2.0,
        source=DataFn.sine(-1.0, 1),  # -f with f(x) = sin(pi x / L)
        tags=("counterexample-family",),
    )


def _laplace1d() -> ProblemSpec:
    return ProblemSpec(
        mode="elliptic",
        a=CoefficientFn.constant(1.0, lower_bound=1.0),
        b=CoefficientFn.constant(0.0),
        c=CoefficientFn.constant(0.0),
        F=Nonlinearity.zero(),
        g=DataFn.zero(),
        length=1.0,
    )


def _heat_semilinear() -> ProblemSpec:
    # u_t - u'' = sin(u), zero boundary, initial profile sin(pi x).
    # |sin z - sin z'| <= |z - z'| gives the Lipschitz bound 1.
    return ProblemSpec(
        mode="parabolic",
        a=CoefficientFn.constant(1.0, lower_bound=1.0),
        b=CoefficientFn.constant(0.0),
        c=CoefficientFn.constant(0.0),
        F=Nonlinearity.sine(1.0),
        g=DataFn.sine(1.0, 1),
        length=1.0,
        time_horizon=2.0,
    )


def _elliptic_semilinear() -> ProblemSpec:
    # -(u')' + u' + 4u = 2 sin(u) + sin(pi x); c = 4 > 2 = Lipschitz bound,
    # so the fixed-point linearization contracts.
    return ProblemSpec(
        mode="elliptic",
        a=CoefficientFn.constant(1.0, lower_bound=1.0),
        b=CoefficientFn.constant(1.0),
        c=CoefficientFn.constant(4.0),
        F=Nonlinearity.sine(2.0),
        g=DataFn.zero(),
        length=1.0,
        source=DataFn.sine(1.0, 1),
    )


_CATALOG: dict[str, Callable[[], ProblemSpec]] = {
    "example31": _example31,
    "laplace1d": _laplace1d,
    "heat-semilinear": _heat_semilinear,
    "elliptic-semilinear": _elliptic_semilinear,
}


def catalog_ids() -> list[str]:
    return sorted(_CATALOG)


def catalog_lookup(problem_id: str) -> ProblemSpec:
    """Return a fresh ProblemSpec for a known catalog id."""
    try:
        builder = _CATALOG[problem_id]
    except KeyError:
        raise UnknownProblemError(
            f"unknown problem id {problem_id!r} (known: {catalog_ids()})"
        ) from None
    return builder()


# --------------------------------------------------------------------------
# assumption checks
# --------------------------------------------------------------------------

def validate(spec: ProblemSpec, n_samples: int = 2048,
             rng: np.random.Generator | None = None) -> list[str]:
    """Check the well-posedness assumptions by dense sampling.

    Returns a list of human-readable violations; empty means all checks
    passed on a grid of ``n_samples`` points (>= 1000) plus a randomized
    Lipschitz spot check of the nonlinearity.
    """
    n_samples = max(int(n_samples), 1000)
    rng = rng if rng is not None else np.random.default_rng(0)
    violations: list[str] = []
    x = np.linspace(0.0, spec.length, n_samples)
    xh = 0.5 * (x[:-1] + x[1:])

    for name, fn in (("a", spec.a), ("b", spec.b), ("c", spec.c)):
        vals = np.concatenate([np.atleast_1d(fn(x)), np.atleast_1d(fn(xh))])
        if not np.all(np.isfinite(vals)):
            violations.append(f"finite: coefficient {name}(x) is not finite on [0, L]")

    a_min = float(np.min(np.concatenate([np.atleast_1d(spec.a(x)),
                                         np.atleast_1d(spec.a(xh))])))
    if a_min <= 0.0:
        violations.append(f"ellipticity: min a(x) = {a_min:g} <= 0 (need a >= lambda > 0)")
    elif spec.a.lower_bound is not None and a_min < spec.a.lower_bound - 1e-12:
        violations.append(
            f"ellipticity: min a(x) = {a_min:g} below declared lambda = {spec.a.lower_bound:g}"
        )

    lip = spec.F.lipschitz
    if spec.mode == "elliptic":
        c_min = float(np.min(np.atleast_1d(spec.c(x))))
        if lip > 0.0 and c_min <= lip:
            violations.append(
                f"(A3′) c ≤ Lipschitz C: min c(x) = {c_min:g} <= C = {lip:g} "
                "(elliptic mode needs c > C)"
            )
        elif lip == 0.0 and c_min < 0.0:
            violations.append(
                f"(A3′) c ≤ Lipschitz C: min c(x) = {c_min:g} < 0 with C = 0"
            )
    else:
        if spec.time_horizon is None:
            violations.append("time_horizon: parabolic mode needs a finite horizon T")

    # randomized spot check of the declared Lipschitz bound
    xs = rng.uniform(0.0, spec.length, size=256)
    zs = rng.uniform(-10.0, 10.0, size=256)
    zps = rng.uniform(-10.0, 10.0, size=256)
    lhs = np.abs(np.atleast_1d(spec.F(xs, zs)) - np.atleast_1d(spec.F(xs, zps)))
    rhs = lip * np.abs(zs - zps) + 1e-12
    if np.any(lhs > rhs):
        worst = float(np.max(lhs - rhs))
        violations.append(f"Lipschitz: |F(x,z)-F(x,z')| exceeds C|z-z'| by {worst:g}")

    gv = np.atleast_1d(spec.g.value(x, spec.length))
    sv = np.atleast_1d(spec.source_values(x, 0.0))
    if not (np.all(np.isfinite(gv)) and np.all(np.isfinite(sv))):
        violations.append("finite: boundary data or source is not finite on [0, L]")

    return violations


def with_g(spec: ProblemSpec, g: DataFn) -> ProblemSpec:
    """Copy of spec with different boundary/initial data."""
    return replace(spec, g=g)
