"""Truncated-Taylor (jet) scalar arithmetic up to order 4.

A ``Jet`` stores the Taylor coefficients of a scalar quantity with respect
to a small set of active coordinates (at most four at a time), truncated at
total degree <= 4.  Sums, products, quotients and the elementary functions
act coefficient-wise by exact truncated-Taylor algebra, so evaluating a
smooth field on jet-valued coordinates yields its exact partial derivatives
at the evaluation point, to the order the jet carries.  Order 4 is the hard
ceiling: that is what fourth metric derivatives (the deepest quantity used
anywhere downstream) require, and nothing above it is supported.

Jets are immutable values; every operation returns a fresh jet, so they are
safe to evaluate in parallel across points.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Callable, Sequence

import numpy as np

from .errors import EvaluationDomainError

MAX_ORDER = 4
MAX_ACTIVE = 4

# Values smaller than this in magnitude may not be inverted inside jet
# arithmetic; dividing by them raises instead of silently overflowing.
_DIVISION_FLOOR = 1e-300


class JetSpace:
    """Multi-index bookkeeping for jets over ``nvars`` coordinates.

    Exponent tuples of total degree <= ``order`` are enumerated once and the
    sparse multiplication table (pairs of slots whose exponent sum stays
    within the truncation) is cached, so jet products reduce to a single
    gather/scatter.
    """

    _cache: dict[tuple[int, int], "JetSpace"] = {}

    def __new__(cls, nvars: int, order: int):
        key = (nvars, order)
        hit = cls._cache.get(key)
        if hit is not None:
            return hit
        if not 0 <= order <= MAX_ORDER:
            raise ValueError(f"jet order must be in 0..{MAX_ORDER}, got {order}")
        if not 1 <= nvars <= MAX_ACTIVE:
            raise ValueError(f"active coordinate count must be in 1..{MAX_ACTIVE}, got {nvars}")
        self = super().__new__(cls)
        self.nvars = nvars
        self.order = order
        exps = []
        for total in range(order + 1):
            for c in combinations_with_replacement(range(nvars), total):
                e = [0] * nvars
                for v in c:
                    e[v] += 1
                exps.append(tuple(e))
        self.exponents = tuple(exps)
        self.ncoef = len(exps)
        self.index = {e: k for k, e in enumerate(exps)}
        ii, jj, kk = [], [], []
        for i, ei in enumerate(exps):
            for j, ej in enumerate(exps):
                s = tuple(a + b for a, b in zip(ei, ej))
                if sum(s) <= order:
                    ii.append(i)
                    jj.append(j)
                    kk.append(self.index[s])
        self._mul_i = np.array(ii, dtype=np.intp)
        self._mul_j = np.array(jj, dtype=np.intp)
        self._mul_k = np.array(kk, dtype=np.intp)
        cls._cache[key] = self
        return self

    def zero_coef(self) -> np.ndarray:
        return np.zeros(self.ncoef)

    def multiply(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.bincount(
            self._mul_k, weights=a[self._mul_i] * b[self._mul_j], minlength=self.ncoef
        )


@lru_cache(maxsize=None)
def _factorial_products(exponents: tuple) -> np.ndarray:
    return np.array([math.prod(math.factorial(d) for d in e) for e in exponents])


class Jet:
    """One scalar value plus its Taylor coefficients in a ``JetSpace``."""

    __slots__ = ("space", "coef")

    def __init__(self, space: JetSpace, coef: np.ndarray):
        self.space = space
        self.coef = coef

    # -- constructors ------------------------------------------------------

    @staticmethod
    def constant(space: JetSpace, value: float) -> "Jet":
        coef = space.zero_coef()
        coef[0] = value
        return Jet(space, coef)

    @staticmethod
    def variable(space: JetSpace, var: int, value: float) -> "Jet":
        coef = space.zero_coef()
        coef[0] = value
        if space.order >= 1:
            unit = tuple(1 if k == var else 0 for k in range(space.nvars))
            coef[space.index[unit]] = 1.0
        return Jet(space, coef)

    # -- accessors ---------------------------------------------------------

    @property
    def value(self) -> float:
        return float(self.coef[0])

    def partial(self, dirs: Sequence[int]) -> float:
        """Partial derivative along the coordinate directions ``dirs``.

        The directions are an unordered multiset (mixed partials commute by
        construction: permutations address the same storage slot).
        """
        e = [0] * self.space.nvars
        for d in dirs:
            e[d] += 1
        if sum(e) > self.space.order:
            raise ValueError("requested derivative exceeds jet order")
        k = self.space.index[tuple(e)]
        fact = math.prod(math.factorial(d) for d in e)
        return float(self.coef[k] * fact)

    def partial_table(self) -> dict[tuple, float]:
        """All stored partial derivatives keyed by exponent tuple."""
        facts = _factorial_products(self.space.exponents)
        return {e: float(c * f) for e, c, f in zip(self.space.exponents, self.coef, facts)}

    def derivative(self, var: int) -> "Jet":
        """Jet of the partial derivative with respect to ``var`` (order drops by one)."""
        sp = self.space
        lower = JetSpace(sp.nvars, sp.order - 1)
        coef = lower.zero_coef()
        for k, e in enumerate(lower.exponents):
            src = list(e)
            src[var] += 1
            coef[k] = self.coef[sp.index[tuple(src)]] * src[var]
        return Jet(lower, coef)

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other) -> "Jet | None":
        if isinstance(other, Jet):
            if other.space is not self.space:
                raise ValueError("jets from different spaces cannot be combined")
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Jet.constant(self.space, float(other))
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Jet(self.space, self.coef + o.coef)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Jet(self.space, self.coef - o.coef)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Jet(self.space, o.coef - self.coef)

    def __neg__(self):
        return Jet(self.space, -self.coef)

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Jet(self.space, self.coef * float(other))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Jet(self.space, self.space.multiply(self.coef, o.coef))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            if abs(other) < _DIVISION_FLOOR:
                raise EvaluationDomainError("division by a vanishing constant")
            return Jet(self.space, self.coef / float(other))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o._reciprocal()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self._reciprocal()

    def __pow__(self, p):
        if isinstance(p, (int, np.integer)):
            if p < 0:
                return (self ** (-int(p)))._reciprocal()
            out = Jet.constant(self.space, 1.0)
            for _ in range(int(p)):
                out = out * self
            return out
        return exp(log(self) * float(p))

    def _compose(self, taylor: Sequence[float]) -> "Jet":
        """Evaluate sum_k taylor[k] * h^k where h is the nilpotent part of self."""
        h = Jet(self.space, self.coef.copy())
        h.coef[0] = 0.0
        out = Jet.constant(self.space, taylor[-1])
        for c in reversed(taylor[:-1]):
            out = out * h + c
        return out

    def _reciprocal(self) -> "Jet":
        v = self.value
        if abs(v) < _DIVISION_FLOOR:
            raise EvaluationDomainError("division by a jet with vanishing value")
        m = self.space.order
        taylor = [(-1.0) ** k / v ** (k + 1) for k in range(m + 1)]
        return self._compose(taylor)

    def __repr__(self):
        return f"Jet(order={self.space.order}, value={self.value!r})"


# -- elementary functions (accept floats or jets) ---------------------------


def _dispatch(x, float_fn, taylor_fn):
    if isinstance(x, Jet):
        v = x.value
        if not math.isfinite(v):
            raise EvaluationDomainError("non-finite value in jet evaluation")
        return x._compose(taylor_fn(v, x.space.order))
    return float_fn(x)


def exp(x):
    def taylor(v, m):
        e = math.exp(v)
        return [e / math.factorial(k) for k in range(m + 1)]

    return _dispatch(x, math.exp, taylor)


def log(x):
    def taylor(v, m):
        if v <= 0.0:
            raise EvaluationDomainError("log of a non-positive value")
        out = [math.log(v)]
        for k in range(1, m + 1):
            out.append((-1.0) ** (k - 1) / (k * v ** k))
        return out

    return _dispatch(x, math.log, taylor)


def sqrt(x):
    def taylor(v, m):
        if v <= 0.0:
            raise EvaluationDomainError("sqrt of a non-positive value")
        root = math.sqrt(v)
        return [root * _binom_half(k) / v ** k for k in range(m + 1)]

    return _dispatch(x, math.sqrt, taylor)


def _binom_half(k: int) -> float:
    # Taylor coefficient of (1+u)^(1/2) at u=0: C(1/2, k)
    num = 1.0
    x = 0.5
    for i in range(k):
        num *= (x - i)
    return num / math.factorial(k)


def sin(x):
    def taylor(v, m):
        s, c = math.sin(v), math.cos(v)
        cycle = [s, c, -s, -c]
        return [cycle[k % 4] / math.factorial(k) for k in range(m + 1)]

    return _dispatch(x, math.sin, taylor)


def cos(x):
    def taylor(v, m):
        s, c = math.sin(v), math.cos(v)
        cycle = [c, -s, -c, s]
        return [cycle[k % 4] / math.factorial(k) for k in range(m + 1)]

    return _dispatch(x, math.cos, taylor)


def as_float(x) -> float:
    return x.value if isinstance(x, Jet) else float(x)


# -- field evaluation --------------------------------------------------------


class TaylorPoly:
    """A truncated Taylor polynomial evaluable on mixed float/jet coordinates.

    Inactive coordinates arrive as floats equal to the center values, so
    their deltas vanish exactly and only the active directions contribute.
    """

    __slots__ = ("center", "coeffs")

    def __init__(self, center: Sequence[float], coeffs: dict):
        self.center = [float(c) for c in center]
        self.coeffs = {e: float(a) for e, a in coeffs.items() if a != 0.0}

    def __call__(self, coords):
        out = 0.0
        deltas = [c - c0 for c, c0 in zip(coords, self.center)]
        for e, a in self.coeffs.items():
            term = a
            for slot, deg in enumerate(e):
                for _ in range(deg):
                    term = term * deltas[slot]
            out = out + term
        return out


def jet_eval(
    field: Callable,
    point: Sequence[float],
    active: Sequence[int],
    order: int,
) -> Jet:
    """Evaluate ``field`` at ``point`` carrying exact partials along ``active``.

    ``field`` receives one coordinate per slot (jets for active slots, plain
    floats elsewhere) and must be written in jet-compatible arithmetic.
    """
    active = list(active)
    if not active:
        raise ValueError("active coordinate set must be nonempty")
    if order > MAX_ORDER:
        raise ValueError(f"jet order capped at {MAX_ORDER}")
    space = JetSpace(len(active), order)
    coords: list = [float(p) for p in point]
    for pos, slot in enumerate(active):
        coords[slot] = Jet.variable(space, pos, float(point[slot]))
    out = field(coords)
    if not isinstance(out, Jet):
        out = Jet.constant(space, float(out))
    if not np.all(np.isfinite(out.coef)):
        raise EvaluationDomainError("non-finite coefficient produced during evaluation")
    return out


def jet_fd_crosscheck(
    field: Callable,
    point: Sequence[float],
    order: int,
    steps: Sequence[float],
    dirs: Sequence[int] | None = None,
) -> dict:
    """Compare jet coefficients against central finite differences.

    For every first/second partial (or just the multiset ``dirs`` if given)
    the report lists |jet - fd| per step plus a Richardson convergence-order
    estimate from successive steps.  Discrepancies that stop shrinking below
    the round-off floor are flagged, not fatal.
    """
    if order not in (1, 2):
        raise ValueError("finite-difference crosscheck supports orders 1 and 2")
    steps = list(steps)
    if len(steps) < 3 or any(b >= a for a, b in zip(steps, steps[1:])):
        raise ValueError("need at least 3 strictly decreasing step sizes")
    dim = len(point)
    point = [float(p) for p in point]

    def f_at(shift):
        q = list(point)
        for slot, d in shift:
            q[slot] += d
        return float(field(q))

    targets: list[tuple[int, ...]]
    if dirs is not None:
        targets = [tuple(sorted(dirs))]
    else:
        targets = [(a,) for a in range(dim)]
        if order == 2:
            targets += [tuple(sorted(t)) for t in combinations_with_replacement(range(dim), 2)]

    jet = jet_eval(field, point, active=range(dim), order=order)
    entries = []
    for t in targets:
        exact = jet.partial(t)
        discs = []
        for h in steps:
            if len(t) == 1:
                a = t[0]
                fd = (f_at([(a, h)]) - f_at([(a, -h)])) / (2 * h)
            elif t[0] == t[1]:
                a = t[0]
                fd = (f_at([(a, h)]) - 2 * f_at([]) + f_at([(a, -h)])) / h**2
            else:
                a, b = t
                fd = (
                    f_at([(a, h), (b, h)])
                    - f_at([(a, h), (b, -h)])
                    - f_at([(a, -h), (b, h)])
                    + f_at([(a, -h), (b, -h)])
                ) / (4 * h**2)
            discs.append(abs(fd - exact))
        scale = max(abs(exact), 1.0)
        floor = 1e-11 * scale
        orders = []
        for (h1, d1), (h2, d2) in zip(zip(steps, discs), zip(steps[1:], discs[1:])):
            if d1 > floor and d2 > floor:
                orders.append(math.log(d1 / d2) / math.log(h1 / h2))
        monotone = all(
            d2 <= d1 * 1.05 or d2 < floor for d1, d2 in zip(discs, discs[1:])
        )
        entries.append(
            {
                "dirs": t,
                "jet": exact,
                "discrepancies": discs,
                "order_estimates": orders,
                "monotone": monotone,
                "flagged": not monotone,
            }
        )
    return {"steps": steps, "entries": entries}
