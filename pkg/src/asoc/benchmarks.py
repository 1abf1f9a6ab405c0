"""Eighteen classic test functions with box domains and known minima.

The catalog order is fixed: position ``k`` (1-based) is "function number k"
in the adaptivity experiment, so do not reorder it.

Sphere, Rosenbrock and Styblinski-Tang take a dimension parameter; every
other function is 2-D.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray

from asoc.core import BoxDomain

__all__ = [
    "DEFAULT_DIMENSIONS",
    "BenchmarkFunction",
    "catalog",
    "evaluate",
    "get_function",
    "names",
]

PI = math.pi


def ackley(x):
    x1, x2 = x
    return (
        -20.0 * math.exp(-0.2 * math.sqrt(0.5 * (x1 * x1 + x2 * x2)))
        - math.exp(0.5 * (math.cos(2 * PI * x1) + math.cos(2 * PI * x2)))
        + math.e
        + 20.0
    )


def sphere(x):
    x = np.asarray(x, dtype=float)
    return float(x @ x)


def rosenbrock(x):
    x = np.asarray(x, dtype=float)
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (x[:-1] - 1.0) ** 2))


def beale(x):
    x1, x2 = x
    return (
        (1.5 - x1 + x1 * x2) ** 2
        + (2.25 - x1 + x1 * x2**2) ** 2
        + (2.625 - x1 + x1 * x2**3) ** 2
    )


def goldstein_price(x):
    x1, x2 = x
    a = 1 + (x1 + x2 + 1) ** 2 * (19 - 14 * x1 + 3 * x1**2 - 14 * x2 + 6 * x1 * x2 + 3 * x2**2)
    b = 30 + (2 * x1 - 3 * x2) ** 2 * (
        18 - 32 * x1 + 12 * x1**2 + 48 * x2 - 36 * x1 * x2 + 27 * x2**2
    )
    return a * b


def booth(x):
    x1, x2 = x
    return (x1 + 2 * x2 - 7) ** 2 + (2 * x1 + x2 - 5) ** 2


def bukin_n6(x):
    x1, x2 = x
    return 100.0 * math.sqrt(abs(x2 - 0.01 * x1 * x1)) + 0.01 * abs(x1 + 10.0)


def matyas(x):
    x1, x2 = x
    return 0.26 * (x1 * x1 + x2 * x2) - 0.48 * x1 * x2


def levi_n13(x):
    x1, x2 = x
    return (
        math.sin(3 * PI * x1) ** 2
        + (x1 - 1) ** 2 * (1 + math.sin(3 * PI * x2) ** 2)
        + (x2 - 1) ** 2 * (1 + math.sin(2 * PI * x2) ** 2)
    )


def three_hump_camel(x):
    x1, x2 = x
    return 2 * x1**2 - 1.05 * x1**4 + x1**6 / 6 + x1 * x2 + x2**2


def easom(x):
    x1, x2 = x
    return -math.cos(x1) * math.cos(x2) * math.exp(-((x1 - PI) ** 2 + (x2 - PI) ** 2))


def cross_in_tray(x):
    x1, x2 = x
    inner = abs(math.sin(x1) * math.sin(x2) * math.exp(abs(100 - math.hypot(x1, x2) / PI)))
    return -0.0001 * (inner + 1) ** 0.1


def eggholder(x):
    x1, x2 = x
    return -(x2 + 47) * math.sin(math.sqrt(abs(x2 + x1 / 2 + 47))) - x1 * math.sin(
        math.sqrt(abs(x1 - (x2 + 47)))
    )


def holder_table(x):
    x1, x2 = x
    return -abs(math.sin(x1) * math.cos(x2) * math.exp(abs(1 - math.hypot(x1, x2) / PI)))


def mccormick(x):
    x1, x2 = x
    return math.sin(x1 + x2) + (x1 - x2) ** 2 - 1.5 * x1 + 2.5 * x2 + 1


def schaffer_n2(x):
    x1, x2 = x
    return 0.5 + (math.sin(x1 * x1 - x2 * x2) ** 2 - 0.5) / (1 + 0.001 * (x1 * x1 + x2 * x2)) ** 2


def schaffer_n4(x):
    x1, x2 = x
    return 0.5 + (math.cos(math.sin(abs(x1 * x1 - x2 * x2))) ** 2 - 0.5) / (
        1 + 0.001 * (x1 * x1 + x2 * x2)
    ) ** 2


def styblinski_tang(x):
    x = np.asarray(x, dtype=float)
    return float(np.sum(x**4 - 16 * x**2 + 5 * x) / 2)


@dataclass(frozen=True)
class BenchmarkFunction:
    """A test function bound to a dimension, box and known minima.

    Calling the instance evaluates the function without bounds checks (the
    optimizers only ever pass clipped points); use :func:`evaluate` for a
    checked evaluation.
    """

    name: str
    key: str
    index: int
    func: Callable[[NDArray], float]
    domain: BoxDomain
    minimizers: tuple[tuple[float, ...], ...]
    minimum: float
    tolerance: float = 1e-9
    parametric: bool = False

    @property
    def dimension(self) -> int:
        return self.domain.dimension

    @property
    def label(self) -> str:
        return f"{self.name} (n={self.dimension})" if self.parametric else self.name

    def __call__(self, x: NDArray) -> float:
        return float(self.func(x))


DEFAULT_DIMENSIONS = {"sphere": 10, "rosenbrock": 3, "styblinski_tang": 2}

_CORNERS = ((1, 1), (1, -1), (-1, 1), (-1, -1))

# Cross-in-tray and Holder table: the commonly printed optimum values
# (-2.0613..., -19.20851...) are not reproduced by the functions at the listed
# minimizers; these are the values the functions actually attain there.
CROSS_IN_TRAY_MIN = -2.06261187082274
HOLDER_TABLE_MIN = -19.2085025678867


def _fixed(name, key, index, func, lower, upper, minimizers, minimum, tolerance=1e-9):
    return BenchmarkFunction(
        name=name,
        key=key,
        index=index,
        func=func,
        domain=BoxDomain(np.asarray(lower, float), np.asarray(upper, float)),
        minimizers=tuple(tuple(float(c) for c in m) for m in minimizers),
        minimum=minimum,
        tolerance=tolerance,
    )


def _parametric(name, key, index, func, low, high, coord, minimum, n, tolerance=1e-9):
    if n < 1 or (key == "rosenbrock" and n < 2):
        raise ValueError(f"invalid dimension {n} for {name}")
    return BenchmarkFunction(
        name=name,
        key=key,
        index=index,
        func=func,
        domain=BoxDomain.cube(low, high, n),
        minimizers=((float(coord),) * n,),
        minimum=minimum,
        tolerance=tolerance,
        parametric=True,
    )


def _build(index: int, n: int | None = None) -> BenchmarkFunction:
    if index == 1:
        return _fixed("Ackley", "ackley", 1, ackley, [-5, -5], [5, 5], [(0, 0)], 0.0)
    if index == 2:
        return _parametric("Sphere", "sphere", 2, sphere, -5.12, 5.12, 0.0, 0.0,
                           n or DEFAULT_DIMENSIONS["sphere"])
    if index == 3:
        return _parametric("Rosenbrock", "rosenbrock", 3, rosenbrock, -2.048, 2.048, 1.0, 0.0,
                           n or DEFAULT_DIMENSIONS["rosenbrock"])
    if index == 4:
        return _fixed("Beale", "beale", 4, beale, [-4.5, -4.5], [4.5, 4.5], [(3, 0.5)], 0.0)
    if index == 5:
        return _fixed("Goldstein-Price", "goldstein_price", 5, goldstein_price,
                      [-2, -2], [2, 2], [(0, -1)], 3.0)
    if index == 6:
        return _fixed("Booth", "booth", 6, booth, [-10, -10], [10, 10], [(1, 3)], 0.0)
    if index == 7:
        return _fixed("Bukin N.6", "bukin_n6", 7, bukin_n6, [-15, -3], [-5, 3], [(-10, 1)], 0.0)
    if index == 8:
        return _fixed("Matyas", "matyas", 8, matyas, [-10, -10], [10, 10], [(0, 0)], 0.0)
    if index == 9:
        return _fixed("Levi N.13", "levi_n13", 9, levi_n13, [-10, -10], [10, 10], [(1, 1)], 0.0)
    if index == 10:
        return _fixed("Three-hump camel", "three_hump_camel", 10, three_hump_camel,
                      [-5, -5], [5, 5], [(0, 0)], 0.0)
    if index == 11:
        return _fixed("Easom", "easom", 11, easom, [-100, -100], [100, 100], [(PI, PI)], -1.0,
                      tolerance=1e-12)
    if index == 12:
        return _fixed("Cross-in-tray", "cross_in_tray", 12, cross_in_tray, [-10, -10], [10, 10],
                      [(sx * 1.34941, sy * 1.34941) for sx, sy in _CORNERS],
                      CROSS_IN_TRAY_MIN, tolerance=1e-6)
    if index == 13:
        return _fixed("Eggholder", "eggholder", 13, eggholder, [-512, -512], [512, 512],
                      [(512, 404.2319)], -959.6407, tolerance=1e-3)
    if index == 14:
        return _fixed("Holder table", "holder_table", 14, holder_table, [-10, -10], [10, 10],
                      [(sx * 8.05502, sy * 9.66459) for sx, sy in _CORNERS],
                      HOLDER_TABLE_MIN, tolerance=1e-6)
    if index == 15:
        return _fixed("McCormick", "mccormick", 15, mccormick, [-1.5, -3], [4, 4],
                      [(-0.54719, -1.54719)], -1.9133, tolerance=1e-3)
    if index == 16:
        return _fixed("Schaffer N.2", "schaffer_n2", 16, schaffer_n2, [-100, -100], [100, 100],
                      [(0, 0)], 0.0)
    if index == 17:
        return _fixed("Schaffer N.4", "schaffer_n4", 17, schaffer_n4, [-100, -100], [100, 100],
                      [(0, 1.25313), (0, -1.25313), (1.25313, 0), (-1.25313, 0)],
                      0.292579, tolerance=1e-6)
    if index == 18:
        n = n or DEFAULT_DIMENSIONS["styblinski_tang"]
        # -39.16599 is the per-coordinate value rounded to 5 decimals.
        return _parametric("Styblinski-Tang", "styblinski_tang", 18, styblinski_tang, -5, 5,
                           -2.903534, -39.16599 * n, n, tolerance=5e-4 * n)
    raise ValueError(f"function index must be in 1..18, got {index}")


_KEYS = [
    "ackley", "sphere", "rosenbrock", "beale", "goldstein_price", "booth", "bukin_n6",
    "matyas", "levi_n13", "three_hump_camel", "easom", "cross_in_tray", "eggholder",
    "holder_table", "mccormick", "schaffer_n2", "schaffer_n4", "styblinski_tang",
]


def _normalize(name: str) -> str:
    return re.sub(r"[^a-z0-9]", "", name.lower())


_LOOKUP = {_normalize(k): i + 1 for i, k in enumerate(_KEYS)}
_LOOKUP.update({"levin13": 9, "bukin6": 7, "camel": 10, "threehumpcamel": 10,
                "goldsteinprice": 5, "styblinski": 18, "holder": 14, "crossintray": 12})


def names() -> list[str]:
    return list(_KEYS)


def get_function(selector: str | int, dimension: int | None = None) -> BenchmarkFunction:
    """Look a function up by name (case and punctuation insensitive) or 1-based index.

    ``dimension`` applies to Sphere, Rosenbrock and Styblinski-Tang; for the
    fixed 2-D functions it must be ``None`` or 2.
    """
    if isinstance(selector, str) and selector.strip().isdigit():
        selector = int(selector)
    if isinstance(selector, (int, np.integer)):
        index = int(selector)
        if not 1 <= index <= len(_KEYS):
            raise KeyError(f"function index must be in 1..{len(_KEYS)}, got {index}")
    else:
        index = _LOOKUP.get(_normalize(selector))
        if index is None:
            raise KeyError(f"unknown function {selector!r}; valid names: {', '.join(_KEYS)}")
    fn = _build(index, dimension if _KEYS[index - 1] in DEFAULT_DIMENSIONS else None)
    if dimension is not None and dimension != fn.dimension:
        raise ValueError(f"{fn.name} is {fn.dimension}-D only, got dimension {dimension}")
    return fn


def catalog(dimension: int | None = None, **dims: int) -> list[BenchmarkFunction]:
    """All 18 functions in their fixed order.

    ``dimension`` sets the dimension of every parametric function; keyword
    overrides (``sphere=``, ``rosenbrock=``, ``styblinski_tang=``) win over it.
    """
    unknown = set(dims) - set(DEFAULT_DIMENSIONS)
    if unknown:
        raise TypeError(f"unknown dimension overrides: {sorted(unknown)}")
    out = []
    for i, key in enumerate(_KEYS, start=1):
        n = dims.get(key, dimension) if key in DEFAULT_DIMENSIONS else None
        out.append(_build(i, n))
    return out


def evaluate(fn: BenchmarkFunction, x: ArrayLike) -> float:
    """Checked evaluation: dimension must match and ``x`` must lie in the box."""
    x = np.asarray(x, dtype=float)
    if x.shape != (fn.dimension,):
        raise ValueError(f"{fn.name} expects a point of dimension {fn.dimension}, got shape {x.shape}")
    if not fn.domain.contains(x):
        raise ValueError(f"point {x.tolist()} lies outside the domain of {fn.name}")
    return fn(x)
