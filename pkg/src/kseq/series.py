"""Truncated formal power series in q with exact integer coefficients.

This is the shared exact layer: generating functions are carried as plain
big-integer coefficient vectors up to an explicit truncation order, so identity
checks are bit-exact.  Evaluation at q = e^(-s) converts to mpmath floats at
the boundary and reports a truncation-tail estimate.

Series are immutable; every operation returns a fresh object.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from itertools import accumulate
from typing import Iterable, Sequence

import mpmath

from .precision import DEFAULT_DIGITS, working


@dataclass(frozen=True)
class TruncatedSeries:
    """Coefficients of 1, q, ..., q^n_max as exact integers."""

    coeffs: tuple
    n_max: int

    def __post_init__(self):
        if self.n_max < 0:
            raise ValueError("n_max must be >= 0")
        if len(self.coeffs) != self.n_max + 1:
            raise ValueError("coeffs length must be n_max + 1")
        if not isinstance(self.coeffs, tuple):
            object.__setattr__(self, "coeffs", tuple(self.coeffs))

    @staticmethod
    def from_coeffs(coeffs: Sequence[int], n_max: int | None = None) -> "TruncatedSeries":
        coeffs = list(coeffs)
        if n_max is None:
            n_max = len(coeffs) - 1
        if len(coeffs) < n_max + 1:
            coeffs += [0] * (n_max + 1 - len(coeffs))
        return TruncatedSeries(tuple(coeffs[: n_max + 1]), n_max)

    @staticmethod
    def one(n_max: int) -> "TruncatedSeries":
        return TruncatedSeries((1,) + (0,) * n_max, n_max)

    @staticmethod
    def zero(n_max: int) -> "TruncatedSeries":
        return TruncatedSeries((0,) * (n_max + 1), n_max)

    def __getitem__(self, n: int) -> int:
        return self.coeffs[n]

    def _check_match(self, other: "TruncatedSeries"):
        if self.n_max != other.n_max:
            raise ValueError(
                f"truncation orders differ: {self.n_max} != {other.n_max}"
            )

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check_match(other)
        return TruncatedSeries(
            tuple(a + b for a, b in zip(self.coeffs, other.coeffs)), self.n_max
        )

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check_match(other)
        return TruncatedSeries(
            tuple(a - b for a, b in zip(self.coeffs, other.coeffs)), self.n_max
        )

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries(tuple(-a for a in self.coeffs), self.n_max)

    def __mul__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        """Convolution truncated at n_max, exact integer arithmetic."""
        self._check_match(other)
        n = self.n_max
        out = [0] * (n + 1)
        b = other.coeffs
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j in range(n + 1 - i):
                bj = b[j]
                if bj:
                    out[i + j] += a * bj
        return TruncatedSeries(tuple(out), n)

    def inverse(self) -> "TruncatedSeries":
        """Multiplicative inverse; requires constant term +-1 so coefficients
        stay integral."""
        a = self.coeffs
        if a[0] not in (1, -1):
            raise ValueError("inverse requires constant term +1 or -1")
        a0 = a[0]
        n = self.n_max
        out = [0] * (n + 1)
        out[0] = a0
        for m in range(1, n + 1):
            acc = 0
            for j in range(1, m + 1):
                aj = a[j]
                if aj:
                    acc += aj * out[m - j]
            out[m] = -a0 * acc
        return TruncatedSeries(tuple(out), n)

    def shift(self, m: int) -> "TruncatedSeries":
        """Multiply by q^m (coefficients falling off the end are dropped)."""
        if m < 0:
            raise ValueError("shift must be nonnegative")
        if m == 0:
            return self
        return TruncatedSeries(
            (0,) * min(m, self.n_max + 1) + self.coeffs[: self.n_max + 1 - m],
            self.n_max,
        )

    def mul_geometric(self, m: int) -> "TruncatedSeries":
        """Multiply by q^m / (1 - q^m) = q^m + q^{2m} + ... in O(n_max)."""
        if m < 1:
            raise ValueError("period must be >= 1")
        out = _mul_geometric_list(list(self.coeffs), m, self.n_max)
        return TruncatedSeries(tuple(out), self.n_max)

    def mul_one_minus(self, m: int) -> "TruncatedSeries":
        """Multiply by (1 - q^m) in O(n_max)."""
        out = list(self.coeffs)
        for i in range(self.n_max, m - 1, -1):
            out[i] -= out[i - m]
        return TruncatedSeries(tuple(out), self.n_max)

    def div_one_minus(self, m: int) -> "TruncatedSeries":
        """Multiply by 1 / (1 - q^m) in O(n_max)."""
        out = list(self.coeffs)
        for i in range(m, self.n_max + 1):
            out[i] += out[i - m]
        return TruncatedSeries(tuple(out), self.n_max)

    def truncate(self, n_max: int) -> "TruncatedSeries":
        if n_max > self.n_max:
            raise ValueError("cannot extend a truncated series")
        return TruncatedSeries(self.coeffs[: n_max + 1], n_max)

    def to_json(self) -> str:
        """JSON array of decimal strings (exact at any size)."""
        return json.dumps([str(c) for c in self.coeffs])

    @staticmethod
    def from_json(text: str) -> "TruncatedSeries":
        coeffs = [int(c) for c in json.loads(text)]
        return TruncatedSeries.from_coeffs(coeffs)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["n", "coefficient"])
        for n, c in enumerate(self.coeffs):
            w.writerow([n, str(c)])
        return buf.getvalue()


def _mul_geometric_list(a: list, m: int, n_max: int) -> list:
    # b[i] = a[i - m] + b[i - m]; along each residue class mod m this is a
    # shifted prefix sum, which accumulate() runs at C speed.
    out = [0] * (n_max + 1)
    for rem in range(min(m, n_max + 1)):
        cls = a[rem::m]
        if len(cls) <= 1:
            continue
        out[rem + m :: m] = accumulate(cls[:-1])
    return out


def product_form(
    factors: Iterable[tuple], n_max: int
) -> TruncatedSeries:
    """Expand prod_{n>=1} (1 - q^{a n + b})^e exactly, truncated at n_max.

    ``factors`` is an iterable of (period a, residue b, exponent e) with
    a >= 1 and e in {-1, +1}.  Only indices with a*n + b <= n_max contribute.
    The empty list gives the constant series 1.
    """
    out = [0] * (n_max + 1)
    out[0] = 1
    for a, b, e in factors:
        if a < 1:
            raise ValueError(f"period must be >= 1, got {a}")
        if e not in (-1, 1):
            raise ValueError(f"exponent must be -1 or +1, got {e}")
        n = 1
        while True:
            m = a * n + b
            if m > n_max:
                break
            if m < 1:
                raise ValueError(f"factor ({a}, {b}, {e}) hits exponent {m} < 1")
            if e == -1:
                for i in range(m, n_max + 1):
                    out[i] += out[i - m]
            else:
                for i in range(n_max, m - 1, -1):
                    out[i] -= out[i - m]
            n += 1
    return TruncatedSeries(tuple(out), n_max)


def partition_gf(n_max: int) -> TruncatedSeries:
    """Generating function of unrestricted partitions, prod 1/(1-q^n)."""
    return product_form([(1, 0, -1)], n_max)


@dataclass(frozen=True)
class EvalResult:
    """Value of a truncated series at q = e^(-s) plus a tail estimate.

    ``tail_bound`` estimates |sum_{n > n_max} c_n q^n| from the growth of the
    last retained coefficients; ``within_tol`` records whether it met the
    caller's tolerance (None when no tolerance was requested or the growth
    ratio made the geometric estimate diverge).
    """

    value: mpmath.mpf
    tail_bound: mpmath.mpf
    within_tol: bool | None


def eval_at(
    series: TruncatedSeries,
    s,
    digits: int = DEFAULT_DIGITS,
    tol=None,
) -> EvalResult:
    """Evaluate sum_n c_n e^(-n s) for s > 0 by Horner's rule."""
    with working(digits):
        s = mpmath.mpf(s)
        if s <= 0:
            raise ValueError("s must be positive")
        q = mpmath.exp(-s)
        acc = mpmath.mpf(0)
        for c in reversed(series.coeffs):
            acc = acc * q + c
        tail = _tail_estimate(series, q)
        ok = None if tol is None else bool(tail <= mpmath.mpf(tol))
        return EvalResult(acc, tail, ok)


def _tail_estimate(series: TruncatedSeries, q) -> mpmath.mpf:
    # Geometric continuation of the coefficient growth seen near the cutoff:
    # |tail| <= |c_last| * rho * q^{n_max+1} / (1 - rho q), rho the largest
    # recent ratio of consecutive nonzero coefficients.
    coeffs = series.coeffs
    nz = [(i, abs(c)) for i, c in enumerate(coeffs) if c != 0]
    if not nz:
        return mpmath.mpf(0)
    last_i, last_c = nz[-1]
    rho = mpmath.mpf(1)
    window = nz[-8:]
    for (i0, c0), (i1, c1) in zip(window, window[1:]):
        r = (mpmath.mpf(c1) / c0) ** (mpmath.mpf(1) / (i1 - i0))
        rho = max(rho, r)
    growth = rho * q
    lead = mpmath.mpf(last_c) * rho ** (series.n_max + 1 - last_i) * q ** (series.n_max + 1)
    if growth >= 1:
        return mpmath.mpf("inf")
    return lead / (1 - growth)
