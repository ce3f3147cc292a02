"""Device-independent model of a bipartite no-signaling box pair.

A box pair is described purely by its conditional distribution
``P(A, B | a, b)`` over binary outputs given binary measurement choices.
The isotropic family used throughout carries a single correlation
parameter ``c``: the mass on the two output pairs with ``A xor B = a*b``
is ``(1+c)/4`` each, and ``(1-c)/4`` on the two violating pairs, which
makes both marginals uniform and the pair a symmetric binary channel of
correlation ``c`` between ``(-1)**(a*b)`` and ``(-1)**(A xor B)``.

Tables keep exact ``Fraction`` entries whenever the parameter is
rational so the enumeration oracles can assert rational equalities;
float parameters fall back to float tables.

Boxes are immutable after construction and safe for concurrent reads.
Sampling only advances the caller-supplied generator.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Union

import numpy as np

Prob = Union[Fraction, float]

_OUTCOMES = ((0, 0), (0, 1), (1, 0), (1, 1))


def _check_bit(name: str, v: int) -> None:
    if v not in (0, 1):
        raise ValueError(f"{name} must be 0 or 1, got {v!r}")


def bit_to_sign(bit: int) -> int:
    """Map a 0/1 bit to its +-1 view, 0 -> +1 and 1 -> -1."""
    return 1 - 2 * bit


@dataclass(frozen=True)
class BoxInput:
    """Measurement choices (a, b) for the two sides of a box pair."""

    a: int
    b: int

    def __post_init__(self):
        _check_bit("a", self.a)
        _check_bit("b", self.b)


@dataclass(frozen=True)
class BoxOutcome:
    """Joint output (A, B) of one box-pair use, with +-1 views."""

    A: int
    B: int

    def __post_init__(self):
        _check_bit("A", self.A)
        _check_bit("B", self.B)

    @property
    def a_hat(self) -> int:
        return bit_to_sign(self.A)

    @property
    def b_hat(self) -> int:
        return bit_to_sign(self.B)


@dataclass(frozen=True)
class NSBoxPair:
    """Conditional table P(A, B | a, b) plus its CHSH correlation.

    ``table[a][b][A][B]`` holds the probability of outputs (A, B) given
    inputs (a, b). ``chsh`` caches :func:`chsh_correlation` of the table.
    """

    table: tuple
    chsh: Prob

    @staticmethod
    def from_table(table) -> "NSBoxPair":
        """Build from any nested 4x(2x2) structure, validating it."""
        t = tuple(
            tuple(
                tuple(tuple(table[a][b][A][B] for B in (0, 1)) for A in (0, 1))
                for b in (0, 1)
            )
            for a in (0, 1)
        )
        _validate_table(t)
        return NSBoxPair(table=t, chsh=chsh_correlation_of_table(t))

    def prob(self, A: int, B: int, a: int, b: int) -> Prob:
        return self.table[a][b][A][B]

    def alice_marginal(self, a: int, A: int) -> Prob:
        # b-independent for any table passing the no-signaling check;
        # evaluated at b=0 by convention.
        return self.table[a][0][A][0] + self.table[a][0][A][1]

    def bob_conditional(self, a: int, A: int, b: int, B: int) -> Prob:
        marg = self.alice_marginal(a, A)
        if marg == 0:
            raise ValueError(f"conditioning on zero-probability output A={A} given a={a}")
        return self.table[a][b][A][B] / marg


def _entry_float(p: Prob) -> float:
    return float(p)


def _validate_table(table) -> None:
    exact = all(
        isinstance(table[a][b][A][B], Rational)
        for a in (0, 1) for b in (0, 1) for A, B in _OUTCOMES
    )
    for a in (0, 1):
        for b in (0, 1):
            total = sum(table[a][b][A][B] for A, B in _OUTCOMES)
            for A, B in _OUTCOMES:
                p = table[a][b][A][B]
                if p < 0 or p > 1:
                    raise ValueError(f"table entry P({A},{B}|{a},{b})={p} outside [0,1]")
            if exact:
                if total != 1:
                    raise ValueError(f"table for inputs ({a},{b}) sums to {total}, not 1")
            elif abs(float(total) - 1.0) > 1e-12:
                raise ValueError(f"table for inputs ({a},{b}) sums to {total}, not 1")


def make_isotropic_box(c: Prob) -> NSBoxPair:
    """Isotropic box pair with CHSH correlation ``c``.

    For every input pair the two outputs with ``A xor B = a*b`` get mass
    ``(1+c)/4`` each and the two others ``(1-c)/4`` each. Exact rational
    entries when ``c`` is rational.
    """
    if not -1 <= c <= 1:
        raise ValueError(f"CHSH correlation must lie in [-1, 1], got {c}")
    if isinstance(c, Rational):
        c = Fraction(c)
        sat, vio = (1 + c) / 4, (1 - c) / 4
    else:
        c = float(c)
        sat, vio = (1.0 + c) / 4.0, (1.0 - c) / 4.0
    table = tuple(
        tuple(
            tuple(
                tuple(sat if (A ^ B) == (a & b) else vio for B in (0, 1))
                for A in (0, 1)
            )
            for b in (0, 1)
        )
        for a in (0, 1)
    )
    return NSBoxPair(table=table, chsh=c)


def local_deterministic_box(alice_outputs, bob_outputs) -> NSBoxPair:
    """Product box for deterministic local strategies A=f(a), B=g(b).

    ``alice_outputs[a]`` and ``bob_outputs[b]`` give each side's fixed
    output per input. There are 16 such strategies in total.
    """
    for v in (*alice_outputs, *bob_outputs):
        _check_bit("strategy output", v)
    one, zero = Fraction(1), Fraction(0)
    table = tuple(
        tuple(
            tuple(
                tuple(
                    one if (A == alice_outputs[a] and B == bob_outputs[b]) else zero
                    for B in (0, 1)
                )
                for A in (0, 1)
            )
            for b in (0, 1)
        )
        for a in (0, 1)
    )
    return NSBoxPair.from_table(table)


def chsh_correlation_of_table(table) -> Prob:
    """CHSH combination of the four conditional correlators.

    Returns ``(E[00] + E[01] + E[10] - E[11]) / 4`` where ``E[ab]`` is
    the expectation of the +-1 output product given inputs (a, b),
    computed exactly from the table.
    """
    corr = {}
    for a in (0, 1):
        for b in (0, 1):
            corr[a, b] = sum(
                bit_to_sign(A) * bit_to_sign(B) * table[a][b][A][B]
                for A, B in _OUTCOMES
            )
    return (corr[0, 0] + corr[0, 1] + corr[1, 0] - corr[1, 1]) / 4


def chsh_correlation(box: NSBoxPair) -> Prob:
    return chsh_correlation_of_table(box.table)


@dataclass(frozen=True)
class NoSignalingReport:
    passed: bool
    max_deviation: float


def no_signaling_check(box: NSBoxPair, tol: float = 0.0) -> NoSignalingReport:
    """Check that each side's marginal ignores the remote input.

    Compares P(A|a, b=0) with P(A|a, b=1) and P(B|b, a=0) with
    P(B|b, a=1); passes when the largest absolute difference is <= tol.
    """
    if tol < 0:
        raise ValueError(f"tolerance must be nonnegative, got {tol}")
    t = box.table
    worst = 0.0
    for a in (0, 1):
        for A in (0, 1):
            m0 = t[a][0][A][0] + t[a][0][A][1]
            m1 = t[a][1][A][0] + t[a][1][A][1]
            worst = max(worst, abs(_entry_float(m0 - m1)))
    for b in (0, 1):
        for B in (0, 1):
            m0 = t[0][b][0][B] + t[0][b][1][B]
            m1 = t[1][b][0][B] + t[1][b][1][B]
            worst = max(worst, abs(_entry_float(m0 - m1)))
    return NoSignalingReport(passed=worst <= tol, max_deviation=worst)


def sample_box(box: NSBoxPair, inp: BoxInput, rng: np.random.Generator) -> BoxOutcome:
    """Draw one joint outcome by inverse CDF over the 4-entry column.

    Consumes exactly one uniform from ``rng``; replaying the generator
    state replays the outcome.
    """
    u = rng.random()
    acc = 0.0
    for A, B in _OUTCOMES:
        acc += _entry_float(box.table[inp.a][inp.b][A][B])
        if u < acc:
            return BoxOutcome(A=A, B=B)
    return BoxOutcome(A=1, B=1)  # u landed in the fp rounding slack


def sample_box_batch(
    box: NSBoxPair, a: int, b: int, size: int, rng: np.random.Generator
):
    """Vectorized outcome draws for a fixed input pair.

    Returns uint8 arrays (A, B) of length ``size``, one uniform consumed
    per draw in order.
    """
    _check_bit("a", a)
    _check_bit("b", b)
    probs = np.array(
        [_entry_float(box.table[a][b][A][B]) for A, B in _OUTCOMES], dtype=np.float64
    )
    edges = np.cumsum(probs)
    edges[-1] = 1.0
    idx = np.searchsorted(edges, rng.random(size), side="right").astype(np.uint8)
    return idx >> 1, idx & 1


def sample_alice(box: NSBoxPair, a: int, rng: np.random.Generator) -> int:
    """Draw Alice's output from her marginal at input ``a``."""
    return int(rng.random() >= _entry_float(box.alice_marginal(a, 0)))


def sample_bob_given(
    box: NSBoxPair, a: int, A: int, b: int, rng: np.random.Generator
) -> int:
    """Draw Bob's output conditioned on Alice's recorded query (a, A)."""
    return int(rng.random() >= _entry_float(box.bob_conditional(a, A, b, 0)))
