"""Exact rational enumeration of the protocol's decoding law, n <= 3.

Independent oracle for the Monte Carlo path and the closed-form channel
law: it renders the wiring explicitly and sums over every box-outcome
combination and channel-noise pattern with exact rational weights. Box
pairs on Bob's decode path contribute their full joint outcome (A, B)
weighted by the isotropic table; boxes Bob never queries contribute
only their Alice-side output, weighted by the no-signaling marginal
(uniform). Nothing here assumes the error-cancellation identity the
oracle exists to check.

The combination count is 2**(2**n - 1 - n) * 4**n * 2**n, which is why
sizes above n = 3 are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

_INT64_BUDGET = 1 << 62


def _as_fraction(name: str, v) -> Fraction:
    if not isinstance(v, Rational):
        raise ValueError(
            f"{name} must be rational (int or Fraction) for exact enumeration, got {v!r}"
        )
    f = Fraction(v)
    if not -1 <= f <= 1:
        raise ValueError(f"{name} must lie in [-1, 1], got {f}")
    return f


def _path_columns(address: int, n: int) -> list:
    """Column of the path box at each level 1..n (index k-1)."""
    cols = [0] * n
    col = 0
    cols[n - 1] = 0
    for k in range(n, 1, -1):
        col = 2 * col + ((address >> (k - 1)) & 1)
        cols[k - 2] = col
    return cols


@dataclass(frozen=True)
class AddressLaw:
    """Exact decoding law of one address."""

    address: int
    p_correct: Fraction
    p_correct_given_vector: dict
    p_y1_given_vector: dict
    joint_sign_law: dict  # (x_sign, y_sign) -> Fraction under the source law

    def is_memoryless(self) -> bool:
        """True when correctness given all inputs depends only on the
        addressed bit."""
        by_bit = {0: set(), 1: set()}
        for vec, p in self.p_correct_given_vector.items():
            by_bit[vec[self.address]].add(p)
        return all(len(vals) <= 1 for vals in by_bit.values())


@dataclass(frozen=True)
class ExactProtocolLaw:
    n: int
    c: Fraction
    c_prime: Fraction
    theta: Fraction
    addresses: tuple

    def law(self, address: int) -> AddressLaw:
        return self.addresses[address]


def enumerate_exact(n: int, c, c_prime=1, theta=0) -> ExactProtocolLaw:
    """Exhaustive exact law of (x_i, y_i) for every address.

    Requires rational ``c``, ``c_prime`` and ``theta``. Returns, per
    address, P(y = x_i) marginally and conditioned on each full input
    vector, the conditional law of y, and the joint +-1 law of
    (x_i, y_i) under the Bernoulli source.
    """
    if not 1 <= n <= 3:
        raise ValueError(
            f"exact enumeration is limited to 1 <= n <= 3 "
            f"(combination count grows as 4**(2**n)), got n={n}"
        )
    c = _as_fraction("c", c)
    c_prime = _as_fraction("c_prime", c_prime)
    theta = _as_fraction("theta", theta)

    m = 1 << n
    n_off = m - 1 - n
    pc, qc = c.numerator, c.denominator
    pp, qp = c_prime.numerator, c_prime.denominator
    t_combos = (1 << n_off) * (4 ** n) * (1 << n)
    if (2 * qc) ** n * (2 * qp) ** n * t_combos >= _INT64_BUDGET:
        raise ValueError(
            "denominators of c and c_prime too large for exact int64 enumeration"
        )
    denom = (1 << n_off) * (4 * qc) ** n * (2 * qp) ** n

    p_bit1 = (1 + theta) / 2  # source bit 1 <-> sign -1
    vec_ids = np.arange(1 << m, dtype=np.uint32)
    vectors = ((vec_ids[:, None] >> np.arange(m, dtype=np.uint32)) & 1).astype(np.uint8)

    idx = np.arange(t_combos, dtype=np.int64)
    laws = []
    for address in range(m):
        cols = _path_columns(address, n)
        path_boxes = {(k, cols[k - 1]) for k in range(1, n + 1)}

        # Bit-field layout per combination: off-path Alice outputs,
        # then (A, B) per path level, then one flip per channel hop.
        pos = 0
        a_by_level = {}
        for k in range(1, n + 1):
            w = m >> k
            a_cols = np.empty((t_combos, w), dtype=np.uint8)
            for j in range(w):
                if (k, j) in path_boxes:
                    continue
                a_cols[:, j] = (idx >> pos) & 1
                pos += 1
            a_by_level[k] = a_cols
        big_a_path = np.empty((t_combos, n), dtype=np.uint8)
        b_path = np.empty((t_combos, n), dtype=np.uint8)
        for k in range(1, n + 1):
            big_a_path[:, k - 1] = (idx >> pos) & 1
            a_by_level[k][:, cols[k - 1]] = big_a_path[:, k - 1]
            pos += 1
            b_path[:, k - 1] = (idx >> pos) & 1
            pos += 1
        flip_parity = np.zeros(t_combos, dtype=np.uint8)
        flip_weight = np.ones(t_combos, dtype=np.int64)
        for _ in range(n):
            flip = ((idx >> pos) & 1).astype(np.uint8)
            pos += 1
            flip_parity ^= flip
            flip_weight *= np.where(flip == 1, qp - pp, qp + pp)

        bob_xor = np.zeros(t_combos, dtype=np.uint8)
        for k in range(1, n + 1):
            bob_xor ^= b_path[:, k - 1]

        p_correct_given = {}
        p_y1_given = {}
        for vec in vectors:
            vals = np.broadcast_to(vec, (t_combos, m))
            weight = flip_weight.copy()
            for k in range(1, n + 1):
                a_in = vals[:, 0::2] ^ vals[:, 1::2]
                a_pk = a_in[:, cols[k - 1]]
                b_k = (address >> (k - 1)) & 1
                sat = (big_a_path[:, k - 1] ^ b_path[:, k - 1]) == (a_pk & b_k)
                weight *= np.where(sat, qc + pc, qc - pc)
                vals = vals[:, 0::2] ^ a_by_level[k]
            y = vals[:, 0] ^ flip_parity ^ bob_xor
            total = int(weight.sum())
            if total != denom:
                raise AssertionError(
                    f"enumeration weights sum to {total}, expected {denom}"
                )
            w_y1 = int(weight[y == 1].sum())
            w_correct = int(weight[y == vec[address]].sum())
            key = tuple(int(b) for b in vec)
            p_correct_given[key] = Fraction(w_correct, denom)
            p_y1_given[key] = Fraction(w_y1, denom)

        p_correct = Fraction(0)
        joint = {(1, 1): Fraction(0), (1, -1): Fraction(0),
                 (-1, 1): Fraction(0), (-1, -1): Fraction(0)}
        for vec, p_corr in p_correct_given.items():
            ones = sum(vec)
            p_vec = p_bit1 ** ones * (1 - p_bit1) ** (m - ones)
            p_correct += p_vec * p_corr
            x_sign = 1 - 2 * vec[address]
            p_y1 = p_y1_given[vec]
            joint[x_sign, -1] += p_vec * p_y1
            joint[x_sign, 1] += p_vec * (1 - p_y1)
        laws.append(
            AddressLaw(
                address=address,
                p_correct=p_correct,
                p_correct_given_vector=p_correct_given,
                p_y1_given_vector=p_y1_given,
                joint_sign_law=joint,
            )
        )
    return ExactProtocolLaw(
        n=n, c=c, c_prime=c_prime, theta=theta, addresses=tuple(laws)
    )
