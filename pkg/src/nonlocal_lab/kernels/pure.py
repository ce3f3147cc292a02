"""Pure numpy backend for the protocol hot loop.

Semantics contract shared with the compiled backend: one work unit owns
one Philox stream (see :mod:`nonlocal_lab.streams`) and every protocol
run consumes exactly ``events_per_run(n)`` uniforms from it in a fixed
order:

    [2**n source draws][2**n - 1 box draws, level-major]
    [n channel-hop flips][n path-box error draws, root to leaf]

Because the count is outcome-independent, the whole per-unit block can
be generated with one ``Generator.random`` call and consumed by
column slice, which is what makes this backend bit-identical to the
scalar compiled loop.
"""

from __future__ import annotations

import numpy as np

from .. import streams

# Address sentinel: run r of unit u decodes address (u * runs_per_unit + r) mod 2**n.
CYCLE = -1

# Upper bound on elements per generated uniform block (~64 MB of doubles).
_TARGET_ELEMS = 8_000_000


def events_per_run(n: int) -> int:
    m = 1 << n
    return 2 * m + 2 * n - 1


def path_columns(addrs: np.ndarray, n: int) -> np.ndarray:
    """0-based box column used at each level for the given addresses.

    Column index at the top level is 0; descending one level doubles the
    column and adds the address bit inserted at the current level.
    Returns an (R, n) array whose column k-1 is the level-k box index.
    """
    addrs = np.asarray(addrs, dtype=np.int64)
    cols = np.zeros((addrs.shape[0], n), dtype=np.int64)
    col = np.zeros(addrs.shape[0], dtype=np.int64)
    for k in range(n, 1, -1):
        col = 2 * col + ((addrs >> (k - 1)) & 1)
        cols[:, k - 2] = col
    return cols


def decode_rows(U, off, bits, addrs, n, c, c_prime):
    """Wire given source-bit rows through the box tree and decode.

    ``U[:, off:]`` supplies the 2**n - 1 + 2n post-source uniforms per
    row; ``bits`` is the (R, 2**n) source-bit matrix and ``addrs`` the
    per-row decode address. Returns the decoded bit per row.
    """
    R, m = bits.shape
    rows = np.arange(R)
    cols = path_columns(addrs, n)
    a_path = np.empty((R, n), dtype=np.uint8)
    big_a_path = np.empty((R, n), dtype=np.uint8)
    vals = bits
    for k in range(1, n + 1):
        w = m >> k
        box_a = (U[:, off:off + w] < 0.5).astype(np.uint8)
        off += w
        a_in = vals[:, 0::2] ^ vals[:, 1::2]
        ck = cols[:, k - 1]
        a_path[:, k - 1] = a_in[rows, ck]
        big_a_path[:, k - 1] = box_a[rows, ck]
        vals = vals[:, 0::2] ^ box_a
    p_flip = (1.0 - c_prime) / 2.0
    parity = ((U[:, off:off + n] < p_flip).sum(axis=1) & 1).astype(np.uint8)
    y = vals[:, 0] ^ parity
    off += n
    p_err = (1.0 - c) / 2.0
    for k in range(n, 0, -1):
        b = ((addrs >> (k - 1)) & 1).astype(np.uint8)
        err = (U[:, off + (n - k)] < p_err).astype(np.uint8)
        y = y ^ big_a_path[:, k - 1] ^ (a_path[:, k - 1] & b) ^ err
    return y


def _process_block(U, first_global_run, n, c, c_prime, theta, address, x_out, y_out):
    R = U.shape[0]
    m = 1 << n
    if address >= 0:
        addrs = np.full(R, address, dtype=np.int64)
    else:
        addrs = (first_global_run + np.arange(R, dtype=np.int64)) % m
    bits = (U[:, :m] < (1.0 + theta) / 2.0).astype(np.uint8)
    x_out[:] = bits[np.arange(R), addrs]
    y_out[:] = decode_rows(U, m, bits, addrs, n, c, c_prime)


def simulate_into(
    x_out, y_out, n, c, c_prime, theta,
    runs_per_unit, address, master_seed, unit_lo, unit_hi,
):
    """Simulate units [unit_lo, unit_hi) into preallocated output slices.

    ``x_out[i]``/``y_out[i]`` receive the source bit at the decoded
    address and the decoded bit of run ``i`` (unit-major, run-minor).
    """
    m = 1 << n
    ev = events_per_run(n)
    unit_elems = runs_per_unit * ev
    if unit_elems <= _TARGET_ELEMS:
        group = max(1, _TARGET_ELEMS // unit_elems)
        u = unit_lo
        while u < unit_hi:
            g = min(group, unit_hi - u)
            rows = g * runs_per_unit
            U = np.empty((rows, ev), dtype=np.float64)
            for i in range(g):
                gen = streams.unit_stream(master_seed, u + i)
                U[i * runs_per_unit:(i + 1) * runs_per_unit] = gen.random(
                    (runs_per_unit, ev)
                )
            base = (u - unit_lo) * runs_per_unit
            _process_block(
                U, u * runs_per_unit, n, c, c_prime, theta, address,
                x_out[base:base + rows], y_out[base:base + rows],
            )
            u += g
    else:
        block = max(1, _TARGET_ELEMS // ev)
        for u in range(unit_lo, unit_hi):
            gen = streams.unit_stream(master_seed, u)
            done = 0
            while done < runs_per_unit:
                rows = min(block, runs_per_unit - done)
                U = gen.random((rows, ev))
                base = (u - unit_lo) * runs_per_unit + done
                _process_block(
                    U, u * runs_per_unit + done, n, c, c_prime, theta, address,
                    x_out[base:base + rows], y_out[base:base + rows],
                )
                done += rows
