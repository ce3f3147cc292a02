"""The van Dam oblivious-transfer protocol over a tree of box pairs.

Alice wires 2**n - 1 box pairs bottom-up: level k holds 2**(n-k) boxes,
box j of level 1 consumes source bits (2j, 2j+1), and each higher box
consumes the outputs of its two children through

    f(q1, q2) = q1 xor A(q1 xor q2)

where A(a) is the Alice-side output of the box queried with a. The
single level-n output crosses the classical link (n concatenated
symmetric channels of correlation c'). Bob walks one root-to-leaf path
fixed by the binary address, inserting address bit k-1 at level k, and
XORs his n box outputs into the received bit.

Indexing convention (certified by the exhaustive c=1 oracle): the path
column is 0 at level n and doubles plus the inserted address bit on
each descent, so with perfect boxes and link the decoded bit equals the
addressed source bit for every input vector.

Boxes are one-shot: each run builds a fresh tree, and all-addresses
mode resamples source bits and boxes per address. A single run is
sequential; distinct runs may execute concurrently on independent
generators.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from . import kernels
from .channel import BernoulliSource, SymmetricBinaryChannel, transmit
from .exact import enumerate_exact  # noqa: F401  (re-export: exact oracle for n <= 3)
from .kernels import CYCLE
from .nsbox import NSBoxPair, make_isotropic_box, sample_alice, sample_bob_given


@dataclass(frozen=True)
class VanDamConfig:
    """Protocol size and resource correlations.

    ``n`` levels use 2**n source bits and 2**n - 1 box pairs of CHSH
    correlation ``c``; the classical link carries total correlation
    ``c_prime ** n`` realized as n concatenated channels.
    """

    n: int
    c: float
    c_prime: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"level count must be >= 1, got {self.n}")
        if not -1 <= self.c <= 1:
            raise ValueError(f"c must lie in [-1, 1], got {self.c}")
        if not -1 <= self.c_prime <= 1:
            raise ValueError(f"c_prime must lie in [-1, 1], got {self.c_prime}")

    @property
    def m(self) -> int:
        return 1 << self.n

    @property
    def box_count(self) -> int:
        return (1 << self.n) - 1


@dataclass(frozen=True)
class Address:
    """Bit address i of one of the 2**n source positions."""

    i: int
    n: int

    def __post_init__(self):
        if not 0 <= self.i < (1 << self.n):
            raise ValueError(
                f"address {self.i} out of range for {1 << self.n} bits"
            )

    def bit(self, k: int) -> int:
        return (self.i >> k) & 1

    @property
    def bits(self) -> tuple:
        """(i_{n-1}, ..., i_0), most significant first."""
        return tuple(self.bit(k) for k in range(self.n - 1, -1, -1))


class BoxInstance:
    """One single-use box pair: Alice queries first, Bob conditions on it."""

    __slots__ = ("pair", "_a", "_A", "_bob_done")

    def __init__(self, pair: NSBoxPair):
        self.pair = pair
        self._a = None
        self._A = None
        self._bob_done = False

    @property
    def alice_input(self):
        return self._a

    @property
    def alice_output(self):
        return self._A

    def alice_query(self, a: int, rng: np.random.Generator) -> int:
        if self._a is not None:
            raise RuntimeError("box already queried on Alice's side")
        self._a = a
        self._A = sample_alice(self.pair, a, rng)
        return self._A

    def bob_query(self, b: int, rng: np.random.Generator) -> int:
        if self._a is None:
            raise RuntimeError("Bob queried a box Alice has not used")
        if self._bob_done:
            raise RuntimeError("box already queried on Bob's side")
        self._bob_done = True
        return sample_bob_given(self.pair, self._a, self._A, b, rng)


class BoxTree:
    """Fresh tree of independent box instances for one protocol run.

    ``level(k)`` holds the 2**(n-k) instances of level k, k = 1..n.
    """

    def __init__(self, n: int, pair: NSBoxPair):
        self.n = n
        self.pair = pair
        self._levels = {
            k: [BoxInstance(pair) for _ in range(1 << (n - k))]
            for k in range(1, n + 1)
        }

    @classmethod
    def isotropic(cls, cfg: VanDamConfig) -> "BoxTree":
        return cls(cfg.n, make_isotropic_box(cfg.c))

    def level(self, k: int):
        return self._levels[k]

    def box(self, k: int, j: int) -> BoxInstance:
        return self._levels[k][j]


def path_column(address: int, n: int, k: int) -> int:
    """0-based column of the path box at level k for the given address."""
    col = 0
    for lvl in range(n, k, -1):
        col = 2 * col + ((address >> (lvl - 1)) & 1)
    return col


def alice_encode(bits: Sequence[int], tree: BoxTree, rng: np.random.Generator) -> int:
    """Wire the source bits through Alice's side; returns the wire bit."""
    n = tree.n
    if len(bits) != (1 << n):
        raise ValueError(f"expected {1 << n} bits, got {len(bits)}")
    vals = list(bits)
    for v in vals:
        if v not in (0, 1):
            raise ValueError(f"source bits must be 0/1, got {v!r}")
    for k in range(1, n + 1):
        nxt = []
        for j in range(1 << (n - k)):
            q1, q2 = vals[2 * j], vals[2 * j + 1]
            a = tree.box(k, j).alice_query(q1 ^ q2, rng)
            nxt.append(q1 ^ a)
        vals = nxt
    return vals[0]


def bob_decode(
    z: int, addr: Union[Address, int], tree: BoxTree, rng: np.random.Generator
) -> int:
    """Decode the addressed bit from the received bit and path boxes."""
    n = tree.n
    address = addr.i if isinstance(addr, Address) else Address(int(addr), n).i
    y = z
    col = 0
    for k in range(n, 0, -1):
        b = (address >> (k - 1)) & 1
        y ^= tree.box(k, col).bob_query(b, rng)
        if k > 1:
            col = 2 * col + b
    return y


@dataclass(frozen=True)
class ProtocolTranscript:
    """Flat record of one protocol run."""

    n: int
    c: float
    c_prime: float
    address: int
    alice_bits: tuple
    wire_bit: int
    received_bit: int
    decoded: int

    @property
    def target_bit(self) -> int:
        return self.alice_bits[self.address]

    @property
    def correct(self) -> bool:
        return self.decoded == self.target_bit

    def to_record(self) -> dict:
        return {
            "n": self.n,
            "c": self.c,
            "c_prime": self.c_prime,
            "address": self.address,
            "x_bits": list(self.alice_bits),
            "wire_bit": self.wire_bit,
            "received_bit": self.received_bit,
            "decoded": self.decoded,
        }

    @staticmethod
    def from_record(rec: dict) -> "ProtocolTranscript":
        return ProtocolTranscript(
            n=rec["n"], c=rec["c"], c_prime=rec["c_prime"],
            address=rec["address"], alice_bits=tuple(rec["x_bits"]),
            wire_bit=rec["wire_bit"], received_bit=rec["received_bit"],
            decoded=rec["decoded"],
        )


def run_protocol(
    cfg: VanDamConfig,
    src: BernoulliSource,
    addr: Union[Address, int, str],
    rng: np.random.Generator,
    bits: Optional[Sequence[int]] = None,
):
    """Execute one full run, or all 2**n addresses with fresh resources.

    ``addr="all"`` repeats the protocol once per address, resampling
    source bits and boxes each time, and returns the transcript list.
    ``bits`` overrides source sampling (used by oracles).
    """
    if isinstance(addr, str):
        if addr != "all":
            raise ValueError(f"address must be an index or 'all', got {addr!r}")
        return [
            run_protocol(cfg, src, i, rng, bits=bits) for i in range(cfg.m)
        ]
    address = addr if isinstance(addr, Address) else Address(int(addr), cfg.n)
    if bits is None:
        signs = np.where(rng.random(cfg.m) < src.p_minus, -1, 1)
        run_bits = tuple(int(s == -1) for s in signs)
    else:
        run_bits = tuple(int(b) for b in bits)
    tree = BoxTree.isotropic(cfg)
    wire = alice_encode(run_bits, tree, rng)
    link = SymmetricBinaryChannel(cfg.c_prime)
    sign = 1 - 2 * wire
    for _ in range(cfg.n):
        sign = transmit(link, sign, rng)
    received = (1 - sign) // 2
    decoded = bob_decode(received, address, tree, rng)
    return ProtocolTranscript(
        n=cfg.n, c=cfg.c, c_prime=cfg.c_prime, address=address.i,
        alice_bits=run_bits, wire_bit=wire, received_bit=received,
        decoded=decoded,
    )


def pr_decode_exhaustive(n: int, rng: np.random.Generator):
    """Exhaustive decode check with perfect boxes and link.

    Runs every input vector crossed with every address once (box
    outputs stay random) and returns ``(cases, mismatches)``. With c=1
    the decoded bit must equal the addressed bit in all cases; this
    pins down the path-indexing convention.
    """
    m = 1 << n
    vectors = 1 << m
    shifts = np.arange(m, dtype=np.uint32)
    bits = ((np.arange(vectors, dtype=np.uint32)[:, None] >> shifts) & 1).astype(np.uint8)
    tail = kernels.events_per_run(n) - m  # box, flip and error draws
    mismatches = 0
    for address in range(m):
        U = rng.random((vectors, tail))
        addrs = np.full(vectors, address, dtype=np.int64)
        y = pure_decode(U, bits, addrs, n)
        mismatches += int(np.count_nonzero(y != bits[:, address]))
    return vectors * m, mismatches


def pure_decode(U, bits, addrs, n, c: float = 1.0, c_prime: float = 1.0):
    """Vectorized decode of given source-bit rows (thin kernel wrapper)."""
    from .kernels import pure

    return pure.decode_rows(U, 0, bits, addrs, n, c, c_prime)


def protocol_agreement(
    cfg: VanDamConfig,
    theta: float,
    n_runs: int,
    master_seed: int,
    address: int = CYCLE,
    unit_offset: int = 0,
    backend: Optional[str] = None,
):
    """Batch-simulate independent runs; returns (x_bits, y_bits) arrays.

    One work unit per run; ``address=CYCLE`` cycles the decoded address
    with the run index.
    """
    return kernels.protocol_runs(
        cfg.n, cfg.c, cfg.c_prime, theta,
        units=n_runs, runs_per_unit=1, master_seed=master_seed,
        address=address, unit_offset=unit_offset, backend=backend,
    )


def sample_decoded_sets(
    cfg: VanDamConfig,
    theta: float,
    n_sets: int,
    master_seed: int,
    unit_offset: int = 0,
    backend: Optional[str] = None,
):
    """All-addresses sample sets: one set of 2**n decoded signs per unit.

    Each set repeats the protocol once per address with fresh bits and
    boxes. Returns int8 arrays ``(x_signs, y_signs)`` of shape
    ``(n_sets, 2**n)`` in +-1 view (bit 0 -> +1).
    """
    x, y = kernels.protocol_runs(
        cfg.n, cfg.c, cfg.c_prime, theta,
        units=n_sets, runs_per_unit=cfg.m, master_seed=master_seed,
        address=CYCLE, unit_offset=unit_offset, backend=backend,
    )
    x_signs = (1 - 2 * x.astype(np.int8)).reshape(n_sets, cfg.m)
    y_signs = (1 - 2 * y.astype(np.int8)).reshape(n_sets, cfg.m)
    return x_signs, y_signs
