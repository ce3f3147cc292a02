"""Protocol simulation backends.

The compiled Cython core is preferred when its extension module is
importable; the numpy implementation in :mod:`.pure` is the fallback.
Both consume per-unit Philox streams in the same canonical order, so
given the same ``(master_seed, unit layout)`` they return bit-identical
results. ``NONLOCAL_LAB_BACKEND=pure|compiled`` forces a choice and
``NONLOCAL_LAB_THREADS`` caps the worker count of :func:`protocol_runs`.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import pure
from .pure import CYCLE, events_per_run

try:
    from . import _fastcore
except ImportError:  # extension not built; numpy fallback only
    _fastcore = None

HAVE_COMPILED = _fastcore is not None


def available_backends() -> tuple:
    return ("compiled", "pure") if HAVE_COMPILED else ("pure",)


def default_backend() -> str:
    name = os.environ.get("NONLOCAL_LAB_BACKEND")
    if name is None:
        return "compiled" if HAVE_COMPILED else "pure"
    return name


def _simulate_fn(backend):
    name = default_backend() if backend is None else backend
    if name == "compiled":
        if not HAVE_COMPILED:
            raise RuntimeError("compiled backend requested but extension is not built")
        return _fastcore.simulate_into
    if name in ("pure", "numpy"):
        return pure.simulate_into
    raise ValueError(f"unknown backend {name!r}")


def worker_count(units: int) -> int:
    cap = os.environ.get("NONLOCAL_LAB_THREADS")
    workers = os.cpu_count() or 1
    if cap is not None:
        workers = min(workers, max(1, int(cap)))
    return max(1, min(workers, units))


def protocol_runs(
    n: int,
    c: float,
    c_prime: float,
    theta: float,
    units: int,
    runs_per_unit: int,
    master_seed: int,
    address: int = CYCLE,
    unit_offset: int = 0,
    backend: str | None = None,
    threads: int | None = None,
):
    """Simulate ``units * runs_per_unit`` protocol runs.

    Returns uint8 arrays ``(x, y)``: per run, the source bit at the
    decoded address and the decoded bit. ``address >= 0`` fixes the
    decoded address; :data:`CYCLE` cycles it through all 2**n values by
    global run index. Output is a pure function of the arguments; the
    worker count only affects wall time.
    """
    if n < 1 or n > 24:
        raise ValueError(f"level count must be in [1, 24], got {n}")
    for name, v in (("c", c), ("c_prime", c_prime), ("theta", theta)):
        if not -1 <= v <= 1:
            raise ValueError(f"{name} must lie in [-1, 1], got {v}")
    m = 1 << n
    if not (address == CYCLE or 0 <= address < m):
        raise ValueError(f"address must be CYCLE or in [0, {m}), got {address}")
    if units < 1 or runs_per_unit < 1:
        raise ValueError("units and runs_per_unit must be >= 1")

    total = units * runs_per_unit
    x = np.empty(total, dtype=np.uint8)
    y = np.empty(total, dtype=np.uint8)
    sim = _simulate_fn(backend)
    workers = worker_count(units) if threads is None else max(1, min(threads, units))

    if workers == 1:
        sim(x, y, n, c, c_prime, theta, runs_per_unit, address,
            master_seed, unit_offset, unit_offset + units)
        return x, y

    chunk = (units + workers - 1) // workers
    def job(lo):
        hi = min(lo + chunk, units)
        base, stop = lo * runs_per_unit, hi * runs_per_unit
        sim(x[base:stop], y[base:stop], n, c, c_prime, theta, runs_per_unit,
            address, master_seed, unit_offset + lo, unit_offset + hi)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(job, range(0, units, chunk)))
    return x, y
