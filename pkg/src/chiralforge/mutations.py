"""Deliberate defects used to show that the identity checks can fail.

A mutation is switched on with the :func:`mutate` context manager.  The
computational kernels consult :func:`active` and include the active set in
their memoisation keys, so mutated and clean results never mix.
"""
from __future__ import annotations

import contextlib
import contextvars
from typing import Iterator

EPLUS_SIGN = "eplus-sign"
SUGAWARA_SHIFT = "sugawara-shift"
CALPHA_OFFSET = "calpha-offset"
BINOMIAL_ORDER = "binomial-order"

KNOWN = (EPLUS_SIGN, SUGAWARA_SHIFT, CALPHA_OFFSET, BINOMIAL_ORDER)

_ACTIVE: contextvars.ContextVar[frozenset] = contextvars.ContextVar(
    "chiralforge_mutations", default=frozenset()
)


def active() -> frozenset:
    """The set of mutation names currently switched on."""
    return _ACTIVE.get()


def is_on(name: str) -> bool:
    return name in _ACTIVE.get()


@contextlib.contextmanager
def mutate(*names: str) -> Iterator[frozenset]:
    """Switch on the named mutations for the duration of the block."""
    unknown = [n for n in names if n not in KNOWN]
    if unknown:
        raise ValueError(f"unknown mutation(s) {unknown}; choose from {KNOWN}")
    token = _ACTIVE.set(_ACTIVE.get() | frozenset(names))
    try:
        yield _ACTIVE.get()
    finally:
        _ACTIVE.reset(token)
