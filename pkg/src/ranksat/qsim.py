"""Exact simulation of the rank-phase circuit as an n-qubit product state.

The phase layer multiplies the |1> amplitude of qubit j by exp(-i*gamma*2**j)
and the mixer applies exp(-i*beta*X) per qubit. Neither couples qubits, so
the full 2**n state is always the tensor product of n amplitude pairs; this
keeps preparation and sampling exact and fast at any qubit count.

Bit order: qubit j carries rank weight 2**j and DIMACS variable j+1, so a
measured bitstring is simultaneously a rank's binary expansion and a truth
assignment.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "AngleVector",
    "QuantumState",
    "ShotSet",
    "rank_of",
    "bits_from_ranks",
    "assignment_from_rank",
    "prepare_state",
    "amplitude",
    "probability",
    "sample",
]

RANK_BIT_LIMIT = 62  # rank_of returns an exact Python int; numpy paths use int64

BETA_PERIOD = math.pi       # beta is periodic modulo pi up to measurement stats
GAMMA_PERIOD = 2 * math.pi


@dataclass(frozen=True)
class AngleVector:
    """Depth-p circuit parameters: one (beta, gamma) pair per layer."""

    betas: tuple[float, ...]
    gammas: tuple[float, ...]

    def __post_init__(self):
        if len(self.betas) != len(self.gammas):
            raise ValueError(
                f"betas and gammas must have equal length, got "
                f"{len(self.betas)} and {len(self.gammas)}"
            )
        if not self.betas:
            raise ValueError("depth must be >= 1")

    @property
    def depth(self) -> int:
        return len(self.betas)

    @classmethod
    def zeros(cls, depth: int) -> "AngleVector":
        return cls(betas=(0.0,) * depth, gammas=(0.0,) * depth)

    def to_json_obj(self) -> list[dict]:
        return [{"beta": b, "gamma": g} for b, g in zip(self.betas, self.gammas)]

    @classmethod
    def from_json_obj(cls, obj: Sequence[dict]) -> "AngleVector":
        return cls(
            betas=tuple(float(layer["beta"]) for layer in obj),
            gammas=tuple(float(layer["gamma"]) for layer in obj),
        )


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Product state: row j holds the (|0>, |1>) amplitude pair of qubit j."""

    amps: np.ndarray  # (n, 2) complex128

    @property
    def n(self) -> int:
        return self.amps.shape[0]

    def p_one(self) -> np.ndarray:
        """Per-qubit probability of measuring 1."""
        return np.abs(self.amps[:, 1]) ** 2


@dataclass(frozen=True, eq=False)
class ShotSet:
    """Measured bitstrings as an (s, n) 0/1 matrix, one row per shot."""

    bits: np.ndarray

    def __post_init__(self):
        if self.bits.ndim != 2:
            raise ValueError("shots must form an (s, n) matrix")

    @property
    def count(self) -> int:
        return self.bits.shape[0]

    @property
    def n(self) -> int:
        return self.bits.shape[1]


def rank_of(a: Sequence[int]) -> int:
    """Integer encoded by the bitstring: sum of bits[j] * 2**j."""
    if len(a) > RANK_BIT_LIMIT:
        raise ValueError(f"rank_of supports up to {RANK_BIT_LIMIT} bits, got {len(a)}")
    rank = 0
    for j, bit in enumerate(a):
        if bit not in (0, 1):
            raise ValueError(f"bit {j} is {bit!r}, expected 0 or 1")
        rank += int(bit) << j
    return rank


def bits_from_ranks(ranks: np.ndarray, n: int) -> np.ndarray:
    """Decode ranks into an (s, n) bit matrix; inverse of rank_of per row."""
    ranks = np.asarray(ranks, dtype=np.int64)
    return ((ranks[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(np.uint8)


def assignment_from_rank(rank: int, n: int) -> list[int]:
    return [(rank >> j) & 1 for j in range(n)]


def prepare_state(n: int, angles: AngleVector) -> QuantumState:
    """Run the depth-p circuit on |+>^n and return the exact product state.

    Per layer k and qubit j: the phase gate maps (a0, a1) to
    (a0, exp(-i*gamma_k*2**j)*a1), then the mixer applies
    [[cos b, -i sin b], [-i sin b, cos b]] with b = beta_k.
    """
    if n < 1:
        raise ValueError(f"qubit count must be >= 1, got {n}")
    amps = np.full((n, 2), 1.0 / math.sqrt(2.0), dtype=np.complex128)
    weights = 2.0 ** np.arange(n)
    for beta, gamma in zip(angles.betas, angles.gammas):
        amps[:, 1] *= np.exp(-1j * gamma * weights)
        c, s = math.cos(beta), math.sin(beta)
        a0 = c * amps[:, 0] - 1j * s * amps[:, 1]
        a1 = -1j * s * amps[:, 0] + c * amps[:, 1]
        amps = np.stack([a0, a1], axis=1)
    return QuantumState(amps=amps)


def amplitude(state: QuantumState, a: Sequence[int]) -> complex:
    """<x|state> for the basis state x given by the bitstring ``a``."""
    if len(a) != state.n:
        raise ValueError(f"assignment length {len(a)} != n={state.n}")
    idx = np.asarray(a, dtype=np.intp)
    return complex(np.prod(state.amps[np.arange(state.n), idx]))


def probability(state: QuantumState, a: Sequence[int]) -> float:
    """|<x|state>|**2, computed as the product of per-qubit probabilities."""
    if len(a) != state.n:
        raise ValueError(f"assignment length {len(a)} != n={state.n}")
    idx = np.asarray(a, dtype=np.intp)
    probs = np.abs(state.amps[np.arange(state.n), idx]) ** 2
    return float(np.prod(probs))


def sample(state: QuantumState, s: int, rng: np.random.Generator) -> ShotSet:
    """Draw s computational-basis shots.

    Because the state is a product state, measuring qubit j independently
    with probability |a_j1|**2 of reading 1 is distributionally identical to
    sampling the full 2**n vector. Deterministic for a given rng state.
    """
    if s < 1:
        raise ValueError(f"shot count must be >= 1, got {s}")
    p1 = state.p_one()
    bits = (rng.random((s, state.n)) < p1).astype(np.uint8)
    return ShotSet(bits=bits)
