"""Smoothing noise sources: random token deletion and the masking baseline."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .tokenization import TokenSeq

DEFAULT_MASK_TOKEN = "[MASK]"


class MechanismKind(str, Enum):
    DELETION = "deletion"
    MASKING = "masking"


@dataclass(frozen=True)
class MechanismParams:
    kind: MechanismKind
    rate: float
    mask_token: str = DEFAULT_MASK_TOKEN

    def __post_init__(self) -> None:
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError(f"rate must lie in [0, 1], got {self.rate}")


@dataclass(frozen=True)
class DeletionPattern:
    """Indicator vector over token positions; a set bit means delete."""

    indicators: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(b not in (0, 1) for b in self.indicators):
            raise ValueError("indicators must be 0/1")

    @property
    def n(self) -> int:
        return len(self.indicators)

    @property
    def num_deleted(self) -> int:
        return sum(self.indicators)


def sample_deletion_pattern(n: int, p_del: float, rng: np.random.Generator) -> DeletionPattern:
    """Draw each indicator independently with deletion probability ``p_del``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    bits = rng.random(n) < p_del
    return DeletionPattern(tuple(int(b) for b in bits))


def deletion_keep_matrix(
    n_samples: int, n: int, p_del: float, rng: np.random.Generator
) -> np.ndarray:
    """Batch sampler: row ``i`` is the keep-mask of draw ``i``.

    Consumes the stream in the same order as ``n_samples`` successive
    :func:`sample_deletion_pattern` calls, so the two paths produce
    bit-identical patterns (row = ~indicators).
    """
    return ~(rng.random((n_samples, n)) < p_del)


def pattern_probability(pattern: DeletionPattern, p_del: float) -> float:
    """Bernoulli product mass of the pattern; sums to one over all 2^n patterns."""
    k = pattern.num_deleted
    return p_del**k * (1.0 - p_del) ** (pattern.n - k)


def pattern_probability_exact(pattern: DeletionPattern, p_del: Fraction) -> Fraction:
    k = pattern.num_deleted
    return p_del**k * (1 - p_del) ** (pattern.n - k)


def apply_deletion(x: TokenSeq, pattern: DeletionPattern) -> TokenSeq:
    """Drop the flagged tokens, preserving the order of the rest."""
    if pattern.n != len(x):
        raise ValueError(f"pattern length {pattern.n} != sequence length {len(x)}")
    kept = tuple(tok for tok, bit in zip(x.tokens, pattern.indicators) if not bit)
    return x.replace_tokens(kept)


def sample_masking(
    x: TokenSeq,
    p_mask: float,
    mask_token: str = DEFAULT_MASK_TOKEN,
    rng: np.random.Generator | None = None,
) -> TokenSeq:
    """Replace a uniformly random subset of exactly round(p_mask * n)
    positions by ``mask_token``; the length is preserved.
    """
    if rng is None:
        raise ValueError("rng is required")
    if not 0.0 <= p_mask <= 1.0:
        raise ValueError(f"p_mask must lie in [0, 1], got {p_mask}")
    n = len(x)
    k = int(p_mask * n + 0.5)  # round half up, deterministically
    if k == 0:
        return x
    positions = set(rng.choice(n, size=k, replace=False).tolist())
    tokens = tuple(mask_token if i in positions else tok for i, tok in enumerate(x.tokens))
    return x.replace_tokens(tokens)


def perturb(x: TokenSeq, mech: MechanismParams, rng: np.random.Generator) -> TokenSeq:
    """One draw of the configured mechanism."""
    if mech.kind is MechanismKind.DELETION:
        return apply_deletion(x, sample_deletion_pattern(len(x), mech.rate, rng))
    return sample_masking(x, mech.rate, mech.mask_token, rng)
