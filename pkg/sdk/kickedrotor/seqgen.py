"""
Kick-strength schedules: periodic, random and Fibonacci.

Letters are plain strings over {"A", "B"}; "A" selects kappa1 and "B"
selects kappa2. Every generator is a pure function of its parameters.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .config import DEFAULT_SEED

LETTERS = frozenset("AB")
KINDS = ("periodic", "random", "fibonacci")

_MASK64 = (1 << 64) - 1


class XorShift64Star:
    """
    xorshift64* generator, seeded through one splitmix64 round.

    Written out here so that a (seed, alpha, n) triple yields the same
    letters on every platform and in every language port.
    """

    def __init__(self, seed: int) -> None:
        z = (seed + 0x9E3779B97F4A7C15) & _MASK64
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        z ^= z >> 31
        self._state = z or 0x2545F4914F6CDD1D

    def next_u64(self) -> int:
        x = self._state
        x ^= x >> 12
        x ^= (x << 25) & _MASK64
        x ^= x >> 27
        self._state = x
        return (x * 0x2545F4914F6CDD1D) & _MASK64

    def uniform(self) -> float:
        """Double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))


def fibonacci_numbers(count: int) -> list[int]:
    """F_0..F_{count-1} with F_1 = F_2 = 1."""
    numbers = [0, 1]
    while len(numbers) < count:
        numbers.append(numbers[-1] + numbers[-2])
    return numbers[:count]


def _fibonacci_word(n: int) -> str:
    previous, current = "A", "B"
    while len(current) < n:
        previous, current = current, current + previous
    return current


def fibonacci_letters(n: int, reverse_blocks: bool = False) -> str:
    """
    First n letters of the Fibonacci word W_k = W_{k-1} + W_{k-2}, W_0 = "A", W_1 = "B".

    With reverse_blocks the shortest word covering n letters is read right
    to left (strict operator order of the product); that reading is not
    prefix stable.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    word = _fibonacci_word(n)
    if reverse_blocks:
        word = word[::-1]
    return word[:n]


def random_letters(n: int, alpha: float, seed: int = DEFAULT_SEED) -> str:
    """n i.i.d. letters, "A" with probability alpha."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    rng = XorShift64Star(seed)
    return "".join("A" if rng.uniform() < alpha else "B" for _ in range(n))


def periodic_letters(pattern: str, n: int) -> str:
    """pattern repeated cyclically and truncated to n."""
    if not pattern:
        raise ValueError("pattern must be nonempty")
    if not set(pattern) <= LETTERS:
        raise ValueError(f"pattern may only contain A and B, got {pattern!r}")
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    repeats = -(-n // len(pattern))
    return (pattern * repeats)[:n]


def letter_kappas(letters: str, kappa1: float, kappa2: float) -> np.ndarray:
    """Kick strength per letter: kappa1 for "A", kappa2 otherwise."""
    codes = np.frombuffer(letters.encode("ascii"), dtype=np.uint8)
    return np.where(codes == ord("A"), kappa1, kappa2).astype(float)


def letter_counts(letters: str) -> Tuple[int, int]:
    """(m1, m2): occurrences of "A" (kappa1) and "B" (kappa2)."""
    m1 = letters.count("A")
    return m1, len(letters) - m1


@dataclass(frozen=True)
class SequenceSpec:
    """How to generate letters; the config-file `sequence` section."""
    kind: str = "fibonacci"
    pattern: str = "AB"
    alpha: float = 0.5
    seed: int = DEFAULT_SEED
    reverse_blocks: bool = False

    def letters(self, n: int) -> str:
        if self.kind == "periodic":
            return periodic_letters(self.pattern, n)
        if self.kind == "random":
            return random_letters(n, self.alpha, self.seed)
        if self.kind == "fibonacci":
            return fibonacci_letters(n, self.reverse_blocks)
        raise ValueError(f"unknown sequence kind: {self.kind}")

    def label(self) -> str:
        if self.kind == "periodic":
            return f"periodic({self.pattern})"
        if self.kind == "random":
            return f"random(alpha={self.alpha},seed={self.seed})"
        return "fibonacci-reversed" if self.reverse_blocks else "fibonacci"


@dataclass(frozen=True)
class KickSequence:
    spec: SequenceSpec
    kappa1: float
    kappa2: float
    letters: str

    @property
    def length(self) -> int:
        return len(self.letters)

    def kappas(self) -> np.ndarray:
        """Kick strength of each step in time order."""
        return letter_kappas(self.letters, self.kappa1, self.kappa2)

    def counts(self) -> Tuple[int, int]:
        return letter_counts(self.letters)

    def negated(self) -> "KickSequence":
        return KickSequence(self.spec, -self.kappa1, -self.kappa2, self.letters)


def build_sequence(spec: SequenceSpec, kappa1: float, kappa2: float, length: int) -> KickSequence:
    letters = spec.letters(length) if length > 0 else ""
    return KickSequence(spec=spec, kappa1=kappa1, kappa2=kappa2, letters=letters)
