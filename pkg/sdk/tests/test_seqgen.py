"""Tests for kick-strength schedules."""
import numpy as np
import pytest
from kickedrotor.seqgen import (
    KickSequence,
    SequenceSpec,
    XorShift64Star,
    build_sequence,
    fibonacci_letters,
    fibonacci_numbers,
    letter_counts,
    letter_kappas,
    periodic_letters,
    random_letters,
)


class TestFibonacci:
    """Tests for the Fibonacci word."""

    def test_first_eight_letters(self):
        assert fibonacci_letters(8) == "BABBABAB"
        assert letter_counts("BABBABAB") == (3, 5)

    def test_counts_at_fibonacci_length(self):
        assert letter_counts(fibonacci_letters(987)) == (377, 610)

    def test_prefix_stable(self):
        assert fibonacci_letters(4181)[:1000] == fibonacci_letters(1000)

    def test_reverse_blocks(self):
        assert fibonacci_letters(8, reverse_blocks=True) == "BABABBAB"

    def test_numbers(self):
        assert fibonacci_numbers(10) == [0, 1, 1, 2, 3, 5, 8, 13, 21, 34]
        assert fibonacci_numbers(17)[-1] == 987

    def test_rejects_empty(self):
        with pytest.raises(ValueError, match="n must be"):
            fibonacci_letters(0)


class TestRandom:
    """Tests for seeded random letters."""

    def test_reproducible(self):
        assert random_letters(500, 0.5, seed=7) == random_letters(500, 0.5, seed=7)
        assert random_letters(500, 0.5, seed=7) != random_letters(500, 0.5, seed=8)

    def test_extreme_alpha(self):
        assert random_letters(50, 1.0) == "A" * 50
        assert random_letters(50, 0.0) == "B" * 50

    def test_frequency(self):
        m1, _ = letter_counts(random_letters(20000, 0.3, seed=1))
        assert abs(m1 / 20000 - 0.3) < 0.02

    def test_rejects_alpha(self):
        with pytest.raises(ValueError, match="alpha"):
            random_letters(10, 1.5)

    def test_uniform_range(self):
        rng = XorShift64Star(123)
        draws = [rng.uniform() for _ in range(1000)]
        assert all(0.0 <= d < 1.0 for d in draws)

    def test_generator_sequence(self):
        a, b = XorShift64Star(0), XorShift64Star(0)
        assert [a.next_u64() for _ in range(5)] == [b.next_u64() for _ in range(5)]


class TestPeriodic:
    """Tests for periodic patterns."""

    def test_truncates(self):
        assert periodic_letters("AB", 5) == "ABABA"
        assert periodic_letters("AAB", 0) == ""

    def test_rejects_bad_pattern(self):
        with pytest.raises(ValueError, match="pattern"):
            periodic_letters("AC", 4)
        with pytest.raises(ValueError, match="nonempty"):
            periodic_letters("", 4)


class TestKickSequence:
    """Tests for sequence assembly."""

    def test_kappas(self):
        sequence = build_sequence(SequenceSpec("periodic", pattern="AB"), 5.0, 10.0, 4)
        np.testing.assert_array_equal(sequence.kappas(), [5.0, 10.0, 5.0, 10.0])
        assert sequence.length == 4
        assert sequence.counts() == (2, 2)

    def test_letter_kappas(self):
        np.testing.assert_array_equal(letter_kappas("ABBA", 0.5, 0.8), [0.5, 0.8, 0.8, 0.5])
        assert letter_kappas("", 0.5, 0.8).size == 0
        sequence = build_sequence(SequenceSpec("random", seed=4), 5.0, 10.0, 64)
        np.testing.assert_array_equal(sequence.kappas(), letter_kappas(sequence.letters, 5.0, 10.0))

    def test_negated(self):
        sequence = build_sequence(SequenceSpec(), 5.0, 10.0, 8)
        negated = sequence.negated()
        assert isinstance(negated, KickSequence)
        np.testing.assert_array_equal(negated.kappas(), -sequence.kappas())

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="unknown sequence kind"):
            SequenceSpec("quasi").letters(4)

    def test_labels(self):
        assert SequenceSpec("fibonacci").label() == "fibonacci"
        assert SequenceSpec("fibonacci", reverse_blocks=True).label() == "fibonacci-reversed"
        assert SequenceSpec("periodic", pattern="AAB").label() == "periodic(AAB)"
