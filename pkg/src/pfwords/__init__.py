"""Permute-and-flip privatization of words and Markov-chain trajectories."""

from .distribution import (
    ClassDistribution,
    em_class_distribution,
    expected_error,
    pf_class_distribution,
    phi,
    sample_class,
)
from .spectrum import DistanceSpectrum, binomial, class_count, full_spectrum, log_count
from .words import Alphabet, PrivacyParams, Word, hamming_distance, is_adjacent, utility

__version__ = "0.1.0"
