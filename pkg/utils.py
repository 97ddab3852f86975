"""
utils.py — Seeding utilities for the SBTS simulator

Includes:
- SplitMix64 mixing of 64-bit seeds
- Per-run seed derivation from (master seed, iteration, student)
- Random stream construction (numpy PCG64)
"""

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF


def mix64(z: int) -> int:
    """
    SplitMix64 finaliser over unsigned 64-bit arithmetic.

    Args:
        z (int): Any integer; reduced modulo 2^64 first.

    Returns:
        int: Mixed value in [0, 2^64).
    """
    z = (z + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_run_seed(master_seed: int, iteration: int, student: int) -> int:
    """
    Seed of one student run: mix(mix(mix(master) ^ iteration) ^ student).

    The derivation depends only on the indices, never on execution order, so
    runs can be distributed over any number of workers.
    """
    if iteration < 0 or student < 0:
        raise ValueError("iteration and student indices must be non-negative")
    return mix64(mix64(mix64(master_seed & MASK64) ^ iteration) ^ student)


def make_generator(seed: int) -> np.random.Generator:
    """Random stream for one run: a numpy Generator over PCG64."""
    return np.random.Generator(np.random.PCG64(seed & MASK64))
