"""Deterministic seed derivation.

Every run owns a single root seed; all randomness (data order, noise draws,
parameter init) is derived from it by hashing a purpose string, so stages can
be re-run bit-identically and adding a new consumer never shifts the streams
of existing ones.
"""

import hashlib

import numpy as np
import torch


def split_seed(root_seed: int, purpose: str) -> int:
    """Derive an independent 63-bit seed for `purpose` from the root seed."""
    digest = hashlib.sha256(f"{root_seed}:{purpose}".encode()).digest()
    return int.from_bytes(digest[:8], "little") & 0x7FFF_FFFF_FFFF_FFFF


def np_rng(root_seed: int, purpose: str) -> np.random.Generator:
    return np.random.default_rng(split_seed(root_seed, purpose))


def torch_generator(root_seed: int, purpose: str) -> torch.Generator:
    gen = torch.Generator()
    gen.manual_seed(split_seed(root_seed, purpose))
    return gen
