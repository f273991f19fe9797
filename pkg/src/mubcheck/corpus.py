"""A fixed set of controlled families, complementary and not, for cross-checks."""

import numpy as np

from .families import ControlledFamily, make_family, perturb_family
from .gf import MUB_DIMENSIONS, mub_family
from .numerics import HADAMARD

PERTURBED = ((2, 0), (3, 1), (4, 2))


def zz_family() -> ControlledFamily:
    """The Z basis twice: the simplest non-complementary family."""
    return make_family(2, [np.eye(2), np.eye(2)])


def zx_family() -> ControlledFamily:
    return make_family(2, [np.eye(2), HADAMARD])


def corpus() -> dict:
    """Name -> family, in a fixed order."""
    out = {f"mub{n}": mub_family(n) for n in MUB_DIMENSIONS}
    out["zz"] = zz_family()
    out["zx"] = zx_family()
    for n, seed in PERTURBED:
        out[f"perturbed{n}_seed{seed}"] = perturb_family(mub_family(n), seed)
    return out


def expected_complementary(name: str) -> bool:
    return name.startswith("mub") or name == "zx"
