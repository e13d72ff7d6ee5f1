"""Isotropic material table and the material-category substitution rule.

The three supported frame materials carry representative properties of
common bicycle tube alloys (heat-treated CrMo steel, 6061-T6 aluminum,
Ti-6Al-4V). Values are embedded as constants so that dataset output is
bit-reproducible; the only runtime override is the simulation config's
``modulus_scale`` hook (see :mod:`bikeframe.loadcases`).
"""

from __future__ import annotations

from dataclasses import dataclass

MATERIALS = ("Steel", "Aluminum", "Titanium")

# Raw categories accepted at the dataset boundary. Anisotropic and
# unspecified categories collapse onto aluminum before simulation.
RAW_CATEGORIES = ("Steel", "Aluminum", "Titanium", "Carbon", "Bamboo", "Other")


@dataclass(frozen=True)
class MaterialProperties:
    """Linear-elastic isotropic material data, SI units."""

    elastic_modulus: float  # Pa
    poisson_ratio: float
    shear_modulus: float  # Pa
    density: float  # kg/m^3
    tensile_strength: float  # Pa
    yield_strength: float  # Pa


_TABLE = {
    "Steel": MaterialProperties(
        elastic_modulus=205e9,
        poisson_ratio=0.285,
        shear_modulus=80e9,
        density=7850.0,
        tensile_strength=731e6,
        yield_strength=460e6,
    ),
    "Aluminum": MaterialProperties(
        elastic_modulus=69e9,
        poisson_ratio=0.330,
        shear_modulus=26e9,
        density=2700.0,
        tensile_strength=310e6,
        yield_strength=275e6,
    ),
    "Titanium": MaterialProperties(
        elastic_modulus=105e9,
        poisson_ratio=0.310,
        shear_modulus=41e9,
        density=4429.0,
        tensile_strength=1050e6,
        yield_strength=827e6,
    ),
}

_SUBSTITUTIONS = {
    "Steel": "Steel",
    "Aluminum": "Aluminum",
    "Titanium": "Titanium",
    "Carbon": "Aluminum",
    "Bamboo": "Aluminum",
    "Other": "Aluminum",
}


def lookup(material: str) -> MaterialProperties:
    """Return the property record for one of the three frame materials."""
    try:
        return _TABLE[material]
    except KeyError:
        raise KeyError(f"unknown material {material!r}; expected one of {MATERIALS}") from None


def substitute_category(raw: str) -> str:
    """Map a raw material category onto a simulatable isotropic one.

    Carbon, Bamboo, and Other become Aluminum; the three isotropic
    categories map to themselves. Idempotent on its image.
    """
    try:
        return _SUBSTITUTIONS[raw]
    except KeyError:
        raise KeyError(
            f"unknown material category {raw!r}; expected one of {RAW_CATEGORIES}"
        ) from None
