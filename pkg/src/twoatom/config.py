"""Model configurations for the two-atom emitter/absorber laboratory.

Two field variants are supported.  The default is a periodic 1-D box of
scalar modes with linear dispersion (omega = |k|, propagation speed 1 in
natural units), which is the setting for the frequency-cutoff and
perturbation studies.  A strictly local nearest-neighbour hopping chain is
available as an alternative field; its rigorous maximum signal speed
(2 * hopping) makes it the cleaner stage for front-detection experiments.

Both configs are frozen dataclasses, so they hash and compare by value and
can key caches.  All numbers are in natural units (hbar = c = 1 for the box
field; lattice spacing 1 for the chain).
"""

from __future__ import annotations

import dataclasses
import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

COUPLING_FORMS = ("full", "rotating_wave")


@dataclass(frozen=True)
class ModelConfig:
    """Two atoms coupled to a truncated boson field in a periodic box.

    Atom levels form a uniform ladder: level j of atom X carries energy
    j * omega_x, with level 0 the ground state.  Mode wavenumbers are
    k = 2*pi*n / box_length with n = 1, -1, 2, -2, ... (the first
    ``num_modes`` values); modes with |k| > cutoff are dropped.  The
    per-mode coupling is

        g_k = coupling_strength * sqrt(omega_k / box_length)
              * exp(-(omega_k / cutoff)**2)

    and each atom's vertex additionally carries its coupling_scale factor,
    which is the hook used to decouple one atom while leaving the field
    untouched.
    """

    levels_a: int = 2
    levels_b: int = 2
    omega_a: float = 1.0
    omega_b: float = 1.0
    x_a: float = 0.0
    x_b: float = math.pi
    box_length: float = 2.0 * math.pi
    num_modes: int = 32
    n_max: int = 2
    cutoff: float = 16.0
    coupling_strength: float = 0.2
    coupling_form: str = "full"
    coupling_scale_a: float = 1.0
    coupling_scale_b: float = 1.0

    def __post_init__(self):
        if self.levels_a < 2 or self.levels_b < 2:
            raise ConfigError("each atom needs at least 2 levels")
        if self.omega_a <= 0 or self.omega_b <= 0:
            raise ConfigError("atomic transition frequencies must be positive")
        if self.box_length <= 0:
            raise ConfigError("box_length must be positive")
        if not (0 <= self.x_a < self.box_length and 0 <= self.x_b < self.box_length):
            raise ConfigError("atom positions must lie in [0, box_length)")
        if self.x_a == self.x_b:
            raise ConfigError("atoms must be separated (x_a != x_b)")
        if self.num_modes < 1:
            raise ConfigError("num_modes must be at least 1")
        if self.n_max < 1:
            raise ConfigError("n_max must be at least 1")
        if self.cutoff <= 0:
            raise ConfigError("cutoff must be positive")
        if self.coupling_strength < 0:
            raise ConfigError("coupling_strength must be non-negative")
        if self.coupling_form not in COUPLING_FORMS:
            raise ConfigError(f"coupling_form must be one of {COUPLING_FORMS}")
        if self.coupling_scale_a < 0 or self.coupling_scale_b < 0:
            raise ConfigError("coupling scales must be non-negative")

    @property
    def separation(self) -> float:
        return abs(self.x_b - self.x_a)

    @property
    def light_cone_time(self) -> float:
        """Earliest classical signal arrival time (speed 1)."""
        return self.separation


@dataclass(frozen=True)
class LatticeConfig:
    """Two atoms side-coupled to single sites of a hopping chain.

    The field is an open chain of ``num_sites`` boson sites with on-site
    frequency ``site_frequency`` and nearest-neighbour hopping amplitude
    ``hopping``.  The one-boson band is site_frequency - 2*hopping*cos(k),
    so the maximum group velocity (and the rigorous signal speed for this
    strictly local model) is 2*hopping.  Tuning omega_a to the band centre
    makes the emitted packet travel at exactly that speed.
    """

    levels_a: int = 2
    levels_b: int = 2
    omega_a: float = 4.0
    omega_b: float = 4.0
    num_sites: int = 12
    hopping: float = 0.5
    site_frequency: float = 4.0
    site_a: int = 2
    site_b: int = 9
    n_max: int = 2
    coupling_strength: float = 0.15
    coupling_form: str = "full"
    coupling_scale_a: float = 1.0
    coupling_scale_b: float = 1.0

    def __post_init__(self):
        if self.levels_a < 2 or self.levels_b < 2:
            raise ConfigError("each atom needs at least 2 levels")
        if self.omega_a <= 0 or self.omega_b <= 0:
            raise ConfigError("atomic transition frequencies must be positive")
        if self.num_sites < 2:
            raise ConfigError("num_sites must be at least 2")
        if self.hopping <= 0:
            raise ConfigError("hopping must be positive")
        if self.site_frequency < 2 * self.hopping:
            # keeps the one-boson band non-negative so the bare vacuum is
            # the field ground state
            raise ConfigError("site_frequency must be at least 2*hopping")
        for name, site in (("site_a", self.site_a), ("site_b", self.site_b)):
            if not (0 <= site < self.num_sites):
                raise ConfigError(f"{name} must lie in [0, num_sites)")
        if self.site_a == self.site_b:
            raise ConfigError("atoms must sit on different sites")
        if self.n_max < 1:
            raise ConfigError("n_max must be at least 1")
        if self.coupling_strength < 0:
            raise ConfigError("coupling_strength must be non-negative")
        if self.coupling_form not in COUPLING_FORMS:
            raise ConfigError(f"coupling_form must be one of {COUPLING_FORMS}")
        if self.coupling_scale_a < 0 or self.coupling_scale_b < 0:
            raise ConfigError("coupling scales must be non-negative")

    @property
    def separation(self) -> float:
        return float(abs(self.site_b - self.site_a))

    @property
    def front_speed(self) -> float:
        return 2.0 * self.hopping

    @property
    def light_cone_time(self) -> float:
        """Earliest arrival allowed by the chain's maximum group velocity."""
        return self.separation / self.front_speed


AnyConfig = ModelConfig | LatticeConfig


@dataclass(frozen=True)
class ModeTable:
    """Retained field modes of a box config: wavenumber, frequency, coupling."""

    k: tuple[float, ...]
    omega: tuple[float, ...]
    g: tuple[float, ...]

    def __len__(self):
        return len(self.k)

    def as_arrays(self):
        return (np.asarray(self.k), np.asarray(self.omega), np.asarray(self.g))


def mode_table(config: ModelConfig) -> ModeTable:
    """Enumerate retained modes of a box config in deterministic order.

    Wavenumber index order is n = 1, -1, 2, -2, ...; modes with
    omega > cutoff are filtered out, which is how the cutoff constraint
    "cutoff >= every retained omega" is enforced.
    """
    ks, omegas, gs = [], [], []
    n = 0
    for i in range(config.num_modes):
        n = (i // 2) + 1
        sign = 1 if i % 2 == 0 else -1
        k = sign * 2.0 * math.pi * n / config.box_length
        omega = abs(k)
        if omega > config.cutoff:
            continue
        g = (
            config.coupling_strength
            * math.sqrt(omega / config.box_length)
            * math.exp(-((omega / config.cutoff) ** 2))
        )
        ks.append(k)
        omegas.append(omega)
        gs.append(g)
    return ModeTable(tuple(ks), tuple(omegas), tuple(gs))


def config_fingerprint(config: AnyConfig) -> str:
    """Stable sha256 over the config class name and field values."""
    lines = [type(config).__name__]
    for f in dataclasses.fields(config):
        lines.append(f"{f.name}={getattr(config, f.name)!r}")
    return hashlib.sha256("\n".join(lines).encode()).hexdigest()


def config_items(config: AnyConfig) -> dict:
    """Field name to value mapping, plus the variant tag, for manifests."""
    out = {"field_model": "lattice" if isinstance(config, LatticeConfig) else "continuum"}
    for f in dataclasses.fields(config):
        out[f.name] = getattr(config, f.name)
    return out
