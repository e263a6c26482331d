"""Target accelerator description: unit energies and array/cache geometry."""

import warnings
from dataclasses import dataclass
from fractions import Fraction

from .rationals import frac


@dataclass(frozen=True)
class HardwareConfig:
    """Unit costs of a systolic-array accelerator with a DRAM/cache/RF hierarchy.

    e_mac            energy of one multiply-accumulate
    e_dram/e_cache/e_rf   energy of one access at each memory level
    s_h, s_w         systolic array height and width (fold strides)
    k_w, k_x         cache capacities in elements, weight and input halves
    """

    e_mac: Fraction
    e_dram: Fraction
    e_cache: Fraction
    e_rf: Fraction
    s_h: int
    s_w: int
    k_w: int
    k_x: int

    def __post_init__(self):
        for name in ("e_mac", "e_dram", "e_cache", "e_rf"):
            value = frac(getattr(self, name))
            if value < 0:
                raise ValueError(f"{name} must be nonnegative, got {value}")
            object.__setattr__(self, name, value)
        for name in ("s_h", "s_w", "k_w", "k_x"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if not (self.e_dram >= self.e_cache >= self.e_rf):
            # Unusual but not invalid; real hierarchies get cheaper downward.
            warnings.warn(
                "memory unit energies are not ordered e_dram >= e_cache >= e_rf",
                stacklevel=2,
            )

    @classmethod
    def from_dict(cls, d: dict) -> "HardwareConfig":
        required = ("e_mac", "e_dram", "e_cache", "e_rf", "s_h", "s_w", "k_w", "k_x")
        missing = [k for k in required if k not in d]
        if missing:
            raise KeyError(f"hardware config missing field(s): {', '.join(missing)}")
        return cls(
            e_mac=frac(d["e_mac"]),
            e_dram=frac(d["e_dram"]),
            e_cache=frac(d["e_cache"]),
            e_rf=frac(d["e_rf"]),
            s_h=int(d["s_h"]),
            s_w=int(d["s_w"]),
            k_w=int(d["k_w"]),
            k_x=int(d["k_x"]),
        )

    def to_dict(self) -> dict:
        from .rationals import frac_str

        return {
            "e_mac": frac_str(self.e_mac),
            "e_dram": frac_str(self.e_dram),
            "e_cache": frac_str(self.e_cache),
            "e_rf": frac_str(self.e_rf),
            "s_h": self.s_h,
            "s_w": self.s_w,
            "k_w": self.k_w,
            "k_x": self.k_x,
        }


# Illustrative relative units only (RF access = 1); not measured silicon
# numbers.  Override via config for any real study.
DEFAULT_HW = HardwareConfig(
    e_mac=Fraction(1),
    e_dram=Fraction(200),
    e_cache=Fraction(6),
    e_rf=Fraction(1),
    s_h=16,
    s_w=16,
    k_w=4096,
    k_x=4096,
)
