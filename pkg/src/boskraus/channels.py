"""Canonical single-mode Gaussian channel labels.

The canonical families and their gain/noise parameters:

=========  =======================  ===========================
family     gain constraint          quantum-limited noise y0
=========  =======================  ===========================
``D``      kappa > 0                1 + kappa^2
``C1``     0 <= kappa <= 1          1 - kappa^2
``C2``     kappa >= 1               kappa^2 - 1
``A1``     (none)                   1
``A2``     (none)                   1
``B1``     (none)                   0
``B2``     (none)                   0
``I``      (identity)               0
=========  =======================  ===========================

``noise_a`` is the classical noise injected on top of the quantum limit;
``noise_a == 0`` marks a quantum-limited channel.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidParameter, UnsupportedFamily

FAMILIES = ("D", "C1", "C2", "A1", "A2", "B1", "B2", "I")

_KAPPA_FAMILIES = ("D", "C1", "C2")


@dataclass(frozen=True)
class ChannelSpec:
    """Family tag plus gain ``kappa`` and classical noise ``noise_a``."""

    family: str
    kappa: float | None = None
    noise_a: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidParameter(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.family in _KAPPA_FAMILIES:
            if self.kappa is None:
                raise InvalidParameter(f"family {self.family} requires kappa")
            k = float(self.kappa)
            if self.family == "D" and not k > 0:
                raise InvalidParameter(f"D requires kappa > 0, got {k}")
            if self.family == "C1" and not 0.0 <= k <= 1.0:
                raise InvalidParameter(f"C1 requires 0 <= kappa <= 1, got {k}")
            if self.family == "C2" and not k >= 1.0:
                raise InvalidParameter(f"C2 requires kappa >= 1, got {k}")
            object.__setattr__(self, "kappa", k)
        else:
            if self.kappa is not None:
                raise InvalidParameter(f"family {self.family} takes no kappa")
        if self.noise_a < 0:
            raise InvalidParameter(f"noise_a must be nonnegative, got {self.noise_a}")
        object.__setattr__(self, "noise_a", float(self.noise_a))

    @property
    def quantum_limited(self) -> bool:
        return self.noise_a == 0.0

    def quantum_limited_noise(self) -> float:
        """The threshold noise coefficient y0 forced by complete positivity."""
        if self.family == "D":
            return 1.0 + self.kappa**2
        if self.family == "C1":
            return 1.0 - self.kappa**2
        if self.family == "C2":
            return self.kappa**2 - 1.0
        if self.family in ("A1", "A2"):
            return 1.0
        return 0.0  # B1, B2, I

    def normalized(self, tol: float = 1e-12) -> "ChannelSpec":
        """Collapse boundary gains onto their canonical family tags.

        ``C1(0) -> A1``, ``C1(1)/C2(1) -> B2`` (or the identity when the
        noise also vanishes).  Used so classification and table lookups
        agree on boundary cases.
        """
        fam, kappa, a = self.family, self.kappa, self.noise_a
        if fam in ("C1", "C2"):
            if abs(kappa - 1.0) <= tol:
                fam, kappa = ("I", None) if a <= tol else ("B2", None)
                a = 0.0 if fam == "I" else a
            elif fam == "C1" and kappa <= tol:
                fam, kappa = "A1", None
        if fam in ("B1", "B2") and a <= tol:
            fam, a = "I", 0.0
        return ChannelSpec(fam, kappa, a)

    def __str__(self) -> str:
        if self.kappa is None:
            return f"{self.family}({self.noise_a:g})" if self.noise_a else self.family
        return f"{self.family}({self.kappa:g}; {self.noise_a:g})"

    def to_json_dict(self) -> dict:
        return {"family": self.family, "kappa": self.kappa, "a": self.noise_a}

    @staticmethod
    def from_json_dict(data: dict) -> "ChannelSpec":
        return ChannelSpec(data["family"], data.get("kappa"), data.get("a", 0.0))


def parse_channel(text: str) -> ChannelSpec:
    """Parse ``FAMILY[:kappa[:a]]``, e.g. ``C1:0.7`` or ``D:0.8:1.5``."""
    parts = text.split(":")
    family = parts[0]
    if family not in FAMILIES:
        raise InvalidParameter(f"unknown family {family!r} in {text!r}")
    kappa = float(parts[1]) if len(parts) > 1 and parts[1] != "" else None
    noise = float(parts[2]) if len(parts) > 2 else 0.0
    if family in _KAPPA_FAMILIES and kappa is None:
        raise UnsupportedFamily(f"family {family} needs a kappa, e.g. {family}:0.7")
    if family not in _KAPPA_FAMILIES and kappa is not None:
        # allow B2:1.5 style shorthand meaning noise, not kappa
        noise, kappa = kappa, None
    return ChannelSpec(family, kappa, noise)
