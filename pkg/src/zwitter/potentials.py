"""Closed-form potentials.

The Moyal potential term needs ``V`` at the off-lattice points ``z -+ r/2``,
so potentials are callables rather than sampled arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["Potential", "parse_potential"]

_PARAMS = {
    "free": (),
    "harmonic": ("omega",),
    "quartic": ("omega", "lambda"),
    "double_well": ("a", "b"),
    "gaussian_barrier": ("height", "width", "centers"),
}


@dataclass(frozen=True)
class Potential:
    """One of the supported closed forms.

    ``harmonic``          V = omega^2 z^2 / 2
    ``quartic``           V = omega^2 z^2 / 2 + lambda z^4
    ``double_well``       V = a z^4 - b z^2
    ``gaussian_barrier``  V = height * sum_c exp(-(z - c)^2 / (2 width^2))
    ``free``              V = 0
    """

    kind: str
    params: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in _PARAMS:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        names = _PARAMS[self.kind]
        if len(self.params) != len(names):
            raise ValueError(f"{self.kind} takes parameters {names}, got {self.params!r}")

    @classmethod
    def free(cls) -> "Potential":
        return cls("free", ())

    @classmethod
    def harmonic(cls, omega: float = 1.0) -> "Potential":
        return cls("harmonic", (float(omega),))

    @classmethod
    def quartic(cls, omega: float = 1.0, lam: float = 0.1) -> "Potential":
        return cls("quartic", (float(omega), float(lam)))

    @classmethod
    def double_well(cls, a: float = 1.0, b: float = 4.0) -> "Potential":
        return cls("double_well", (float(a), float(b)))

    @classmethod
    def gaussian_barrier(cls, height: float, width: float, centers=(0.0,)) -> "Potential":
        return cls("gaussian_barrier", (float(height), float(width), tuple(float(c) for c in centers)))

    @property
    def named_params(self) -> dict:
        return dict(zip(_PARAMS[self.kind], self.params))

    @property
    def confining(self) -> bool:
        if self.kind == "harmonic":
            return self.params[0] != 0
        if self.kind == "quartic":
            omega, lam = self.params
            return lam > 0 or (lam == 0 and omega != 0)
        if self.kind == "double_well":
            return self.params[0] > 0
        return False

    @property
    def is_quadratic(self) -> bool:
        """True when the Moyal and Liouville generators coincide."""
        if self.kind in ("free", "harmonic"):
            return True
        if self.kind == "quartic":
            return self.params[1] == 0
        if self.kind == "double_well":
            return self.params[0] == 0
        return False

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        kind, par = self.kind, self.params
        if kind == "free":
            return np.zeros_like(z)
        if kind == "harmonic":
            return 0.5 * par[0] ** 2 * z * z
        if kind == "quartic":
            z2 = z * z
            return 0.5 * par[0] ** 2 * z2 + par[1] * z2 * z2
        if kind == "double_well":
            z2 = z * z
            return par[0] * z2 * z2 - par[1] * z2
        height, width, centers = par
        return height * sum(np.exp(-((z - c) ** 2) / (2 * width ** 2)) for c in centers)

    def derivative(self, z):
        z = np.asarray(z, dtype=float)
        kind, par = self.kind, self.params
        if kind == "free":
            return np.zeros_like(z)
        if kind == "harmonic":
            return par[0] ** 2 * z
        if kind == "quartic":
            return par[0] ** 2 * z + 4 * par[1] * z ** 3
        if kind == "double_well":
            return 4 * par[0] * z ** 3 - 2 * par[1] * z
        height, width, centers = par
        return -height * sum((z - c) / width ** 2 * np.exp(-((z - c) ** 2) / (2 * width ** 2))
                             for c in centers)

    def to_text(self, style: str = "cli") -> str:
        """``quartic:omega=1,lambda=0.1`` (cli) or ``quartic 1 0.1`` (expr)."""
        named = self.named_params
        if style == "expr":
            flat = []
            for v in self.params:
                flat.extend(v if isinstance(v, tuple) else (v,))
            return " ".join([self.kind, *map(repr, flat)])
        parts = []
        for k, v in named.items():
            parts.append(f"{k}={':'.join(map(repr, v))}" if isinstance(v, tuple) else f"{k}={v!r}")
        return self.kind + (":" + ",".join(parts) if parts else "")


_DEFAULTS = {
    "harmonic": {"omega": 1.0},
    "quartic": {"omega": 1.0, "lambda": 0.1},
    "double_well": {"a": 1.0, "b": 4.0},
    "gaussian_barrier": {"height": 1.0, "width": 0.5, "centers": (0.0,)},
}


def parse_potential(text: str) -> Potential:
    """Parse ``kind[:key=value,...]`` or the space-separated ``kind v1 v2 ...``.

    Barrier centres are colon separated in the keyed form (``centers=-1:1``).
    """
    text = text.strip()
    if " " in text and ":" not in text:
        kind, *vals = text.split()
        if kind == "gaussian_barrier":
            height, width, *centers = map(float, vals)
            return Potential.gaussian_barrier(height, width, centers or (0.0,))
        return Potential(kind, tuple(float(v) for v in vals))
    kind, _, rest = text.partition(":")
    kind = kind.strip()
    if kind not in _PARAMS:
        raise ValueError(f"unknown potential kind {kind!r}")
    values = dict(_DEFAULTS.get(kind, {}))
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, sep, val = item.partition("=")
        key = "lambda" if key.strip() in ("lam", "lambda") else key.strip()
        if not sep or key not in _PARAMS[kind]:
            raise ValueError(f"bad parameter {item!r} for {kind}")
        values[key] = tuple(float(c) for c in val.split(":")) if key == "centers" else float(val)
    return Potential(kind, tuple(values[k] for k in _PARAMS[kind]))


def max_phase_rate(potential: Potential, z: np.ndarray, r: np.ndarray, gamma: float,
                   hbar: float, z_limit: float) -> float:
    """Largest |Phi_gamma(z, r)| over lattice points whose shifted arguments stay in the box."""
    zz, rr = np.meshgrid(z, r, indexing="ij")
    inside = (np.abs(zz - rr / 2) <= z_limit) & (np.abs(zz + rr / 2) <= z_limit)
    c2, s2 = math.cos(gamma) ** 2, math.sin(gamma) ** 2
    phi = (c2 * (potential(zz - rr / 2) - potential(zz + rr / 2))
           - s2 * potential.derivative(zz) * rr) / hbar
    return float(np.max(np.abs(phi[inside]), initial=0.0))
