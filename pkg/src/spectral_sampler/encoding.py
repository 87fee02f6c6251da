"""Input feature maps applied in front of the coordinate MLP."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

KINDS = ("identity", "sinusoidal", "gaussian-fourier")


@dataclass(frozen=True)
class EncodingSpec:
    """Description of a coordinate encoding.

    ``sinusoidal`` uses bands p = 0..degree (inclusive) per input axis and keeps
    the raw coordinates in front.  ``gaussian-fourier`` draws a fixed ``(features, input_dim)``
    frequency matrix with entries ~ N(0, sigma^2) from ``seed``.
    """

    kind: str = "sinusoidal"
    input_dim: int = 1
    degree: int = 5
    sigma: float = 10.0
    features: int = 256
    seed: int = 0
    _matrix: np.ndarray | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown encoding kind {self.kind!r}")
        if self.input_dim not in (1, 2, 3):
            raise ValueError("input_dim must be 1, 2 or 3")
        if self.kind == "sinusoidal" and self.degree < 0:
            raise ValueError("sinusoidal degree must be >= 0")
        if self.kind == "gaussian-fourier":
            if not self.sigma > 0:
                raise ValueError("gaussian-fourier sigma must be > 0")
            if self.features < 1:
                raise ValueError("gaussian-fourier needs at least one feature")
            rng = np.random.default_rng(self.seed)
            mat = rng.normal(0.0, self.sigma, size=(self.features, self.input_dim))
            mat.setflags(write=False)
            object.__setattr__(self, "_matrix", mat)

    @property
    def output_dim(self) -> int:
        if self.kind == "sinusoidal":
            return self.input_dim + 2 * self.input_dim * (self.degree + 1)
        if self.kind == "gaussian-fourier":
            return 2 * self.features
        return self.input_dim

    @property
    def frequency_matrix(self) -> np.ndarray:
        if self._matrix is None:
            raise AttributeError("only gaussian-fourier encodings carry a frequency matrix")
        return self._matrix

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "input_dim": self.input_dim}
        if self.kind == "sinusoidal":
            d["degree"] = self.degree
        elif self.kind == "gaussian-fourier":
            d.update(sigma=self.sigma, features=self.features, seed=self.seed)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EncodingSpec":
        return cls(**d)


def encode(spec: EncodingSpec, x) -> np.ndarray:
    """Map points of shape ``(n, input_dim)`` (or a single point) to features."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    if pts.shape[-1] != spec.input_dim:
        raise ValueError(f"expected {spec.input_dim}-d points, got shape {x.shape}")

    if spec.kind == "identity":
        out = pts.copy()
    elif spec.kind == "sinusoidal":
        blocks = [pts]
        for p in range(spec.degree + 1):
            arg = (2.0**p * np.pi) * pts
            blocks.append(np.sin(arg))
            blocks.append(np.cos(arg))
        out = np.concatenate(blocks, axis=1)
    else:
        proj = 2.0 * np.pi * pts @ spec.frequency_matrix.T
        out = np.concatenate([np.sin(proj), np.cos(proj)], axis=1)
    return out[0] if single else out


def highest_pe_frequency(degree: int) -> float:
    """Highest frequency (cycles per unit coordinate) carried by a degree-``degree`` PE."""
    if degree < 0:
        raise ValueError("degree must be >= 0")
    return 2.0 ** (degree - 1)
