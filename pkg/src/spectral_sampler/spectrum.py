"""Response spectra of randomized networks and the cut-off frequency derived from them.

Frequencies are in cycles per unit coordinate of the normalized [-1, 1] domain,
so an axis probe (segment length 2) has bin spacing 0.5.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .nn_core import Mlp, NetworkConfig, evaluate_batched, init_network

DEFAULT_TAU = 6e-4
DIRECTIONS = ("axis-x", "axis-y", "axis-z", "diagonal")


class DegenerateSignalError(ValueError):
    """The probed response is (numerically) constant, so it has no spectrum shape."""


class NoCutoffError(ValueError):
    """The fitted curve never gets steep enough to reach the threshold."""


@dataclass(frozen=True)
class Spectrum:
    frequencies: np.ndarray
    magnitudes: np.ndarray
    sample_count: int
    segment_length: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["frequency", "magnitude"])
        for f, m in zip(self.frequencies, self.magnitudes):
            w.writerow([repr(float(f)), repr(float(m))])
        return buf.getvalue()


@dataclass(frozen=True)
class IntrinsicSpectrum(Spectrum):
    members: tuple[Spectrum, ...] = ()

    @property
    def count(self) -> int:
        return len(self.members)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["frequency", "magnitude"] + [f"member_{i}" for i in range(self.count)])
        cols = [s.magnitudes for s in self.members]
        for k, (f, m) in enumerate(zip(self.frequencies, self.magnitudes)):
            w.writerow([repr(float(f)), repr(float(m))] + [repr(float(c[k])) for c in cols])
        return buf.getvalue()


@dataclass(frozen=True)
class SpectrumFit:
    a: float
    b: float
    residual: float
    converged: bool = True
    cutoff: float | None = None
    tau: float | None = None

    def curve(self, freqs):
        return self.a / (np.asarray(freqs, dtype=np.float64) ** 2 + self.b)

    def slope(self, freqs):
        f = np.asarray(freqs, dtype=np.float64)
        return -2.0 * self.a * f / (f**2 + self.b) ** 2

    def to_dict(self, dims: int | None = None) -> dict:
        d = {"a": self.a, "b": self.b, "residual": self.residual,
             "converged": self.converged, "F_c": self.cutoff, "tau": self.tau}
        if dims is not None and self.cutoff is not None:
            rate, mu = recommend_density(self.cutoff, dims)
            d.update(dims=dims, rate=rate, mu=mu)
        return d

    def to_json(self, dims: int | None = None) -> str:
        return json.dumps(self.to_dict(dims), indent=2)


def _direction_vector(dim: int, direction: str) -> np.ndarray:
    if direction == "diagonal":
        if dim == 1:
            raise ValueError("a diagonal probe needs at least two input dimensions")
        return np.ones(dim)
    axis = {"axis-x": 0, "axis-y": 1, "axis-z": 2}.get(direction)
    if axis is None:
        raise ValueError(f"unknown direction {direction!r}; expected one of {DIRECTIONS}")
    if axis >= dim:
        raise ValueError(f"{direction} does not exist in {dim}-d")
    v = np.zeros(dim)
    v[axis] = 1.0
    return v


def segment_length(dim: int, direction: str) -> float:
    return 2.0 * float(np.linalg.norm(_direction_vector(dim, direction)))


def sample_line(dim: int, direction: str, n: int) -> np.ndarray:
    """``n`` equidistant points from the domain corner/edge, right end excluded."""
    if n < 2:
        raise ValueError("need at least two probe points")
    v = _direction_vector(dim, direction)
    t = -1.0 + np.arange(n) * (2.0 / n)
    return t[:, None] * v[None, :]


def whiten(signal) -> np.ndarray:
    y = np.asarray(signal, dtype=np.float64)
    if y.size < 2:
        raise ValueError("need at least two samples to whiten")
    std = y.std()
    if std < 1e-12:
        raise DegenerateSignalError("constant network response (std < 1e-12)")
    return (y - y.mean()) / std


def fft_magnitude(signal, segment_length: float) -> Spectrum:
    """One-sided amplitude spectrum: DC and Nyquist bins divided by N, the rest by N/2."""
    y = np.asarray(signal, dtype=np.float64)
    n = y.size
    if n < 2:
        raise ValueError("need at least two samples")
    mag = np.abs(np.fft.rfft(y)) / n
    if n % 2 == 0:
        mag[1:-1] *= 2.0
    else:
        mag[1:] *= 2.0
    freqs = np.arange(mag.size) / segment_length
    return Spectrum(freqs, mag, n, float(segment_length))


def network_spectrum(mlp: Mlp, n: int = 8192, direction: str = "axis-x") -> Spectrum:
    dim = mlp.config.input_dim
    pts = sample_line(dim, direction, n)
    y = whiten(evaluate_batched(mlp, pts))
    return fft_magnitude(y, segment_length(dim, direction))


def _thread_count() -> int:
    env = os.environ.get("SPECTRAL_SAMPLER_THREADS")
    return max(1, int(env)) if env else 1


def intrinsic_spectrum(config: NetworkConfig, M: int = 5, n: int = 8192,
                       direction: str = "axis-x", jobs: int | None = None) -> IntrinsicSpectrum:
    """Mean one-sided spectrum of ``M`` networks seeded ``config.seed + 1 .. config.seed + M``."""
    if M < 1:
        raise ValueError("M must be >= 1")

    def member(i):
        return network_spectrum(init_network(config.with_seed(config.seed + i)), n, direction)

    jobs = jobs or _thread_count()
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            members = list(pool.map(member, range(1, M + 1)))
    else:
        members = [member(i) for i in range(1, M + 1)]
    mean = np.sum([s.magnitudes for s in members], axis=0) / M
    first = members[0]
    return IntrinsicSpectrum(first.frequencies, mean, first.sample_count,
                             first.segment_length, tuple(members))


def pairwise_cosine(spectra) -> np.ndarray:
    mags = np.array([s.magnitudes for s in spectra], dtype=np.float64)
    mags = mags / np.linalg.norm(mags, axis=1, keepdims=True)
    return mags @ mags.T


# ---------------------------------------------------------------------------
# curve fit  C(F) = a / (F^2 + b)


def _best_scale(basis, y):
    # optimal a for a fixed basis 1/(F^2 + b)
    return float(basis @ y / (basis @ basis))


def _gauss_newton(f2, y, a, b, max_iter=200, tol=1e-15):
    """Damped Gauss-Newton on (log a, log b); returns (a, b, converged)."""
    theta = np.array([math.log(a), math.log(b)])

    def resid(th):
        return np.exp(th[0]) / (f2 + np.exp(th[1])) - y

    r = resid(theta)
    cost = r @ r
    for _ in range(max_iter):
        ea, eb = np.exp(theta)
        denom = f2 + eb
        jac = np.column_stack([ea / denom, -ea * eb / denom**2])
        step, *_ = np.linalg.lstsq(jac, -r, rcond=None)
        lam = 1.0
        while lam > 1e-10:
            cand = theta + lam * step
            r_new = resid(cand)
            c_new = r_new @ r_new
            if np.isfinite(c_new) and c_new <= cost:
                break
            lam *= 0.5
        else:
            # no descent along the GN direction: stationary to working precision
            return float(np.exp(theta[0])), float(np.exp(theta[1])), True
        done = cost - c_new <= tol * max(cost, 1e-300) or np.max(np.abs(lam * step)) < 1e-14
        theta, r, cost = cand, r_new, c_new
        if done:
            return float(np.exp(theta[0])), float(np.exp(theta[1])), True
    return float(np.exp(theta[0])), float(np.exp(theta[1])), False


def fit_spectrum_curve(sp: Spectrum) -> SpectrumFit:
    """Least-squares fit of ``a / (F^2 + b)`` to the magnitudes at F > 0.

    A coarse logarithmic grid over b (with the optimal a for each b) seeds a
    Gauss-Newton refinement.  If refinement fails to improve on the grid the
    grid point is returned with ``converged=False``.
    """
    f = np.asarray(sp.frequencies, dtype=np.float64)
    y = np.asarray(sp.magnitudes, dtype=np.float64)
    keep = f > 0
    f, y = f[keep], y[keep]
    if f.size < 8:
        raise ValueError("need at least 8 positive-frequency bins to fit")
    f2 = f * f

    best = None
    for b in np.logspace(-4, 8, 241):
        basis = 1.0 / (f2 + b)
        a = _best_scale(basis, y)
        if a <= 0:
            continue
        r = a * basis - y
        cost = float(r @ r)
        if best is None or cost < best[0]:
            best = (cost, a, b)
    if best is None:
        # magnitudes orthogonal to every positive basis; fall back to a tiny flat curve
        return SpectrumFit(1e-300, 1.0, float(y @ y), converged=False)
    grid_cost, a0, b0 = best

    try:
        with np.errstate(all="ignore"):
            a, b, ok = _gauss_newton(f2, y, a0, b0)
        r = a / (f2 + b) - y
        cost = float(r @ r)
    except (np.linalg.LinAlgError, FloatingPointError):
        ok, cost = False, np.inf
    if not np.isfinite(cost) or cost > grid_cost:
        return SpectrumFit(a0, b0, grid_cost, converged=False)
    return SpectrumFit(a, b, cost, converged=ok)


def cutoff_frequency(fit: SpectrumFit, tau: float = DEFAULT_TAU, tol: float = 1e-6) -> float:
    """Smallest F on the decaying tail with |C'(F)| <= tau, by bracketing and bisection."""
    a, b = fit.a, fit.b
    if not (a > 0 and b > 0):
        raise ValueError("fit coefficients must be positive")

    def steep(F):
        return 2.0 * a * F / (F * F + b) ** 2

    peak = math.sqrt(b / 3.0)
    if steep(peak) < tau:
        raise NoCutoffError(f"max |C'| = {steep(peak):.3g} is below tau = {tau:.3g}")
    lo, hi = peak, max(2.0 * peak, 1.0)
    while steep(hi) > tau:
        lo, hi = hi, 2.0 * hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if steep(mid) > tau:
            lo = mid
        else:
            hi = mid
    return hi


def recommend_density(cutoff: float, dims: int) -> tuple[float, float]:
    """Per-axis Nyquist rate ``2 F_c`` and the volume density ``(2 F_c) ** dims``."""
    if not cutoff > 0:
        raise ValueError("cut-off frequency must be positive")
    if dims not in (1, 2, 3):
        raise ValueError("dims must be 1, 2 or 3")
    rate = 2.0 * cutoff
    return rate, rate**dims


def fit_with_cutoff(sp: Spectrum, tau: float = DEFAULT_TAU) -> SpectrumFit:
    fit = fit_spectrum_curve(sp)
    fc = cutoff_frequency(fit, tau)
    return SpectrumFit(fit.a, fit.b, fit.residual, fit.converged, fc, tau)


def probe_network(config: NetworkConfig, M: int = 5, n: int = 8192,
                  direction: str = "axis-x", tau: float = DEFAULT_TAU) -> tuple[IntrinsicSpectrum, SpectrumFit]:
    """Full probe: intrinsic spectrum, curve fit and cut-off."""
    sp = intrinsic_spectrum(config, M, n, direction)
    return sp, fit_with_cutoff(sp, tau)


def probe_trained_network(mlp: Mlp, n: int = 8192, direction: str = "axis-x",
                          tau: float = DEFAULT_TAU) -> SpectrumFit:
    return fit_with_cutoff(network_spectrum(mlp, n, direction), tau)
