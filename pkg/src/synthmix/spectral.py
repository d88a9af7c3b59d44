"""Radially averaged power spectra of images and the plug-in ratio planner.

Pipeline: each image's 2-D discrete Fourier power spectrum is averaged
over integer-radius annuli in frequency space, giving a 1-D profile
Q(omega).  The Euclidean distance between mean profiles of two image
sets serves as a distributional-distance proxy, and the log-log slope
of Q estimates the kernel eigendecay exponent (Q ~ omega^(-2r)), which
together feed the ratio planner.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .bounds import (
    KernelBoundInputs,
    RatioPlan,
    UnboundedRegularization,
    lambda_star_numeric,
)

__all__ = [
    "ImageMatrix",
    "RapsdProfile",
    "DecayFit",
    "power_spectrum",
    "rapsd",
    "mean_rapsd",
    "spectral_distance",
    "fit_decay_exponent",
    "plan_from_images",
    "load_image",
    "load_image_dir",
]

MIN_SIDE = 8
MIN_FIT_BINS = 4


@dataclass(frozen=True)
class ImageMatrix:
    """A 2-D intensity matrix with a source label."""

    pixels: np.ndarray
    id: str = ""

    def __post_init__(self):
        pixels = np.asarray(self.pixels, dtype=float)
        if pixels.ndim != 2:
            raise ValueError(f"expected a 2-D matrix, got shape {pixels.shape}")
        h, w = pixels.shape
        if h < MIN_SIDE or w < MIN_SIDE:
            raise ValueError(f"image must be at least {MIN_SIDE}x{MIN_SIDE}")
        if not np.all(np.isfinite(pixels)):
            raise ValueError(f"non-finite pixels in image {self.id!r}")
        object.__setattr__(self, "pixels", pixels)

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape


@dataclass(frozen=True)
class RapsdProfile:
    """Mean spectral power per integer-radius frequency bin.

    radii are in cycles per image side; counts is the number of
    spectrum samples averaged into each bin.
    """

    radii: np.ndarray
    power: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        radii = np.asarray(self.radii, dtype=float)
        power = np.asarray(self.power, dtype=float)
        counts = np.asarray(self.counts, dtype=int)
        if not (radii.size == power.size == counts.size):
            raise ValueError("radii, power, counts must have equal length")
        if radii.size and np.any(np.diff(radii) <= 0):
            raise ValueError("radii must be strictly increasing")
        if np.any(power < 0):
            raise ValueError("power must be >= 0")
        if np.any(counts < 1):
            raise ValueError("every retained bin needs >= 1 sample")
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "power", power)
        object.__setattr__(self, "counts", counts)


@dataclass(frozen=True)
class DecayFit:
    """Least-squares power-law fit of a radial profile."""

    r_hat: float
    intercept: float
    fit_range: tuple[int, int]
    residual_rms: float


def power_spectrum(pixels: np.ndarray) -> np.ndarray:
    """|F|^2 of the mean-subtracted image, unnormalized forward transform.

    With this convention the spectrum sums to H*W times the sum of
    squared (mean-subtracted) pixel values.
    """
    x = np.asarray(pixels, dtype=float)
    x = x - x.mean()
    return np.abs(np.fft.fft2(x)) ** 2


def _radius_grid(h: int, w: int) -> np.ndarray:
    """Rounded radial frequency index per spectrum sample.

    Frequencies are taken as signed integer cycles per image side along
    each axis, so the grid is symmetric under transposition.
    """
    u = np.fft.fftfreq(h) * h
    v = np.fft.fftfreq(w) * w
    return np.rint(np.hypot.outer(u, v)).astype(int)


def rapsd(img: ImageMatrix) -> RapsdProfile:
    """Radially averaged power spectral density of one image.

    Bins the power spectrum by integer radius, drops the DC bin and all
    bins beyond the inscribed-circle Nyquist radius min(H, W) / 2.
    """
    h, w = img.shape
    spectrum = power_spectrum(img.pixels)
    k = _radius_grid(h, w)
    sums = np.bincount(k.ravel(), weights=spectrum.ravel())
    counts = np.bincount(k.ravel())
    nyquist = min(h, w) // 2
    keep = slice(1, nyquist + 1)
    radii = np.arange(len(sums), dtype=float)[keep]
    return RapsdProfile(
        radii=radii,
        power=sums[keep] / counts[keep],
        counts=counts[keep],
    )


def _require_same_shape(images) -> tuple[int, int]:
    shapes = {img.shape for img in images}
    if len(shapes) != 1:
        raise ValueError(f"images must share dimensions, got {sorted(shapes)}")
    return next(iter(shapes))


def mean_rapsd(images) -> RapsdProfile:
    """Bin-wise mean profile of an image set (all images same size)."""
    images = list(images)
    if not images:
        raise ValueError("image set is empty")
    _require_same_shape(images)
    profiles = [rapsd(img) for img in images]
    power = np.mean([p.power for p in profiles], axis=0)
    first = profiles[0]
    return RapsdProfile(radii=first.radii, power=power, counts=first.counts)


def spectral_distance(real_set, synth_set) -> float:
    """Euclidean distance between the mean radial profiles of two sets."""
    real_set, synth_set = list(real_set), list(synth_set)
    if not real_set or not synth_set:
        raise ValueError("both image sets must be nonempty")
    _require_same_shape(real_set + synth_set)
    p = mean_rapsd(real_set)
    q = mean_rapsd(synth_set)
    return float(np.linalg.norm(p.power - q.power))


def fit_decay_exponent(
    profile: RapsdProfile,
    fit_lo: int | None = None,
    fit_hi: int | None = None,
) -> DecayFit:
    """Estimate the decay exponent from the log-log slope of the profile.

    Ordinary least squares of log power on log radius over radii in
    [fit_lo, fit_hi] (default 2 to half the Nyquist radius); bins with
    nonpositive power are excluded.  Under Q ~ omega^(-2r) the slope is
    -2r, so r_hat = -slope / 2.
    """
    nyquist = int(profile.radii[-1])
    lo = 2 if fit_lo is None else fit_lo
    hi = nyquist // 2 if fit_hi is None else fit_hi
    if lo > hi:
        raise ValueError(f"empty fit range [{lo}, {hi}]")
    mask = (profile.radii >= lo) & (profile.radii <= hi) & (profile.power > 0)
    if mask.sum() < MIN_FIT_BINS:
        raise ValueError(
            f"need >= {MIN_FIT_BINS} positive-power bins in [{lo}, {hi}], "
            f"got {int(mask.sum())}"
        )
    log_r = np.log(profile.radii[mask])
    log_p = np.log(profile.power[mask])
    slope, intercept = np.polyfit(log_r, log_p, 1)
    residuals = log_p - (slope * log_r + intercept)
    return DecayFit(
        r_hat=float(-slope / 2.0),
        intercept=float(intercept),
        fit_range=(lo, hi),
        residual_rms=float(np.sqrt(np.mean(residuals**2))),
    )


def plan_from_images(
    real_set,
    synth_set,
    n: int,
    sigma2: float | None = None,
    sigma2_from_pixels: bool = False,
    fit_lo: int | None = None,
    fit_hi: int | None = None,
) -> RatioPlan:
    """Ratio plan from two image sets via the spectral pipeline.

    Composes the spectral distance (distributional-distance proxy), the
    decay-exponent fit on the real set, and the numeric ratio planner.
    sigma2 is user supplied unless sigma2_from_pixels requests the
    pooled pixel variance of the real set.
    """
    real_set, synth_set = list(real_set), list(synth_set)
    d = spectral_distance(real_set, synth_set)
    if d == 0:
        raise UnboundedRegularization(
            "identical spectral profiles: synthetic data helps without limit"
        )
    fit = fit_decay_exponent(mean_rapsd(real_set), fit_lo=fit_lo, fit_hi=fit_hi)
    if sigma2_from_pixels:
        sigma2 = float(
            np.var(np.concatenate([img.pixels.ravel() for img in real_set]))
        )
    elif sigma2 is None:
        raise ValueError("pass sigma2 or set sigma2_from_pixels")
    inputs = KernelBoundInputs(n=n, r=fit.r_hat, sigma2=sigma2, d_gen=d)
    return lambda_star_numeric(inputs)


def load_image(path: str | Path) -> ImageMatrix:
    """Read a PNG (color converted to luma) or a CSV matrix."""
    path = Path(path)
    if path.suffix.lower() == ".png":
        with Image.open(path) as img:
            # Pillow's "L" mode applies the 0.299/0.587/0.114 luma weights.
            pixels = np.asarray(img.convert("L"), dtype=float)
    elif path.suffix.lower() == ".csv":
        pixels = np.loadtxt(path, delimiter=",", dtype=float)
    else:
        raise ValueError(f"unsupported image format: {path.name}")
    return ImageMatrix(pixels=pixels, id=path.name)


def load_image_dir(path: str | Path) -> list[ImageMatrix]:
    """Load every PNG/CSV in a directory, sorted by filename."""
    path = Path(path)
    if not path.is_dir():
        raise ValueError(f"not a directory: {path}")
    files = sorted(
        p for p in path.iterdir() if p.suffix.lower() in (".png", ".csv")
    )
    if not files:
        raise ValueError(f"no PNG or CSV images in {path}")
    return [load_image(p) for p in files]
