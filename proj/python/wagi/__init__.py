"""Haar wavelet analysis, sub-band losses and latent regression.

Images are float64 numpy arrays shaped (C, H, W); (H, W) is read as one channel.
"""

from ._core import (
    FormatError,
    IoError,
    __version__,
    ada_demo,
    decompose,
    gaussian_blur,
    haar_forward,
    haar_inverse,
    half_normal_mean,
    load_image,
    pixel_loss,
    procedural_texture,
    read_pnm,
    read_raw,
    reconstruct,
    reduced_spectrum,
    regress,
    spectral_loss,
    ssim,
    subband_loss,
    synthesize,
    verify,
    verify_theorem1,
    wavelet_loss,
    write_pnm,
    write_raw,
)

__all__ = [name for name in dir() if not name.startswith("_")]
