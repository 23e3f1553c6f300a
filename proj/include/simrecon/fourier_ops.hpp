#pragma once
#include "simrecon/optics.hpp"

namespace simrecon {

// Circular convolution with a kernel (multiplication by its transfer function).
Image convolve(const Image& img, const Kernel& k);

// Circular convolution of two images: IFFT(FFT(a) * FFT(b)).
Image convolve(const Image& a, const Image& b);

// Circular cross-correlation c(d) = sum_r a(r) * b(r + d).
Image cross_correlate(const Image& a, const Image& b);

// Regularized inverse filtering: output spectrum = S(u) * conj(T(u)) / (|T(u)|^2 + reg).
// reg = 0 demands |T| bounded away from zero wherever S has energy.
Image tikhonov_deconvolve(const Image& img, const Spectrum& transfer, double reg);

// Subpixel translation by (dx, dy) micrometers via a spectral phase ramp.
// Integer-pixel shifts reproduce circular rolls exactly; Nyquist bins are
// modulated by cos(pi*shift) so the operator stays real.
Image fourier_shift(const Image& img, double dx_um, double dy_um);

// Circular integer roll: out(x, y) = img(x - sx, y - sy).
Image roll(const Image& img, int sx, int sy);

} // namespace simrecon
