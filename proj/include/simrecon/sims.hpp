#pragma once
#include "simrecon/pattern_estimation.hpp"

namespace simrecon {

struct SimsConfig {
    double xi = 1e-6;  // covariance deconvolution regularizer, x max|H_eff|^2
    double eps = -1.0; // shading regularizer; negative = auto 1e-2 * max(alpha)^2
    enum class KernelMode { analytic, empirical };
    KernelMode kernel_mode = KernelMode::analytic;
};

// PSF/OTF governing the covariance image: (h_illu corr h_illu) .* h_det.
struct EffectiveKernel {
    GridSpec grid;
    Image psf; // wrap-around centered, unit sum
    Spectrum otf;
    bool point_like = true; // false = empirical autocovariance looked non-compact
};

// Member-wise mean of a stack.
Image stack_mean(const Stack& st);

// Per-pixel covariance between pattern and measurement fluctuations,
// <dp(r - s) dI(r)>_l.  The default zero shift is the plain covariance image.
Image covariance_image(const Stack& measurements, const Stack& patterns,
                       int shift_x = 0, int shift_y = 0);
// Hot-path overload with the stack means precomputed by the caller.
Image covariance_image(const Stack& measurements, const Stack& patterns,
                       const Image& i_mean, const Image& p_mean,
                       int shift_x, int shift_y);

// Shift-averaged pattern autocovariance plane A(d) = <dp(r) dp(r+d)>_{l,r},
// wrap-around centered at d = 0.
Image pattern_autocovariance(const Stack& patterns);

EffectiveKernel covariance_kernel(const Kernel& illu, const Kernel& det);
// Same kernel, but with the pattern autocovariance measured from an estimated
// pattern stack instead of the analytic illumination model.
EffectiveKernel covariance_kernel(const Stack& patterns, const Kernel& det);

// Regularized inverse filter through the effective OTF; negatives clipped.
Image sims_deconvolve(const Image& i_cov, const EffectiveKernel& kernel, double xi);

// Per-pixel variance of the pattern stack (the shading field alpha).
Image variance_map(const Stack& patterns);

// Divides the shading field out of the deconvolved covariance image:
// out = i_dec * alpha / (alpha^2 + eps).
Image shading_correct(const Image& i_dec, const Image& alpha, double eps);

struct SimsResult {
    Image i_cov;
    Image i_cov_dec;
    Image alpha;
    Image i_sims;
    EffectiveKernel kernel;
    double eps_used = 0.0;
};

// Covariance reconstruction from measurements plus known/estimated patterns.
SimsResult sims_reconstruct(const Stack& measurements, const Stack& patterns,
                            const Kernel& illu, const Kernel& det, const SimsConfig& cfg);

struct PeSimsResult {
    PeResult pe;
    SimsResult sims;
};

// The full blind pipeline: pattern estimation followed by the covariance
// reconstruction with the statistical prior.
PeSimsResult pe_sims(const Stack& measurements, const Kernel& illu, const Kernel& det,
                     const PeConfig& pe_cfg, const SimsConfig& sims_cfg);

} // namespace simrecon
