#include "simrecon/optics.hpp"

#include <cmath>
#include <numbers>

#include "simrecon/fft.hpp"

namespace simrecon {

void OpticalConfig::validate() const {
    if (!(na > 0.0) || na >= 1.0)
        throw ConfigError("numerical aperture must be in (0, 1) for a dry objective model");
    if (!(lambda_illu > 0.0) || !(lambda_det > 0.0))
        throw ConfigError("wavelengths must be positive");
    grid.validate();
    // each kernel band must fit below the sampling Nyquist frequency
    const double nyquist = 0.5 / grid.pitch;
    const double cut = 2.0 * na / std::min(lambda_illu, lambda_det);
    if (cut > nyquist + 1e-12)
        throw ConfigError("grid pitch too coarse: kernel band exceeds the sampling Nyquist");
}

double incoherent_otf(double rho_cyc_um, double na, double lambda) {
    const double cut = 2.0 * na / lambda;
    const double r = std::abs(rho_cyc_um) / cut;
    if (r >= 1.0) return 0.0;
    return (2.0 / std::numbers::pi) * (std::acos(r) - r * std::sqrt(1.0 - r * r));
}

double airy_intensity(double r_um, double na, double lambda) {
    const double x = 2.0 * std::numbers::pi * (na / lambda) * r_um;
    if (std::abs(x) < 1e-12) return 1.0;
    const double a = 2.0 * std::cyl_bessel_j(1, x) / x;
    return a * a;
}

double airy_fwhm(double na, double lambda) {
    // solve [2 J1(v)/v]^2 = 1/2 on (0, first zero); v_half ~ 1.6163
    double lo = 1.0, hi = 2.5;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double a = 2.0 * std::cyl_bessel_j(1, mid) / mid;
        if (a * a > 0.5) lo = mid; else hi = mid;
    }
    const double v_half = 0.5 * (lo + hi);
    return v_half * lambda / (std::numbers::pi * na);
}

Kernel make_kernel(const OpticalConfig& cfg, Side side) {
    cfg.validate();
    const double lambda = (side == Side::illumination) ? cfg.lambda_illu : cfg.lambda_det;
    const int w = cfg.grid.width, h = cfg.grid.height;
    const double cut = 2.0 * cfg.na / lambda;

    Kernel k;
    k.grid = cfg.grid;
    k.cutoff = cut;
    k.fwhm = airy_fwhm(cfg.na, lambda);
    k.lambda = lambda;
    k.na = cfg.na;

    // sample the analytic transfer function on the DFT frequency lattice;
    // this periodizes the PSF in real space and keeps it nonnegative
    Spectrum otf(cfg.grid);
    for (int ky = 0; ky < h; ++ky) {
        const double fy = bin_freq(ky, h, cfg.grid.pitch);
        for (int kx = 0; kx < w; ++kx) {
            const double fx = bin_freq(kx, w, cfg.grid.pitch);
            otf.at(kx, ky) = incoherent_otf(std::hypot(fx, fy), cfg.na, lambda);
        }
    }

    Image psf = fft::inverse(otf);
    // tiny negative excursions come from clipping the analytic profile to the
    // frequency lattice; clamp and renormalize to a unit-sum kernel
    double sum = 0.0;
    for (double& p : psf.v) {
        if (p < 0.0) p = 0.0;
        sum += p;
    }
    if (!(sum > 0.0))
        throw NumericError("kernel collapsed to zero during normalization");
    for (double& p : psf.v) p /= sum;

    k.otf = fft::forward(psf);
    // membership in the band is part of the contract: zero everything at or
    // beyond the cutoff and drop the ~1e-16 imaginary round-off
    for (int ky = 0; ky < h; ++ky) {
        const double fy = bin_freq(ky, h, cfg.grid.pitch);
        for (int kx = 0; kx < w; ++kx) {
            const double fx = bin_freq(kx, w, cfg.grid.pitch);
            if (std::hypot(fx, fy) >= cut - 1e-12)
                k.otf.at(kx, ky) = 0.0;
            else
                k.otf.at(kx, ky) = k.otf.at(kx, ky).real();
        }
    }
    k.psf = std::move(psf);
    return k;
}

} // namespace simrecon
