#pragma once
#include "simrecon/grid.hpp"

namespace simrecon {

struct OpticalConfig {
    double na = 0.8;
    double lambda_illu = 0.532; // um
    double lambda_det = 0.532;  // um
    GridSpec grid;

    void validate() const;
};

enum class Side { illumination, detection };

// Incoherent point-spread function for a circular pupil plus its transfer
// function sampled on the run grid.  The OTF is hard-zeroed beyond the
// incoherent cutoff 2NA/lambda so band membership is exact, and the PSF is
// the matching nonnegative, unit-sum real-space kernel (wrap-around centered
// at pixel (0,0)).
struct Kernel {
    GridSpec grid;
    Image psf;
    Spectrum otf;
    double cutoff = 0.0; // 2NA/lambda, cycles/um
    double fwhm = 0.0;   // analytic Airy-core FWHM, um
    double lambda = 0.0; // um
    double na = 0.0;
};

Kernel make_kernel(const OpticalConfig& cfg, Side side);

// Diffraction-limited FWHM of the incoherent PSF, ~0.514*lambda/NA,
// solved from the Airy intensity profile.
double airy_fwhm(double na, double lambda);

// Analytic incoherent OTF value at radial frequency rho (cycles/um).
double incoherent_otf(double rho, double na, double lambda);

// Analytic incoherent PSF (normalized to 1 at r=0) at radius r um.
double airy_intensity(double r, double na, double lambda);

} // namespace simrecon
