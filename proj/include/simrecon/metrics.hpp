#pragma once
#include <optional>

#include "simrecon/phantoms.hpp"

namespace simrecon {

// Bilinear sample at fractional pixel coordinates (clamped at the borders).
double sample_bilinear(const Image& img, double x, double y);

// Mean Michelson contrast over the per-period extrema of a circular profile
// around the spoke target at the given radius.
double azimuthal_contrast(const Image& img, const StarGeometry& geom, double radius_px,
                          int samples_per_period = 32);

struct MtfPoint {
    double radius_px = 0.0;
    double period_um = 0.0;   // local azimuthal period at that radius
    double contrast = 0.0;
};

struct MtfCurve {
    std::vector<MtfPoint> points; // ordered inner -> outer (period ascending)
    double abbe_um = 0.0;         // diffraction period lambda / 2NA
};

// Contrast versus spoke period, sweeping period/abbe over [min_rel, max_rel].
MtfCurve mtf_curve(const Image& img, const StarGeometry& geom, double abbe_um,
                   double min_rel = 0.3, double max_rel = 1.5, double step_rel = 0.01);

// Outermost crossing of the contrast threshold, scanning from large periods
// inward; linear interpolation between samples.  nullopt = contrast never
// reaches the threshold anywhere; if the curve stays above the threshold all
// the way in, the innermost sampled period is returned.
std::optional<double> resolution_at(const MtfCurve& curve, double threshold = 0.01);

// Full width at half maximum of a sampled 1-D profile (zero baseline assumed).
double profile_fwhm(const std::vector<double>& y, double dx);

// Dip contrast of two unit-height Gaussians (FWHM 1) at separation s (FWHM
// units), and its inverse.  c is zero below the bifurcation near s = 0.849.
double separation_to_dip(double s_fwhm);
double dip_to_separation(double contrast);

struct TwoPointReading {
    bool resolved = false;
    double separation_um = 0.0;   // refined peak-to-peak distance
    double dip_contrast = 0.0;    // (mean peak - dip) / (mean peak + dip)
    double implied_fwhm_um = 0.0; // separation / dip_to_separation(contrast)
    int cut_row = 0;
};

// Reads a horizontal two-point image: cuts through the brightest row, finds
// the two peaks and the dip between them.
TwoPointReading two_point_analysis(const Image& img);

// Quadrature removal of a known emitter size from a measured FWHM.
double subtract_bead(double measured_fwhm_um, double bead_diameter_um);

} // namespace simrecon
