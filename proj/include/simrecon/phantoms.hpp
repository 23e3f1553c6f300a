#pragma once
#include <cstdint>

#include "simrecon/optics.hpp"

namespace simrecon {

// Placement of a spoke-target phantom, pixel units.
struct StarGeometry {
    double cx = 0.0, cy = 0.0;
    int spokes = 40;
    double inner_px = 0.0;
    double outer_px = 0.0;

    // radius (px) at which the local azimuthal period equals `period_px`
    double radius_for_period(double period_px) const;
    // local azimuthal period (px) at radius r
    double period_at_radius(double r_px) const;
};

// Geometry used by siemens_star for a given grid: centered, outer radius
// leaves a dark border of ~2.5 detection FWHM, inner exclusion where the
// spoke period falls below a quarter of a typical diffraction period.
StarGeometry star_geometry(const OpticalConfig& cfg, int spokes = 40);

// Radial spoke target 1 + cos(spokes * theta) inside [inner, outer] annulus.
Image siemens_star(const OpticalConfig& cfg, int spokes = 40);
Image siemens_star(const GridSpec& grid, const StarGeometry& geom);

// Two unit impulses separated by `separation_um` along x (rounded to whole
// pixels), centered on the grid.  Returns the realized pixel separation too.
Image two_point(const OpticalConfig& cfg, double separation_um, int* realized_px = nullptr);

// n non-overlapping discs of the given diameter at uniform random positions.
Image bead_field(const OpticalConfig& cfg, int n, double diameter_um, std::uint64_t seed);

} // namespace simrecon
