#pragma once
#include <array>
#include <cstdint>

#include "simrecon/fourier_ops.hpp"

namespace simrecon {

// Raster scan of the pattern generator.  step is expressed as a fraction of
// the detection-side PSF FWHM and converted to pixels per grid.
struct ScanGrid {
    int nx = 20;
    int ny = 20;
    double step_fwhm = 0.6;

    void validate() const {
        if (nx <= 0 || ny <= 0)
            throw ConfigError("scan grid dimensions must be positive");
        if (!(step_fwhm > 0.0))
            throw ConfigError("scan step must be positive");
    }
    int positions() const { return nx * ny; }
};

// Exact scan step in pixels for a given configuration; errors when it rounds
// below one pixel (shifts would collapse onto each other).
double scan_step_px(const OpticalConfig& cfg, const ScanGrid& scan);

struct NoiseSpec {
    enum class Mode { none, gaussian, poisson };
    Mode mode = Mode::none;
    // gaussian: additive sigma in image units; poisson: expected photons at
    // intensity 1.0 (counts are scaled back to image units)
    double param = 0.0;
};

// A stack of same-grid images with per-member scan shifts (um).
// Used both for patterns and for simulated measurements.
struct Stack {
    GridSpec grid;
    std::vector<Image> members;
    std::vector<std::array<double, 2>> shifts_um;

    int count() const { return int(members.size()); }
    void validate() const;
};

// Binary mask stack: one random base mask with the requested fill fraction,
// circularly shifted over the scan grid.  independent = true redraws the mask
// at every position instead.
Stack random_dmd_stack(const OpticalConfig& cfg, const ScanGrid& scan, double fill,
                       std::uint64_t seed, bool independent = false);

// Periodic multi-spot mask scanned over one unit cell.  Requires
// scan.nx == scan.ny == period_steps and an integer-pixel scan step; the
// error message reports the closest workable step when it is not.
Stack multispot_dmd_stack(const OpticalConfig& cfg, const ScanGrid& scan, int period_steps);

// Helper: smallest adjustment of scan.step_fwhm that makes the multispot step
// an integer pixel count.
ScanGrid multispot_adjust_step(const OpticalConfig& cfg, const ScanGrid& scan);

// Illumination delivered to the sample: mask blurred by the illumination PSF.
Image project_pattern(const Image& mask, const Kernel& illu);
Stack project_stack(const Stack& masks, const Kernel& illu);

// Camera model: blur the illuminated object with the detection PSF, then
// apply noise.  Object and pattern must be nonnegative.
Image forward(const Image& object, const Image& pattern, const Kernel& det,
              const NoiseSpec& noise = {}, std::uint64_t seed = 0);
Stack forward_stack(const Image& object, const Stack& patterns, const Kernel& det,
                    const NoiseSpec& noise = {}, std::uint64_t seed = 0);

} // namespace simrecon
