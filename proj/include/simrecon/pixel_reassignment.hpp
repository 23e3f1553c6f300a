#pragma once
#include "simrecon/sims.hpp"

namespace simrecon {

struct PrConfig {
    // radius of the reassignment shift disc, in detection FWHM units; two
    // FWHM captures 99.7% of the shifted-covariance mass (one FWHM leaves
    // ~1% out, visibly narrowing the accumulated response)
    double radius_fwhm = 2.0;
    // explicit integer shift set; empty = disc built from radius_fwhm.
    // Must contain (0,0) and be symmetric under negation.
    std::vector<std::array<int, 2>> shifts;
};

// Integer offsets inside the reassignment disc, deterministic row-major order.
std::vector<std::array<int, 2>> pr_shift_disc(const Kernel& det, double radius_fwhm);

// Validated shift set for a config (builds the default disc when unset).
std::vector<std::array<int, 2>> pr_shifts(const PrConfig& cfg, const Kernel& det);

// Covariance between dp displaced by `shift` pixels and dI.
Image shifted_covariance(const Stack& measurements, const Stack& patterns,
                         int shift_x, int shift_y);

// Reassigned covariance: each shifted covariance plane is translated back by
// half its shift and the planes are summed.
Image accumulate_pr(const Stack& measurements, const Stack& patterns,
                    const std::vector<std::array<int, 2>>& shifts);

// Transfer kernel of the reassigned image: the response is g(2r) with
// g = (h_illu corr h_illu) conv h_det, so the transfer is
// |H_illu(u/2)|^2 * H_det(u/2), reaching twice the plain covariance cutoff.
EffectiveKernel pr_kernel(const Kernel& illu, const Kernel& det);

struct PrResult {
    Image i_pr;      // accumulated reassigned covariance
    Image i_pr_dec;  // after deconvolution by the reassignment kernel
    Image alpha;     // pattern variance field
    Image i_sims_pr; // final shading-corrected reconstruction
    EffectiveKernel kernel;
    std::vector<std::array<int, 2>> shifts;
    double eps_used = 0.0;
};

// Reassignment reconstruction from measurements plus known/estimated patterns.
PrResult pr_reconstruct(const Stack& measurements, const Stack& patterns,
                        const Kernel& illu, const Kernel& det, const SimsConfig& sims_cfg,
                        const PrConfig& pr_cfg);

struct PeSimsPrResult {
    PeResult pe;
    PrResult pr;
};

// Full blind pipeline with pixel reassignment.
PeSimsPrResult pe_sims_pr(const Stack& measurements, const Kernel& illu, const Kernel& det,
                          const PeConfig& pe_cfg, const SimsConfig& sims_cfg,
                          const PrConfig& pr_cfg);

} // namespace simrecon
