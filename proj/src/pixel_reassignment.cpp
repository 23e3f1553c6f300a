#include "simrecon/pixel_reassignment.hpp"

#include <algorithm>
#include <cmath>

#include "simrecon/fft.hpp"

namespace simrecon {

std::vector<std::array<int, 2>> pr_shift_disc(const Kernel& det, double radius_fwhm) {
    if (!(radius_fwhm > 0.0))
        throw ConfigError("reassignment disc radius must be positive");
    const double r_px = radius_fwhm * det.fwhm / det.grid.pitch;
    const int r = int(std::floor(r_px));
    std::vector<std::array<int, 2>> shifts;
    for (int sy = -r; sy <= r; ++sy)
        for (int sx = -r; sx <= r; ++sx)
            if (std::hypot(double(sx), double(sy)) <= r_px)
                shifts.push_back({sx, sy});
    return shifts;
}

std::vector<std::array<int, 2>> pr_shifts(const PrConfig& cfg, const Kernel& det) {
    std::vector<std::array<int, 2>> s =
        cfg.shifts.empty() ? pr_shift_disc(det, cfg.radius_fwhm) : cfg.shifts;
    auto has = [&](int x, int y) {
        return std::find(s.begin(), s.end(), std::array<int, 2>{x, y}) != s.end();
    };
    if (!has(0, 0))
        throw ConfigError("reassignment shift set must contain the zero shift");
    // shifted covariances wrap circularly, so shifts past a quarter of the
    // field fold the reassigned planes back onto the image
    const int bx = det.grid.width / 4, by = det.grid.height / 4;
    for (auto& sh : s) {
        if (!has(-sh[0], -sh[1]))
            throw ConfigError("reassignment shift set must be symmetric under negation");
        if (std::abs(sh[0]) > bx || std::abs(sh[1]) > by)
            throw ConfigError("reassignment shift (" + std::to_string(sh[0]) + ", " +
                              std::to_string(sh[1]) + ") exceeds a quarter of the field; "
                              "shrink radius_fwhm or enlarge the grid");
    }
    return s;
}

Image shifted_covariance(const Stack& measurements, const Stack& patterns,
                         int shift_x, int shift_y) {
    return covariance_image(measurements, patterns, shift_x, shift_y);
}

Image accumulate_pr(const Stack& measurements, const Stack& patterns,
                    const std::vector<std::array<int, 2>>& shifts) {
    if (shifts.empty())
        throw ConfigError("accumulate_pr: empty shift set");
    // means are shift-independent; hoist them out of the loop
    const Image i_mean = stack_mean(measurements);
    const Image p_mean = stack_mean(patterns);

    Image acc(measurements.grid);
    const double pitch = measurements.grid.pitch;
    for (const auto& s : shifts) {
        Image cov = covariance_image(measurements, patterns, i_mean, p_mean, s[0], s[1]);
        // reassign: out(r) += cov(r + s/2)
        Image moved = fourier_shift(cov, -0.5 * s[0] * pitch, -0.5 * s[1] * pitch);
        for (std::size_t i = 0; i < acc.size(); ++i)
            acc.v[i] += moved.v[i];
    }
    return acc;
}

EffectiveKernel pr_kernel(const Kernel& illu, const Kernel& det) {
    require_same_grid(illu.grid, det.grid, "pr_kernel");
    const GridSpec& grid = det.grid;
    // the reassigned response is g(2r) with g = (h_illu corr h_illu) conv
    // h_det, so its transfer is |H_illu|^2 * H_det read at half frequency.
    // Sample the analytic transfer there: the halved frequencies fall between
    // grid bins, and reading a wrapped discrete psf instead would alias the
    // peak onto mid-field replicas.
    Spectrum gs(grid);
    for (int ky = 0; ky < grid.height; ++ky)
        for (int kx = 0; kx < grid.width; ++kx) {
            const double fx = 0.5 * bin_freq(kx, grid.width, grid.pitch);
            const double fy = 0.5 * bin_freq(ky, grid.height, grid.pitch);
            const double f = std::hypot(fx, fy);
            const double hi = incoherent_otf(f, illu.na, illu.lambda);
            gs.at(kx, ky) = hi * hi * incoherent_otf(f, det.na, det.lambda);
        }

    EffectiveKernel k;
    k.grid = grid;
    k.psf = fft::inverse(gs);

    double sum = 0.0;
    for (double& v : k.psf.v) {
        if (v < 0.0) v = 0.0;
        sum += v;
    }
    if (!(sum > 0.0))
        throw NumericError("reassignment kernel collapsed to zero");
    for (double& v : k.psf.v) v /= sum;
    k.otf = fft::forward(k.psf);
    for (auto& c : k.otf.v) c = c.real();
    return k;
}

PrResult pr_reconstruct(const Stack& measurements, const Stack& patterns,
                        const Kernel& illu, const Kernel& det, const SimsConfig& sims_cfg,
                        const PrConfig& pr_cfg) {
    PrResult r;
    r.shifts = pr_shifts(pr_cfg, det);
    r.kernel = pr_kernel(illu, det);
    r.i_pr = accumulate_pr(measurements, patterns, r.shifts);
    r.i_pr_dec = sims_deconvolve(r.i_pr, r.kernel, sims_cfg.xi);
    r.alpha = variance_map(patterns);
    double amax = 0.0;
    for (double v : r.alpha.v) amax = std::max(amax, v);
    r.eps_used = (sims_cfg.eps < 0.0) ? 1e-2 * amax * amax : sims_cfg.eps;
    r.i_sims_pr = shading_correct(r.i_pr_dec, r.alpha, r.eps_used);
    return r;
}

PeSimsPrResult pe_sims_pr(const Stack& measurements, const Kernel& illu, const Kernel& det,
                          const PeConfig& pe_cfg, const SimsConfig& sims_cfg,
                          const PrConfig& pr_cfg) {
    PeSimsPrResult out;
    out.pe = estimate_all(measurements, illu, det, pe_cfg);
    out.pr = pr_reconstruct(measurements, out.pe.patterns, illu, det, sims_cfg, pr_cfg);
    return out;
}

} // namespace simrecon
