#include "simrecon/patterns.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace simrecon {

void Stack::validate() const {
    grid.validate();
    if (members.empty())
        throw ConfigError("stack has no members");
    if (shifts_um.size() != members.size())
        throw ConfigError("stack shift table does not match member count");
    for (const Image& m : members)
        require_same_grid(m.grid, grid, "stack member");
}

double scan_step_px(const OpticalConfig& cfg, const ScanGrid& scan) {
    cfg.validate();
    scan.validate();
    const double fwhm_um = airy_fwhm(cfg.na, cfg.lambda_det);
    const double step = scan.step_fwhm * fwhm_um / cfg.grid.pitch;
    if (step < 1.0)
        throw ConfigError("scan step is below one pixel after conversion; "
                          "increase step_fwhm or refine the grid");
    return step;
}

namespace {

// exactly k "on" pixels, chosen by a partial Fisher-Yates shuffle
Image random_mask(const GridSpec& grid, std::size_t k, std::mt19937_64& rng) {
    const std::size_t n = grid.pixels();
    std::vector<std::uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0u);
    Image mask(grid);
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(idx[i], idx[pick(rng)]);
        mask.v[idx[i]] = 1.0;
    }
    return mask;
}

std::vector<std::array<int, 2>> scan_shifts_px(const ScanGrid& scan, double step_px) {
    std::vector<std::array<int, 2>> s;
    s.reserve(std::size_t(scan.positions()));
    for (int j = 0; j < scan.ny; ++j)
        for (int i = 0; i < scan.nx; ++i)
            s.push_back({int(std::lround(i * step_px)), int(std::lround(j * step_px))});
    return s;
}

} // namespace

Stack random_dmd_stack(const OpticalConfig& cfg, const ScanGrid& scan, double fill,
                       std::uint64_t seed, bool independent) {
    if (!(fill > 0.0) || fill >= 1.0)
        throw ConfigError("fill fraction must be in (0, 1)");
    const double step_px = scan_step_px(cfg, scan);
    const auto shifts = scan_shifts_px(scan, step_px);
    const std::size_t k = std::size_t(std::llround(fill * double(cfg.grid.pixels())));
    if (k == 0)
        throw ConfigError("fill fraction rounds to zero on pixels");

    Stack st;
    st.grid = cfg.grid;
    st.members.reserve(shifts.size());
    st.shifts_um.reserve(shifts.size());

    if (independent) {
        for (std::size_t l = 0; l < shifts.size(); ++l) {
            std::seed_seq sq{seed, std::uint64_t(l), std::uint64_t(0x9e3779b97f4a7c15ull)};
            std::mt19937_64 rng(sq);
            st.members.push_back(random_mask(cfg.grid, k, rng));
            st.shifts_um.push_back({shifts[l][0] * cfg.grid.pitch, shifts[l][1] * cfg.grid.pitch});
        }
    } else {
        std::mt19937_64 rng(seed);
        const Image base = random_mask(cfg.grid, k, rng);
        for (auto& s : shifts) {
            st.members.push_back(roll(base, s[0], s[1]));
            st.shifts_um.push_back({s[0] * cfg.grid.pitch, s[1] * cfg.grid.pitch});
        }
    }
    return st;
}

ScanGrid multispot_adjust_step(const OpticalConfig& cfg, const ScanGrid& scan) {
    const double step_px = scan_step_px(cfg, scan);
    const double snapped = std::max(1.0, std::round(step_px));
    ScanGrid out = scan;
    const double fwhm_px = airy_fwhm(cfg.na, cfg.lambda_det) / cfg.grid.pitch;
    out.step_fwhm = snapped / fwhm_px;
    return out;
}

Stack multispot_dmd_stack(const OpticalConfig& cfg, const ScanGrid& scan, int period_steps) {
    if (period_steps < 2)
        throw ConfigError("multispot period must span at least 2 scan steps");
    if (scan.nx != period_steps || scan.ny != period_steps)
        throw ConfigError("multispot scan must cover exactly one unit cell: "
                          "scan dimensions must equal period_steps");
    const double step_px = scan_step_px(cfg, scan);
    if (std::abs(step_px - std::round(step_px)) > 1e-9) {
        const ScanGrid adj = multispot_adjust_step(cfg, scan);
        std::ostringstream msg;
        msg << "multispot step is " << step_px << " px, not an integer pixel count; "
            << "nearest workable step_fwhm is " << adj.step_fwhm;
        throw ConfigError(msg.str());
    }
    const int s = int(std::lround(step_px));
    const int period_px = period_steps * s;

    Image base(cfg.grid);
    for (int y = 0; y < cfg.grid.height; y += period_px)
        for (int x = 0; x < cfg.grid.width; x += period_px)
            base.at(x, y) = 1.0;

    Stack st;
    st.grid = cfg.grid;
    for (int j = 0; j < period_steps; ++j) {
        for (int i = 0; i < period_steps; ++i) {
            st.members.push_back(roll(base, i * s, j * s));
            st.shifts_um.push_back({i * s * cfg.grid.pitch, j * s * cfg.grid.pitch});
        }
    }
    return st;
}

Image project_pattern(const Image& mask, const Kernel& illu) {
    return convolve(mask, illu);
}

Stack project_stack(const Stack& masks, const Kernel& illu) {
    masks.validate();
    Stack out;
    out.grid = masks.grid;
    out.shifts_um = masks.shifts_um;
    out.members.reserve(masks.members.size());
    for (const Image& m : masks.members)
        out.members.push_back(project_pattern(m, illu));
    return out;
}

Image forward(const Image& object, const Image& pattern, const Kernel& det,
              const NoiseSpec& noise, std::uint64_t seed) {
    require_same_grid(object.grid, pattern.grid, "forward");
    for (double v : object.v)
        if (v < 0.0) throw ConfigError("forward: object must be nonnegative");
    for (double v : pattern.v)
        if (v < 0.0) throw ConfigError("forward: pattern must be nonnegative");

    Image lit(object.grid);
    for (std::size_t i = 0; i < lit.size(); ++i)
        lit.v[i] = object.v[i] * pattern.v[i];
    Image img = convolve(lit, det);

    switch (noise.mode) {
    case NoiseSpec::Mode::none:
        break;
    case NoiseSpec::Mode::gaussian: {
        if (!(noise.param > 0.0))
            throw ConfigError("gaussian noise needs a positive sigma");
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> nd(0.0, noise.param);
        for (double& v : img.v) v += nd(rng);
        break;
    }
    case NoiseSpec::Mode::poisson: {
        if (!(noise.param > 0.0))
            throw ConfigError("poisson noise needs a positive photon scale");
        std::mt19937_64 rng(seed);
        for (double& v : img.v) {
            const double mean = std::max(0.0, v) * noise.param;
            std::poisson_distribution<long> pd(mean);
            v = (mean > 0.0) ? double(pd(rng)) / noise.param : 0.0;
        }
        break;
    }
    }
    return img;
}

Stack forward_stack(const Image& object, const Stack& patterns, const Kernel& det,
                    const NoiseSpec& noise, std::uint64_t seed) {
    patterns.validate();
    Stack out;
    out.grid = patterns.grid;
    out.shifts_um = patterns.shifts_um;
    out.members.reserve(patterns.members.size());
    for (std::size_t l = 0; l < patterns.members.size(); ++l) {
        // derive one stream per member so parallel generation stays reproducible
        std::seed_seq sq{seed, std::uint64_t(l)};
        std::mt19937_64 tmp(sq);
        out.members.push_back(forward(object, patterns.members[l], det, noise, tmp()));
    }
    return out;
}

} // namespace simrecon
