#include "simrecon/phantoms.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <utility>

namespace simrecon {

double StarGeometry::radius_for_period(double period_px) const {
    return double(spokes) * period_px / (2.0 * std::numbers::pi);
}

double StarGeometry::period_at_radius(double r_px) const {
    return 2.0 * std::numbers::pi * r_px / double(spokes);
}

StarGeometry star_geometry(const OpticalConfig& cfg, int spokes) {
    cfg.validate();
    if (spokes < 4 || spokes % 2 != 0)
        throw ConfigError("spoke target needs an even spoke count >= 4");
    StarGeometry g;
    g.spokes = spokes;
    g.cx = cfg.grid.width / 2;
    g.cy = cfg.grid.height / 2;
    const double fwhm_px = airy_fwhm(cfg.na, cfg.lambda_det) / cfg.grid.pitch;
    const double half = 0.5 * std::min(cfg.grid.width, cfg.grid.height);
    g.outer_px = half - 2.5 * fwhm_px;
    if (g.outer_px < 4.0 * fwhm_px)
        throw ConfigError("grid too small for a spoke target with a dark border");
    const double abbe_px = cfg.lambda_det / (2.0 * cfg.na) / cfg.grid.pitch;
    g.inner_px = g.radius_for_period(0.25 * abbe_px);
    return g;
}

Image siemens_star(const GridSpec& grid, const StarGeometry& geom) {
    grid.validate();
    Image img(grid);
    for (int y = 0; y < grid.height; ++y) {
        for (int x = 0; x < grid.width; ++x) {
            const double dx = x - geom.cx, dy = y - geom.cy;
            const double r = std::hypot(dx, dy);
            if (r < geom.inner_px || r > geom.outer_px) continue;
            const double theta = std::atan2(dy, dx);
            img.at(x, y) = 1.0 + std::cos(geom.spokes * theta);
        }
    }
    return img;
}

Image siemens_star(const OpticalConfig& cfg, int spokes) {
    return siemens_star(cfg.grid, star_geometry(cfg, spokes));
}

Image two_point(const OpticalConfig& cfg, double separation_um, int* realized_px) {
    cfg.validate();
    if (!(separation_um > 0.0))
        throw ConfigError("two_point: separation must be positive");
    const int d = int(std::lround(separation_um / cfg.grid.pitch));
    if (d < 1)
        throw ConfigError("two_point: separation rounds to less than one pixel");
    const int cx = cfg.grid.width / 2, cy = cfg.grid.height / 2;
    const int left = cx - d / 2;
    const int right = left + d;
    if (left < 0 || right >= cfg.grid.width)
        throw ConfigError("two_point: separation does not fit on the grid");
    Image img(cfg.grid);
    img.at(left, cy) = 1.0;
    img.at(right, cy) = 1.0;
    if (realized_px) *realized_px = d;
    return img;
}

Image bead_field(const OpticalConfig& cfg, int n, double diameter_um, std::uint64_t seed) {
    cfg.validate();
    if (n <= 0) throw ConfigError("bead_field: need at least one bead");
    if (!(diameter_um > 0.0)) throw ConfigError("bead_field: diameter must be positive");
    const double rad_px = 0.5 * diameter_um / cfg.grid.pitch;
    const double fwhm_px = airy_fwhm(cfg.na, cfg.lambda_det) / cfg.grid.pitch;
    const double margin = rad_px + 2.0 * fwhm_px;
    const int w = cfg.grid.width, h = cfg.grid.height;
    if (2.0 * margin >= std::min(w, h))
        throw ConfigError("bead_field: grid too small for the requested bead size");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(margin, w - margin), uy(margin, h - margin);
    std::vector<std::pair<double, double>> centers;
    const double min_dist = 2.0 * rad_px + 1.0;
    long tries = 0, max_tries = 1000L * n;
    while (int(centers.size()) < n) {
        if (++tries > max_tries)
            throw ConfigError("bead_field: could not place beads without overlap; "
                              "reduce count or diameter");
        const double x = ux(rng), y = uy(rng);
        bool ok = true;
        for (auto& c : centers)
            if (std::hypot(x - c.first, y - c.second) < min_dist) { ok = false; break; }
        if (ok) centers.emplace_back(x, y);
    }

    Image img(cfg.grid);
    for (auto& c : centers) {
        const int x0 = std::max(0, int(std::floor(c.first - rad_px - 1)));
        const int x1 = std::min(w - 1, int(std::ceil(c.first + rad_px + 1)));
        const int y0 = std::max(0, int(std::floor(c.second - rad_px - 1)));
        const int y1 = std::min(h - 1, int(std::ceil(c.second + rad_px + 1)));
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x)
                if (std::hypot(x - c.first, y - c.second) <= rad_px)
                    img.at(x, y) = 1.0;
    }
    return img;
}

} // namespace simrecon
