#include "simrecon/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace simrecon {

double sample_bilinear(const Image& img, double x, double y) {
    const int w = img.grid.width, h = img.grid.height;
    x = std::clamp(x, 0.0, double(w - 1));
    y = std::clamp(y, 0.0, double(h - 1));
    const int x0 = std::min(int(x), w - 2), y0 = std::min(int(y), h - 2);
    const double fx = x - x0, fy = y - y0;
    return (1 - fx) * (1 - fy) * img.at(x0, y0) + fx * (1 - fy) * img.at(x0 + 1, y0) +
           (1 - fx) * fy * img.at(x0, y0 + 1) + fx * fy * img.at(x0 + 1, y0 + 1);
}

double azimuthal_contrast(const Image& img, const StarGeometry& geom, double radius_px,
                          int samples_per_period) {
    if (samples_per_period < 8)
        throw ConfigError("azimuthal profile needs at least 8 samples per period");
    if (!(radius_px > 0.0))
        throw ConfigError("azimuthal profile radius must be positive");
    // the arc length of one period must span at least a pixel to be readable
    if (geom.period_at_radius(radius_px) < 1.0)
        throw ConfigError("azimuthal profile radius too small: spoke period below one pixel");
    if (geom.cx - radius_px < 0 || geom.cx + radius_px > img.grid.width - 1 ||
        geom.cy - radius_px < 0 || geom.cy + radius_px > img.grid.height - 1)
        throw ConfigError("azimuthal profile circle leaves the image");

    // modulation at the spoke frequency: Michelson contrast of the ring
    // profile's first harmonic, 2|c_N|/c_0, so a sinusoidal ring of contrast
    // C reads C.  Reading one harmonic keeps the noise floor far below
    // extreme-value statistics of the raw profile.
    const int m = geom.spokes * samples_per_period;
    double re = 0.0, im = 0.0, dc = 0.0;
    for (int i = 0; i < m; ++i) {
        const double theta = 2.0 * std::numbers::pi * i / double(m);
        const double v = sample_bilinear(img, geom.cx + radius_px * std::cos(theta),
                                         geom.cy + radius_px * std::sin(theta));
        re += v * std::cos(geom.spokes * theta);
        im += v * std::sin(geom.spokes * theta);
        dc += v;
    }
    if (!(dc > 0.0)) return 0.0;
    return 2.0 * std::hypot(re, im) / dc;
}

MtfCurve mtf_curve(const Image& img, const StarGeometry& geom, double abbe_um,
                   double min_rel, double max_rel, double step_rel) {
    if (!(abbe_um > 0.0) || !(min_rel > 0.0) || !(max_rel > min_rel) || !(step_rel > 0.0))
        throw ConfigError("mtf_curve: bad sweep range");
    MtfCurve curve;
    curve.abbe_um = abbe_um;
    const double pitch = img.grid.pitch;
    for (double rel = min_rel; rel <= max_rel + 1e-9; rel += step_rel) {
        const double period_px = rel * abbe_um / pitch;
        const double r = geom.radius_for_period(period_px);
        if (r < geom.inner_px || r > geom.outer_px) continue;
        if (geom.period_at_radius(r) < 1.0) continue;
        MtfPoint pt;
        pt.radius_px = r;
        pt.period_um = period_px * pitch;
        pt.contrast = azimuthal_contrast(img, geom, r);
        curve.points.push_back(pt);
    }
    if (curve.points.size() < 2)
        throw ConfigError("mtf_curve: sweep produced fewer than two readable radii");
    return curve;
}

std::optional<double> resolution_at(const MtfCurve& curve, double threshold) {
    if (!(threshold > 0.0))
        throw ConfigError("resolution threshold must be positive");
    if (curve.points.size() < 2)
        throw ConfigError("resolution_at: curve too short");
    const auto& p = curve.points;
    const int n = int(p.size());
    if (p[n - 1].contrast < threshold) {
        // the largest sampled period is already below threshold: nothing resolved
        return std::nullopt;
    }
    for (int i = n - 2; i >= 0; --i) {
        if (p[i].contrast < threshold) {
            const double c0 = p[i].contrast, c1 = p[i + 1].contrast;
            const double t = (threshold - c0) / (c1 - c0);
            return p[i].period_um + t * (p[i + 1].period_um - p[i].period_um);
        }
    }
    // above threshold everywhere: resolution is at least the innermost sample
    return p.front().period_um;
}

double profile_fwhm(const std::vector<double>& y, double dx) {
    if (y.size() < 3 || !(dx > 0.0))
        throw ConfigError("profile_fwhm: need at least 3 samples and a positive spacing");
    const auto it = std::max_element(y.begin(), y.end());
    const int im = int(it - y.begin());
    const double half = 0.5 * *it;
    if (!(*it > 0.0))
        throw NumericError("profile_fwhm: profile has no positive peak");
    if (im == 0 || im == int(y.size()) - 1)
        throw NumericError("profile_fwhm: peak sits on the profile boundary");

    auto crossing = [&](int dir) -> double {
        for (int i = im; i + dir >= 0 && i + dir < int(y.size()); i += dir) {
            const double a = y[i], b = y[i + dir];
            if (b < half && a >= half)
                return i + dir * (a - half) / (a - b);
        }
        throw NumericError("profile_fwhm: no half-maximum crossing on one side");
    };
    return (crossing(+1) - crossing(-1)) * dx;
}

namespace {

constexpr double kGaussA = 4.0 * 0.693147180559945309417; // 4 ln 2, FWHM-1 Gaussian

double two_gauss(double x, double s) {
    return std::exp(-kGaussA * (x - 0.5 * s) * (x - 0.5 * s)) +
           std::exp(-kGaussA * (x + 0.5 * s) * (x + 0.5 * s));
}

struct DipTable {
    std::vector<double> s, c;
    DipTable() {
        for (double sep = 0.85; sep <= 4.0; sep += 1e-3) {
            // peak near x = s/2; golden-section search on [0, s]
            double lo = 0.0, hi = sep;
            const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
            double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
            double f1 = two_gauss(x1, sep), f2 = two_gauss(x2, sep);
            for (int i = 0; i < 80; ++i) {
                if (f1 < f2) {
                    lo = x1; x1 = x2; f1 = f2;
                    x2 = lo + gr * (hi - lo); f2 = two_gauss(x2, sep);
                } else {
                    hi = x2; x2 = x1; f2 = f1;
                    x1 = hi - gr * (hi - lo); f1 = two_gauss(x1, sep);
                }
            }
            const double peak = std::max(f1, f2);
            const double dip = two_gauss(0.0, sep);
            const double contrast = (peak > dip) ? (peak - dip) / (peak + dip) : 0.0;
            if (!c.empty() && contrast <= c.back()) continue; // keep strictly monotone
            s.push_back(sep);
            c.push_back(contrast);
        }
    }
};

const DipTable& dip_table() {
    static const DipTable t;
    return t;
}

} // namespace

double separation_to_dip(double s_fwhm) {
    if (!(s_fwhm >= 0.0))
        throw ConfigError("separation must be nonnegative");
    const double peak = [&] {
        double best = 0.0;
        for (double x = 0.0; x <= s_fwhm + 1.0; x += 1e-4)
            best = std::max(best, two_gauss(x, s_fwhm));
        return best;
    }();
    const double dip = two_gauss(0.0, s_fwhm);
    return (peak > dip) ? (peak - dip) / (peak + dip) : 0.0;
}

double dip_to_separation(double contrast) {
    const auto& t = dip_table();
    if (!(contrast > 0.0))
        throw NumericError("dip contrast is not positive: peaks are unresolved");
    if (contrast >= t.c.back())
        throw NumericError("dip contrast outside the calibrated range (peaks fully split)");
    const auto it = std::lower_bound(t.c.begin(), t.c.end(), contrast);
    if (it == t.c.begin()) return t.s.front();
    const int i = int(it - t.c.begin());
    const double f = (contrast - t.c[i - 1]) / (t.c[i] - t.c[i - 1]);
    return t.s[i - 1] + f * (t.s[i] - t.s[i - 1]);
}

TwoPointReading two_point_analysis(const Image& img) {
    const int w = img.grid.width, h = img.grid.height;
    if (w < 5 || h < 1)
        throw ConfigError("two_point_analysis: image too small");

    // cut through the brightest pixel's row
    std::size_t imax = 0;
    for (std::size_t i = 1; i < img.size(); ++i)
        if (img.v[i] > img.v[imax]) imax = i;
    const int row = int(imax) / w;

    std::vector<double> y(std::size_t(w), 0.0);
    for (int x = 0; x < w; ++x) y[std::size_t(x)] = img.at(x, row);
    const double ymax = *std::max_element(y.begin(), y.end());
    if (!(ymax > 0.0))
        throw NumericError("two_point_analysis: cut has no signal");

    // local maxima above a fraction of the global peak
    std::vector<int> peaks;
    for (int x = 1; x + 1 < w; ++x)
        if (y[x] >= y[x - 1] && y[x] > y[x + 1] && y[x] > 0.2 * ymax)
            peaks.push_back(x);

    TwoPointReading out;
    out.cut_row = row;
    if (peaks.size() != 2) {
        out.resolved = false;
        return out;
    }

    auto refine = [&](int i) {
        const double d = y[i - 1] - 2.0 * y[i] + y[i + 1];
        const double off = (std::abs(d) > 1e-300) ? 0.5 * (y[i - 1] - y[i + 1]) / d : 0.0;
        return double(i) + std::clamp(off, -0.5, 0.5);
    };
    const double xl = refine(peaks[0]), xr = refine(peaks[1]);
    const double pl = y[peaks[0]], pr = y[peaks[1]];

    // dip between the two peaks
    int dip_i = peaks[0];
    for (int x = peaks[0]; x <= peaks[1]; ++x)
        if (y[x] < y[dip_i]) dip_i = x;
    double dip = y[dip_i];
    if (dip_i > 0 && dip_i + 1 < w) {
        const double d = y[dip_i - 1] - 2.0 * y[dip_i] + y[dip_i + 1];
        if (std::abs(d) > 1e-300) {
            const double off = std::clamp(0.5 * (y[dip_i - 1] - y[dip_i + 1]) / d, -0.5, 0.5);
            dip = y[dip_i] - 0.25 * (y[dip_i - 1] - y[dip_i + 1]) * off;
        }
    }

    const double peak_mean = 0.5 * (pl + pr);
    out.resolved = dip < peak_mean;
    out.separation_um = (xr - xl) * img.grid.pitch;
    out.dip_contrast = (peak_mean + dip > 0.0) ? (peak_mean - dip) / (peak_mean + dip) : 0.0;
    if (out.resolved && out.dip_contrast > 0.0) {
        try {
            out.implied_fwhm_um = out.separation_um / dip_to_separation(out.dip_contrast);
        } catch (const NumericError&) {
            out.implied_fwhm_um = 0.0; // outside the calibrated lookup
        }
    }
    return out;
}

double subtract_bead(double measured_fwhm_um, double bead_diameter_um) {
    if (!(measured_fwhm_um > 0.0) || bead_diameter_um < 0.0)
        throw ConfigError("subtract_bead: bad inputs");
    if (measured_fwhm_um <= bead_diameter_um)
        throw NumericError("subtract_bead: measured width not larger than the emitter");
    return std::sqrt(measured_fwhm_um * measured_fwhm_um -
                     bead_diameter_um * bead_diameter_um);
}

} // namespace simrecon
