#include "doctest.h"

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "simrecon/fourier_ops.hpp"
#include "simrecon/metrics.hpp"
#include "simrecon/pattern_estimation.hpp"

using namespace simrecon;
using namespace testutil;

namespace {

OpticalConfig make_optics(int n) {
    OpticalConfig cfg;
    cfg.na = 0.8;
    cfg.lambda_illu = cfg.lambda_det = 0.532;
    cfg.grid = GridSpec{n, n, 0.532 / (8 * 0.8)};
    return cfg;
}

} // namespace

TEST_CASE("bilinear sampling is exact on a linear ramp") {
    const GridSpec g{16, 12, 0.1};
    Image img(g);
    for (int y = 0; y < 12; ++y)
        for (int x = 0; x < 16; ++x)
            img.at(x, y) = 0.7 + 0.3 * x - 0.2 * y;

    CHECK(sample_bilinear(img, 5.0, 7.0) == doctest::Approx(img.at(5, 7)).epsilon(1e-12));
    CHECK(sample_bilinear(img, 3.25, 8.5) ==
          doctest::Approx(0.7 + 0.3 * 3.25 - 0.2 * 8.5).epsilon(1e-12));
    // clamped outside the grid
    CHECK(sample_bilinear(img, -5.0, 2.0) == doctest::Approx(img.at(0, 2)).epsilon(1e-12));
    CHECK(sample_bilinear(img, 20.0, 2.0) == doctest::Approx(img.at(15, 2)).epsilon(1e-12));
}

TEST_CASE("azimuthal contrast reads a crisp star as fully modulated") {
    const OpticalConfig cfg = make_optics(256);
    const StarGeometry geom = star_geometry(cfg, 40);
    const Image star = siemens_star(cfg.grid, geom);

    // period ~9.4 px at this radius: well sampled, modulation barely damped
    CHECK(azimuthal_contrast(star, geom, 60.0) > 0.95);
    CHECK(azimuthal_contrast(star, geom, 100.0) > 0.95);

    Image flat(cfg.grid);
    for (double& v : flat.v) v = 3.0;
    CHECK(azimuthal_contrast(flat, geom, 60.0) < 1e-12);

    CHECK_THROWS_AS(azimuthal_contrast(star, geom, 60.0, 4), ConfigError);
    CHECK_THROWS_AS(azimuthal_contrast(star, geom, 0.0), ConfigError);
    CHECK_THROWS_AS(azimuthal_contrast(star, geom, 4.0), ConfigError);   // period < 1 px
    CHECK_THROWS_AS(azimuthal_contrast(star, geom, 140.0), ConfigError); // leaves image
}

TEST_CASE("mtf of a blurred star rises with the period") {
    const OpticalConfig cfg = make_optics(256);
    const Kernel det = make_kernel(cfg, Side::detection);
    const StarGeometry geom = star_geometry(cfg, 40);
    const Image blurred = convolve(siemens_star(cfg.grid, geom), det);
    const double abbe = cfg.lambda_det / (2.0 * cfg.na);

    const MtfCurve curve = mtf_curve(blurred, geom, abbe);
    REQUIRE(curve.points.size() >= 20);
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        CHECK(curve.points[i].period_um > curve.points[i - 1].period_um);
        CHECK(curve.points[i].radius_px > curve.points[i - 1].radius_px);
    }
    // in the resolved regime the star reads the transfer function directly;
    // sampling the finite annulus shaves a few percent off the analytic value
    const MtfPoint& outer = curve.points.back();
    const double otf_outer = incoherent_otf(1.0 / outer.period_um, cfg.na, cfg.lambda_det);
    CHECK(outer.contrast == doctest::Approx(otf_outer).epsilon(0.15));
    CHECK(outer.contrast > 0.15);
    // below the diffraction period only a pixelation floor remains
    CHECK(curve.points.front().contrast < 0.05);

    // contrast rises with period wherever it is clearly above that floor
    int rising = 0, total = 0;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        if (curve.points[i].contrast < 0.02 || curve.points[i - 1].contrast < 0.02) continue;
        ++total;
        if (curve.points[i].contrast >= curve.points[i - 1].contrast) ++rising;
    }
    CHECK(total > 20);
    CHECK(rising > int(0.9 * double(total)));

    CHECK_THROWS_AS(mtf_curve(blurred, geom, -1.0), ConfigError);
    CHECK_THROWS_AS(mtf_curve(blurred, geom, abbe, 0.5, 0.4), ConfigError);
}

TEST_CASE("blurred and deconvolved stars land at their textbook resolutions") {
    const OpticalConfig cfg = make_optics(256);
    const Kernel det = make_kernel(cfg, Side::detection);
    const StarGeometry geom = star_geometry(cfg, 40);
    const Image star = siemens_star(cfg.grid, geom);
    const double abbe = cfg.lambda_det / (2.0 * cfg.na);

    const Image wf = convolve(star, det);
    const auto res_wf = resolution_at(mtf_curve(wf, geom, abbe), 0.01);
    REQUIRE(res_wf.has_value());
    CHECK(*res_wf / abbe == doctest::Approx(1.035).epsilon(0.10));

    const Image dwf = estimate_object(wf, det, 1e-3);
    const auto res_dwf = resolution_at(mtf_curve(dwf, geom, abbe), 0.01);
    REQUIRE(res_dwf.has_value());
    CHECK(*res_dwf / abbe == doctest::Approx(0.844).epsilon(0.10));
    CHECK(*res_dwf < *res_wf);
}

TEST_CASE("resolution readout picks the outermost threshold crossing") {
    MtfCurve c;
    c.abbe_um = 0.3;
    auto add = [&](double period, double contrast) {
        MtfPoint p;
        p.radius_px = period * 10;
        p.period_um = period;
        p.contrast = contrast;
        c.points.push_back(p);
    };
    add(1.0, 0.5);
    add(2.0, 0.005);
    add(3.0, 0.02);
    add(4.0, 0.3);

    const auto res = resolution_at(c, 0.01);
    REQUIRE(res.has_value());
    // crossing interpolated between the 0.005 and 0.02 samples, not the inner
    // stretch that happens to sit above threshold
    CHECK(*res == doctest::Approx(2.0 + (0.01 - 0.005) / (0.02 - 0.005)).epsilon(1e-12));

    MtfCurve always;
    always.abbe_um = 0.3;
    c.points.clear();
    add(1.0, 0.2);
    add(2.0, 0.6);
    always.points = c.points;
    CHECK(*resolution_at(always, 0.01) == doctest::Approx(1.0));

    MtfCurve dead;
    dead.abbe_um = 0.3;
    c.points.clear();
    add(1.0, 0.002);
    add(2.0, 0.004);
    dead.points = c.points;
    CHECK_FALSE(resolution_at(dead, 0.01).has_value());

    CHECK_THROWS_AS(resolution_at(always, 0.0), ConfigError);
    MtfCurve tiny;
    tiny.points.resize(1);
    CHECK_THROWS_AS(resolution_at(tiny, 0.01), ConfigError);
}

TEST_CASE("profile width readout agrees with an analytic gaussian") {
    const double fwhm = 7.3, dx = 0.1;
    const double a = 4.0 * std::log(2.0) / (fwhm * fwhm);
    std::vector<double> y;
    for (int i = 0; i < 64; ++i) {
        const double x = i - 30.0;
        y.push_back(std::exp(-a * x * x));
    }
    CHECK(profile_fwhm(y, dx) == doctest::Approx(fwhm * dx).epsilon(2e-3));

    std::vector<double> edge = {1.0, 0.5, 0.1};
    CHECK_THROWS_AS(profile_fwhm(edge, 1.0), NumericError); // peak on the boundary
    std::vector<double> flat = {0.1, 1.0, 0.9, 1.0, 0.1};
    CHECK_NOTHROW(profile_fwhm(flat, 1.0));
    std::vector<double> high = {0.9, 1.0, 0.9};
    CHECK_THROWS_AS(profile_fwhm(high, 1.0), NumericError); // never falls to half
    CHECK_THROWS_AS(profile_fwhm({1.0, 2.0}, 1.0), ConfigError);
    CHECK_THROWS_AS(profile_fwhm(flat, 0.0), ConfigError);
}

TEST_CASE("two-gaussian dip calibration is monotone and round-trips") {
    CHECK(separation_to_dip(0.5) == 0.0); // merged: no dip below the split point
    CHECK(separation_to_dip(0.84) == 0.0);
    CHECK(separation_to_dip(1.0) > 0.0);
    CHECK(separation_to_dip(1.5) > separation_to_dip(1.2));

    for (double s = 0.9; s <= 3.5; s += 0.13) {
        const double c = separation_to_dip(s);
        CHECK(dip_to_separation(c) == doctest::Approx(s).epsilon(2e-3));
    }
    CHECK_THROWS_AS(dip_to_separation(0.0), NumericError);
    CHECK_THROWS_AS(dip_to_separation(1.0), NumericError);
    CHECK_THROWS_AS(separation_to_dip(-1.0), ConfigError);
}

TEST_CASE("two-point readout finds peaks, dip, and the implied width") {
    const GridSpec g{64, 40, 0.05};
    const double fwhm_px = 5.0, sep_px = 10.0;
    const double a = 4.0 * std::log(2.0) / (fwhm_px * fwhm_px);
    Image img(g);
    for (int y = 0; y < 40; ++y)
        for (int x = 0; x < 64; ++x) {
            const double dy = y - 21.0;
            const double dl = x - (32.0 - 0.5 * sep_px);
            const double dr = x - (32.0 + 0.5 * sep_px);
            img.at(x, y) = (std::exp(-a * dl * dl) + std::exp(-a * dr * dr)) *
                           std::exp(-a * dy * dy);
        }

    const TwoPointReading r = two_point_analysis(img);
    CHECK(r.resolved);
    CHECK(r.cut_row == 21);
    CHECK(r.separation_um == doctest::Approx(sep_px * g.pitch).epsilon(0.01));
    CHECK(r.dip_contrast == doctest::Approx(separation_to_dip(sep_px / fwhm_px)).epsilon(0.05));
    CHECK(r.implied_fwhm_um == doctest::Approx(fwhm_px * g.pitch).epsilon(0.02));

    // merged pair: a single broad bump must not read as resolved
    Image merged(g);
    for (int y = 0; y < 40; ++y)
        for (int x = 0; x < 64; ++x) {
            const double dy = y - 21.0;
            const double dl = x - 31.0, dr = x - 33.0;
            merged.at(x, y) = (std::exp(-a * dl * dl) + std::exp(-a * dr * dr)) *
                              std::exp(-a * dy * dy);
        }
    CHECK_FALSE(two_point_analysis(merged).resolved);

    CHECK_THROWS_AS(two_point_analysis(Image(g)), NumericError); // no signal
}

TEST_CASE("a point pair at the diffraction period dips to about one percent") {
    const OpticalConfig cfg = make_optics(64);
    const Kernel det = make_kernel(cfg, Side::detection);
    const double abbe = cfg.lambda_det / (2.0 * cfg.na); // exactly 4 px here
    int d = 0;
    const Image img = convolve(two_point(cfg, abbe, &d), det);
    CHECK(d == 4);

    const TwoPointReading r = two_point_analysis(img);
    CHECK(r.resolved);
    CHECK(r.dip_contrast > 0.005);
    CHECK(r.dip_contrast < 0.015);
}

TEST_CASE("bead size removal works in quadrature") {
    CHECK(subtract_bead(0.5, 0.3) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(subtract_bead(0.5, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(subtract_bead(0.2, 0.3), NumericError);
    CHECK_THROWS_AS(subtract_bead(0.0, 0.1), ConfigError);
}
