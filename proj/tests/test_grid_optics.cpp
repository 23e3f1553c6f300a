#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>

#include "helpers.hpp"
#include "simrecon/fft.hpp"
#include "simrecon/fourier_ops.hpp"
#include "simrecon/optics.hpp"

using namespace simrecon;
using namespace testutil;

namespace {

OpticalConfig tiny_optics(int n = 32) {
    OpticalConfig cfg;
    cfg.na = 0.8;
    cfg.lambda_illu = cfg.lambda_det = 0.532;
    cfg.grid = GridSpec{n, n, 0.532 / (8 * 0.8)};
    return cfg;
}

} // namespace

TEST_CASE("grid validation rejects bad specs") {
    CHECK_THROWS_AS((GridSpec{0, 4, 0.1}.validate()), ConfigError);
    CHECK_THROWS_AS((GridSpec{4, -1, 0.1}.validate()), ConfigError);
    CHECK_THROWS_AS((GridSpec{4, 4, 0.0}.validate()), ConfigError);
    CHECK_NOTHROW((GridSpec{4, 4, 0.1}.validate()));
}

TEST_CASE("fft round trip and parseval") {
    const GridSpec g{24, 18, 0.05};
    const Image img = random_image(g, 7);
    const Spectrum s = fft::forward(img);
    const Image back = fft::inverse(s);
    CHECK(max_abs_diff(img, back) < 1e-12);

    double space = 0.0;
    for (double v : img.v) space += v * v;
    double freq = 0.0;
    for (auto& c : s.v) freq += std::norm(c);
    freq /= double(g.pixels());
    CHECK(std::abs(space - freq) / space < 1e-12);
}

TEST_CASE("half-plane transforms match the full ones") {
    const GridSpec g{20, 14, 0.1};
    const Image img = random_image(g, 11);
    fft::HalfSpectrum hs;
    fft::forward_r2c(img, hs);
    const Spectrum full = fft::forward(img);
    for (int ky = 0; ky < g.height; ++ky)
        for (int kx = 0; kx <= g.width / 2; ++kx) {
            const auto a = hs.v[std::size_t(ky) * hs.cols() + kx];
            const auto b = full.at(kx, ky);
            CHECK(std::abs(a - b) < 1e-10);
        }
    Image back(g);
    fft::inverse_c2r(hs, back);
    CHECK(max_abs_diff(img, back) < 1e-12);
}

TEST_CASE("convolution matches the direct sum") {
    const GridSpec g{16, 16, 0.05};
    const Image a = random_image(g, 1), b = random_image(g, 2);
    const Image fast = convolve(a, b);
    const Image slow = conv_brute(a, b);
    CHECK(max_abs_diff(fast, slow) < 1e-10);
}

TEST_CASE("correlation matches the direct sum") {
    const GridSpec g{12, 16, 0.05};
    const Image a = random_image(g, 3), b = random_image(g, 4);
    const Image fast = cross_correlate(a, b);
    const Image slow = corr_brute(a, b);
    CHECK(max_abs_diff(fast, slow) < 1e-10);
}

TEST_CASE("kernel convolution uses the stored transfer function") {
    const OpticalConfig cfg = tiny_optics(32);
    const Kernel k = make_kernel(cfg, Side::detection);
    const Image a = random_image(cfg.grid, 5);
    const Image via_kernel = convolve(a, k);
    const Image via_psf = convolve(a, k.psf);
    CHECK(max_abs_diff(via_kernel, via_psf) < 1e-9);
}

TEST_CASE("tikhonov deconvolution inverts blur down to the regularizer") {
    const OpticalConfig cfg = tiny_optics(32);
    const Kernel k = make_kernel(cfg, Side::detection);
    Image obj(cfg.grid);
    obj.at(16, 16) = 1.0;
    obj.at(20, 12) = 0.5;
    const Image blurred = convolve(obj, k);
    const Image sharp = tikhonov_deconvolve(blurred, k.otf, 1e-6);
    // energy should concentrate back onto the impulse; the bandlimit caps the
    // restored peak at the in-band area fraction (~pi/16 here), so the gain
    // over the blurred peak tops out just under 4x
    CHECK(sharp.at(16, 16) > 3.5 * blurred.at(16, 16));
    CHECK(sharp.at(16, 16) > sharp.at(24, 24) * 10.0);

    SUBCASE("spectrum formula") {
        const Image img = random_image(cfg.grid, 6);
        const double reg = 1e-3;
        const Image out = tikhonov_deconvolve(img, k.otf, reg);
        const Spectrum si = fft::forward(img);
        Spectrum expect(cfg.grid);
        for (std::size_t i = 0; i < expect.size(); ++i)
            expect.v[i] =
                si.v[i] * std::conj(k.otf.v[i]) / (std::norm(k.otf.v[i]) + reg);
        const Image expect_img = fft::inverse(expect);
        CHECK(max_abs_diff(out, expect_img) < 1e-10);
    }

    SUBCASE("zero regularizer demands an invertible transfer") {
        const Image img = random_image(cfg.grid, 8);
        CHECK_THROWS_AS(tikhonov_deconvolve(img, k.otf, 0.0), NumericError);
        CHECK_THROWS_AS(tikhonov_deconvolve(img, k.otf, -1.0), ConfigError);
    }
}

TEST_CASE("fourier shift: integer shifts reproduce rolls exactly") {
    const GridSpec g{16, 16, 0.05};
    const Image img = random_image(g, 9);
    const Image shifted = fourier_shift(img, 3 * g.pitch, -2 * g.pitch);
    const Image rolled = roll(img, 3, -2);
    CHECK(max_abs_diff(shifted, rolled) < 1e-10);
}

TEST_CASE("fourier shift: half-pixel round trip is the identity on bandlimited content") {
    const OpticalConfig cfg = tiny_optics(32);
    const Kernel k = make_kernel(cfg, Side::detection);
    const Image img = convolve(random_image(cfg.grid, 10), k); // bandlimited
    const Image there = fourier_shift(img, 0.5 * cfg.grid.pitch, 0.0);
    const Image back = fourier_shift(there, -0.5 * cfg.grid.pitch, 0.0);
    CHECK(max_abs_diff(img, back) < 1e-10);

    SUBCASE("two quarter shifts compose to a half shift") {
        const Image one = fourier_shift(img, 0.5 * cfg.grid.pitch, 0.25 * cfg.grid.pitch);
        const Image two = fourier_shift(
            fourier_shift(img, 0.25 * cfg.grid.pitch, 0.25 * cfg.grid.pitch),
            0.25 * cfg.grid.pitch, 0.0);
        CHECK(max_abs_diff(one, two) < 1e-10);
    }
}

TEST_CASE("detection kernel invariants") {
    OpticalConfig cfg;
    cfg.na = 0.8;
    cfg.lambda_illu = cfg.lambda_det = 0.532;
    cfg.grid = GridSpec{256, 256, 0.532 / (8 * 0.8)};
    const Kernel k = make_kernel(cfg, Side::detection);

    SUBCASE("normalization: unit-sum psf and unit dc transfer") {
        double sum = 0.0;
        for (double v : k.psf.v) {
            CHECK(v >= 0.0);
            sum += v;
        }
        CHECK(std::abs(sum - 1.0) < 1e-9);
        CHECK(std::abs(k.otf.at(0, 0).real() - 1.0) < 1e-9);
        CHECK(std::abs(k.otf.at(0, 0).imag()) < 1e-12);
    }

    SUBCASE("band limit is exact") {
        CHECK(k.cutoff == doctest::Approx(2 * 0.8 / 0.532));
        for (int ky = 0; ky < cfg.grid.height; ++ky)
            for (int kx = 0; kx < cfg.grid.width; ++kx) {
                const double f = std::hypot(bin_freq(kx, cfg.grid.width, cfg.grid.pitch),
                                            bin_freq(ky, cfg.grid.height, cfg.grid.pitch));
                if (f >= k.cutoff)
                    CHECK(std::abs(k.otf.at(kx, ky)) == 0.0);
            }
        // a frequency just above cutoff: 3.10 cyc/um vs cutoff 3.0075
        CHECK(incoherent_otf(3.10, 0.8, 0.532) == 0.0);
        CHECK(incoherent_otf(2.9, 0.8, 0.532) > 0.0);
    }

    SUBCASE("transfer is real and radially decreasing along the axis") {
        double prev = 1.0;
        for (int kx = 1; kx <= cfg.grid.width / 2; ++kx) {
            const auto c = k.otf.at(kx, 0);
            CHECK(std::abs(c.imag()) < 1e-12);
            CHECK(c.real() <= prev + 1e-12);
            prev = c.real();
        }
    }

    SUBCASE("fwhm matches a dense sampling of the analytic profile") {
        // independent oracle: scan the radial intensity for the half crossing
        const double dr = 1e-6;
        double r = 0.0;
        while (airy_intensity(r, cfg.na, cfg.lambda_det) > 0.5) r += dr;
        const double fwhm_scan = 2.0 * r;
        CHECK(std::abs(k.fwhm - fwhm_scan) < 1e-4);
        CHECK(k.fwhm == doctest::Approx(0.5145 * 0.532 / 0.8).epsilon(1e-3));

        // the sampled psf central lobe agrees with the analytic width
        std::vector<double> profile;
        const Image centered = roll(k.psf, cfg.grid.width / 2, cfg.grid.height / 2);
        for (int x = 0; x < cfg.grid.width; ++x)
            profile.push_back(centered.at(x, cfg.grid.height / 2));
        // (interpolated discrete reading is within a few percent of analytic)
        const double fw = [&] {
            const int c = cfg.grid.width / 2;
            const double half = 0.5 * centered.at(c, cfg.grid.height / 2);
            double left = 0, right = 0;
            for (int x = c; x < cfg.grid.width; ++x)
                if (centered.at(x, cfg.grid.height / 2) < half) {
                    const double a = centered.at(x - 1, cfg.grid.height / 2);
                    const double b = centered.at(x, cfg.grid.height / 2);
                    right = x - 1 + (a - half) / (a - b);
                    break;
                }
            for (int x = c; x >= 0; --x)
                if (centered.at(x, cfg.grid.height / 2) < half) {
                    const double a = centered.at(x + 1, cfg.grid.height / 2);
                    const double b = centered.at(x, cfg.grid.height / 2);
                    left = x + 1 - (a - half) / (a - b);
                    break;
                }
            return (right - left) * cfg.grid.pitch;
        }();
        CHECK(fw == doctest::Approx(k.fwhm).epsilon(0.03));
    }

    SUBCASE("pitch too coarse for the band errors out") {
        OpticalConfig bad = cfg;
        bad.grid.pitch = 0.5; // nyquist 1 cyc/um < cutoff 3.0
        CHECK_THROWS_AS(make_kernel(bad, Side::detection), ConfigError);
    }
}

TEST_CASE("abbe period is four pixels on the default grid") {
    OpticalConfig cfg;
    cfg.grid = GridSpec{256, 256, 0.532 / (8 * 0.8)};
    const double abbe = cfg.lambda_det / (2 * cfg.na);
    CHECK(abbe / cfg.grid.pitch == doctest::Approx(4.0));
}
