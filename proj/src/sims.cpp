#include "simrecon/sims.hpp"

#include <cmath>

#include "simrecon/fft.hpp"

namespace simrecon {

namespace {

void require_paired(const Stack& measurements, const Stack& patterns) {
    measurements.validate();
    patterns.validate();
    require_same_grid(measurements.grid, patterns.grid, "covariance");
    if (measurements.count() != patterns.count())
        throw ConfigError("covariance: measurement and pattern stacks differ in length");
    if (measurements.count() < 2)
        throw ConfigError("covariance needs at least two stack members");
}

void finalize_kernel(EffectiveKernel& k) {
    double sum = 0.0;
    for (double& v : k.psf.v) {
        if (v < 0.0) v = 0.0;
        sum += v;
    }
    if (!(sum > 0.0))
        throw NumericError("effective kernel collapsed to zero");
    for (double& v : k.psf.v) v /= sum;
    k.otf = fft::forward(k.psf);
    for (auto& c : k.otf.v) c = c.real();
}

} // namespace

Image stack_mean(const Stack& st) {
    st.validate();
    Image m(st.grid);
    for (const Image& im : st.members)
        for (std::size_t i = 0; i < m.size(); ++i)
            m.v[i] += im.v[i];
    const double inv = 1.0 / double(st.count());
    for (double& v : m.v) v *= inv;
    return m;
}

Image covariance_image(const Stack& measurements, const Stack& patterns,
                       int shift_x, int shift_y) {
    require_paired(measurements, patterns);
    return covariance_image(measurements, patterns, stack_mean(measurements),
                            stack_mean(patterns), shift_x, shift_y);
}

Image covariance_image(const Stack& measurements, const Stack& patterns,
                       const Image& i_mean, const Image& p_mean,
                       int shift_x, int shift_y) {
    require_paired(measurements, patterns);
    require_same_grid(i_mean.grid, measurements.grid, "covariance means");
    require_same_grid(p_mean.grid, measurements.grid, "covariance means");

    const int w = measurements.grid.width, h = measurements.grid.height;
    const int n = measurements.count();
    Image acc(measurements.grid);
    for (int l = 0; l < n; ++l) {
        const Image& p = patterns.members[l];
        const Image& im = measurements.members[l];
        for (int y = 0; y < h; ++y) {
            int ys = y - shift_y;
            ys %= h; if (ys < 0) ys += h;
            const std::size_t row = std::size_t(y) * w;
            const std::size_t srow = std::size_t(ys) * w;
            for (int x = 0; x < w; ++x) {
                int xs = x - shift_x;
                xs %= w; if (xs < 0) xs += w;
                const double dp = p.v[srow + xs] - p_mean.v[srow + xs];
                const double di = im.v[row + x] - i_mean.v[row + x];
                acc.v[row + x] += dp * di;
            }
        }
    }
    const double inv = 1.0 / double(n);
    for (double& v : acc.v) v *= inv;
    return acc;
}

EffectiveKernel covariance_kernel(const Kernel& illu, const Kernel& det) {
    require_same_grid(illu.grid, det.grid, "covariance_kernel");
    EffectiveKernel k;
    k.grid = det.grid;
    Image auto_corr = cross_correlate(illu.psf, illu.psf);
    k.psf = Image(det.grid);
    for (std::size_t i = 0; i < k.psf.size(); ++i)
        k.psf.v[i] = auto_corr.v[i] * det.psf.v[i];
    finalize_kernel(k);
    return k;
}

Image pattern_autocovariance(const Stack& patterns) {
    patterns.validate();
    if (patterns.count() < 2)
        throw ConfigError("pattern autocovariance needs at least two patterns");
    const Image p_mean = stack_mean(patterns);
    const int n = patterns.count();
    // averaged over members and positions, via the power spectrum
    Spectrum acc(patterns.grid);
    Image dp(patterns.grid);
    for (int l = 0; l < n; ++l) {
        for (std::size_t i = 0; i < dp.size(); ++i)
            dp.v[i] = patterns.members[l].v[i] - p_mean.v[i];
        Spectrum s = fft::forward(dp);
        for (std::size_t i = 0; i < acc.size(); ++i)
            acc.v[i] += std::norm(s.v[i]);
    }
    const double inv = 1.0 / (double(n) * double(patterns.grid.pixels()));
    for (auto& c : acc.v) c *= inv;
    return fft::inverse(acc);
}

EffectiveKernel covariance_kernel(const Stack& patterns, const Kernel& det) {
    require_same_grid(patterns.grid, det.grid, "covariance_kernel");
    Image auto_corr = pattern_autocovariance(patterns);

    EffectiveKernel k;
    k.grid = det.grid;
    k.psf = Image(det.grid);
    for (std::size_t i = 0; i < k.psf.size(); ++i)
        k.psf.v[i] = auto_corr.v[i] * det.psf.v[i];

    // the prior only holds when the measured autocovariance is compact: the
    // peak must sit at zero lag and dominate the far tail
    const int w = k.grid.width, h = k.grid.height;
    const double peak = auto_corr.v[0];
    double tail = 0.0;
    std::size_t count = 0;
    const double guard_px = 4.0 * det.fwhm / k.grid.pitch;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double dx = bin_offset(x, w), dy = bin_offset(y, h);
            if (std::hypot(dx, dy) > guard_px) {
                tail += std::abs(auto_corr.at(x, y));
                ++count;
            }
        }
    }
    const double tail_mean = count ? tail / double(count) : 0.0;
    bool peak_at_zero = true;
    for (std::size_t i = 1; i < auto_corr.size(); ++i)
        if (auto_corr.v[i] > peak) { peak_at_zero = false; break; }
    k.point_like = peak_at_zero && (peak > 10.0 * tail_mean);

    finalize_kernel(k);
    return k;
}

Image sims_deconvolve(const Image& i_cov, const EffectiveKernel& kernel, double xi) {
    if (!(xi > 0.0))
        throw ConfigError("covariance deconvolution needs a positive regularizer");
    Image out = tikhonov_deconvolve(i_cov, kernel.otf, xi);
    for (double& v : out.v)
        if (v < 0.0) v = 0.0;
    return out;
}

Image variance_map(const Stack& patterns) {
    patterns.validate();
    if (patterns.count() < 2)
        throw ConfigError("variance map needs at least two patterns");
    const Image p_mean = stack_mean(patterns);
    Image var(patterns.grid);
    for (const Image& p : patterns.members)
        for (std::size_t i = 0; i < var.size(); ++i) {
            const double d = p.v[i] - p_mean.v[i];
            var.v[i] += d * d;
        }
    const double inv = 1.0 / double(patterns.count());
    for (double& v : var.v) v *= inv;
    return var;
}

Image shading_correct(const Image& i_dec, const Image& alpha, double eps) {
    require_same_grid(i_dec.grid, alpha.grid, "shading_correct");
    double amax = 0.0;
    for (double v : alpha.v) {
        if (v < 0.0)
            throw ConfigError("shading_correct: variance field must be nonnegative");
        amax = std::max(amax, v);
    }
    if (!(amax > 0.0))
        throw NumericError("shading_correct: variance field is identically zero");
    if (eps < 0.0) eps = 1e-2 * amax * amax;
    if (!(eps > 0.0))
        throw ConfigError("shading_correct: regularizer must be positive");
    Image out(i_dec.grid);
    for (std::size_t i = 0; i < out.size(); ++i)
        out.v[i] = i_dec.v[i] * alpha.v[i] / (alpha.v[i] * alpha.v[i] + eps);
    return out;
}

SimsResult sims_reconstruct(const Stack& measurements, const Stack& patterns,
                            const Kernel& illu, const Kernel& det, const SimsConfig& cfg) {
    SimsResult r;
    r.kernel = (cfg.kernel_mode == SimsConfig::KernelMode::analytic)
                   ? covariance_kernel(illu, det)
                   : covariance_kernel(patterns, det);
    r.i_cov = covariance_image(measurements, patterns);
    r.i_cov_dec = sims_deconvolve(r.i_cov, r.kernel, cfg.xi);
    r.alpha = variance_map(patterns);
    double amax = 0.0;
    for (double v : r.alpha.v) amax = std::max(amax, v);
    r.eps_used = (cfg.eps < 0.0) ? 1e-2 * amax * amax : cfg.eps;
    r.i_sims = shading_correct(r.i_cov_dec, r.alpha, r.eps_used);
    return r;
}

PeSimsResult pe_sims(const Stack& measurements, const Kernel& illu, const Kernel& det,
                     const PeConfig& pe_cfg, const SimsConfig& sims_cfg) {
    PeSimsResult out;
    out.pe = estimate_all(measurements, illu, det, pe_cfg);
    out.sims = sims_reconstruct(measurements, out.pe.patterns, illu, det, sims_cfg);
    return out;
}

} // namespace simrecon
