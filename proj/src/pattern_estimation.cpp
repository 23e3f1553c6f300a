#include "simrecon/pattern_estimation.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>

#include "simrecon/fft.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace simrecon {

Image widefield_average(const Stack& measurements) {
    measurements.validate();
    Image wf(measurements.grid);
    for (const Image& m : measurements.members)
        for (std::size_t i = 0; i < wf.size(); ++i)
            wf.v[i] += m.v[i];
    const double inv = 1.0 / double(measurements.count());
    for (double& v : wf.v) v *= inv;
    return wf;
}

Image estimate_object(const Image& widefield, const Kernel& det, double beta) {
    if (!(beta > 0.0))
        throw ConfigError("object estimation needs a positive regularizer");
    Image o = tikhonov_deconvolve(widefield, det.otf, beta);
    // fluorescence density is nonnegative; clip the deconvolution ringing
    for (double& v : o.v)
        if (v < 0.0) v = 0.0;
    return o;
}

double momentum_next(double t) {
    return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
}

namespace {

// Precomputed half-plane filters plus scratch buffers for the iteration; one
// instance per thread when patterns are estimated in parallel.
struct PeWorkspace {
    GridSpec grid;
    std::vector<double> h_det;    // detection transfer, half plane
    std::vector<double> band;     // |H_illu|^2 / (|H_illu|^2 + delta)
    fft::HalfSpectrum half;
    Image a, b; // real scratch

    PeWorkspace(const Kernel& illu, const Kernel& det, double delta)
        : grid(det.grid), a(det.grid), b(det.grid) {
        require_same_grid(illu.grid, det.grid, "pattern estimation kernels");
        if (delta < 0.0)
            throw ConfigError("band projection regularizer must be nonnegative");
        const int w = grid.width, h = grid.height, cols = w / 2 + 1;
        h_det.resize(std::size_t(cols) * h);
        band.resize(std::size_t(cols) * h);
        for (int ky = 0; ky < h; ++ky) {
            for (int kx = 0; kx < cols; ++kx) {
                const std::size_t i = std::size_t(ky) * cols + kx;
                h_det[i] = det.otf.at(kx, ky).real();
                const double m2 = std::norm(illu.otf.at(kx, ky));
                band[i] = (m2 + delta > 0.0) ? m2 / (m2 + delta) : 0.0;
            }
        }
        half.resize(w, h);
    }

    // out = img conv h_det (in place allowed)
    void blur(const Image& img, Image& out) {
        fft::forward_r2c(img, half);
        for (std::size_t i = 0; i < half.v.size(); ++i) half.v[i] *= h_det[i];
        fft::inverse_c2r(half, out);
    }
    // out = band-projection of img
    void project(const Image& img, Image& out) {
        fft::forward_r2c(img, half);
        for (std::size_t i = 0; i < half.v.size(); ++i) half.v[i] *= band[i];
        fft::inverse_c2r(half, out);
    }
};

Image estimate_pattern_ws(PeWorkspace& ws, const Image& measurement, const Image& o_est,
                          const PeConfig& cfg, std::vector<double>* cost_trace,
                          const Image* init) {
    require_same_grid(measurement.grid, ws.grid, "estimate_pattern");
    require_same_grid(o_est.grid, ws.grid, "estimate_pattern");
    if (cfg.iterations < 1)
        throw ConfigError("pattern estimation needs at least one iteration");

    double omax = 0.0;
    for (double v : o_est.v) omax = std::max(omax, std::abs(v));
    if (!(omax > 0.0))
        throw ConfigError("object estimate is identically zero; nothing to fit");
    // Lipschitz bound of the data-term gradient: 2 * max|o|^2 * max|H_det|^2
    double hmax = 0.0;
    for (double v : ws.h_det) hmax = std::max(hmax, std::abs(v));
    const double eta = cfg.step_scale / (2.0 * omax * omax * hmax * hmax);

    const std::size_t n = ws.grid.pixels();
    Image p = init ? *init : Image(ws.grid);
    if (init) require_same_grid(init->grid, ws.grid, "estimate_pattern init");
    Image phat_prev = p;
    Image phat(ws.grid);
    double t = 1.0;
    double fmin = std::numeric_limits<double>::infinity();
    if (cost_trace) {
        cost_trace->clear();
        cost_trace->reserve(std::size_t(cfg.iterations) + 1);
    }

    for (int k = 0; k < cfg.iterations; ++k) {
        // residual and data term at the current (extrapolated) iterate
        for (std::size_t i = 0; i < n; ++i) ws.a.v[i] = o_est.v[i] * p.v[i];
        ws.blur(ws.a, ws.a);
        double f = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = measurement.v[i] - ws.a.v[i];
            ws.a.v[i] = r;
            f += r * r;
        }
        if (cost_trace) cost_trace->push_back(f);
        if (f > cfg.divergence_factor * fmin && k > 0)
            throw NumericError("pattern estimation diverged: residual exceeded "
                               "its best value by the divergence factor");
        fmin = std::min(fmin, f);

        // gradient step: p + 2*eta*o .* (h_det corr residual); the detection
        // transfer is real and even so correlation equals convolution here
        ws.blur(ws.a, ws.b);
        for (std::size_t i = 0; i < n; ++i)
            ws.b.v[i] = p.v[i] + 2.0 * eta * o_est.v[i] * ws.b.v[i];
        ws.project(ws.b, phat);

        // momentum with gradient-scheme restart
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            dot += (p.v[i] - phat.v[i]) * (phat.v[i] - phat_prev.v[i]);
        if (dot > 0.0) {
            t = 1.0;
            p = phat;
        } else {
            const double t_next = momentum_next(t);
            const double w = (t - 1.0) / t_next;
            for (std::size_t i = 0; i < n; ++i)
                p.v[i] = phat.v[i] + w * (phat.v[i] - phat_prev.v[i]);
            t = t_next;
        }
        std::swap(phat_prev, phat);
    }

    // cost of the estimate actually returned
    if (cost_trace) {
        for (std::size_t i = 0; i < n; ++i) ws.a.v[i] = o_est.v[i] * phat_prev.v[i];
        ws.blur(ws.a, ws.a);
        double f = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = measurement.v[i] - ws.a.v[i];
            f += r * r;
        }
        cost_trace->push_back(f);
    }
    return phat_prev;
}

} // namespace

Image pe_gradient(const Image& p, const Image& measurement, const Image& o_est,
                  const Kernel& det) {
    require_same_grid(p.grid, measurement.grid, "pe_gradient");
    require_same_grid(p.grid, o_est.grid, "pe_gradient");
    Image lit(p.grid);
    for (std::size_t i = 0; i < lit.size(); ++i)
        lit.v[i] = o_est.v[i] * p.v[i];
    Image model = convolve(lit, det);
    Image res(p.grid);
    for (std::size_t i = 0; i < res.size(); ++i)
        res.v[i] = measurement.v[i] - model.v[i];
    Image back = cross_correlate(det.psf, res);
    Image g(p.grid);
    for (std::size_t i = 0; i < g.size(); ++i)
        g.v[i] = -2.0 * o_est.v[i] * back.v[i];
    return g;
}

Image project_support(const Image& y, const Kernel& illu, double delta) {
    require_same_grid(y.grid, illu.grid, "project_support");
    if (delta < 0.0)
        throw ConfigError("band projection regularizer must be nonnegative");
    Spectrum s = fft::forward(y);
    for (int ky = 0; ky < y.grid.height; ++ky) {
        for (int kx = 0; kx < y.grid.width; ++kx) {
            const double m2 = std::norm(illu.otf.at(kx, ky));
            const double f = (m2 + delta > 0.0) ? m2 / (m2 + delta) : 0.0;
            s.at(kx, ky) *= f;
        }
    }
    return fft::inverse(s);
}

Image estimate_pattern(const Image& measurement, const Image& o_est, const Kernel& illu,
                       const Kernel& det, const PeConfig& cfg,
                       std::vector<double>* cost_trace, const Image* init) {
    PeWorkspace ws(illu, det, cfg.delta);
    return estimate_pattern_ws(ws, measurement, o_est, cfg, cost_trace, init);
}

PeResult estimate_all(const Stack& measurements, const Kernel& illu, const Kernel& det,
                      const PeConfig& cfg) {
    measurements.validate();
    const auto t0 = std::chrono::steady_clock::now();

    PeResult res;
    res.widefield = widefield_average(measurements);
    res.o_est = estimate_object(res.widefield, det, cfg.beta);
    const int n = measurements.count();
    res.patterns.grid = measurements.grid;
    res.patterns.shifts_um = measurements.shifts_um;
    res.patterns.members.assign(std::size_t(n), Image());
    res.cost_traces.assign(std::size_t(n), {});

    std::exception_ptr failure;
#ifdef _OPENMP
    std::atomic<bool> failed{false};
#pragma omp parallel
    {
        PeWorkspace ws(illu, det, cfg.delta);
#pragma omp for schedule(dynamic)
        for (int l = 0; l < n; ++l) {
            if (failed.load(std::memory_order_relaxed)) continue;
            try {
                res.patterns.members[l] = estimate_pattern_ws(
                    ws, measurements.members[l], res.o_est, cfg, &res.cost_traces[l], nullptr);
            } catch (...) {
#pragma omp critical
                {
                    if (!failure) failure = std::current_exception();
                    failed.store(true, std::memory_order_relaxed);
                }
            }
        }
    }
#else
    {
        PeWorkspace ws(illu, det, cfg.delta);
        for (int l = 0; l < n; ++l) {
            res.patterns.members[l] = estimate_pattern_ws(
                ws, measurements.members[l], res.o_est, cfg, &res.cost_traces[l], nullptr);
        }
    }
#endif
    if (failure) std::rethrow_exception(failure);

    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

} // namespace simrecon
