#include "simrecon/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>

namespace simrecon::fft {
namespace {

// One set of plans per grid size.  Plans are created under a lock (FFTW's
// planner is not thread safe) but executed via the new-array interface, which
// is safe to call concurrently on distinct buffers.
struct PlanSet {
    int w = 0, h = 0;
    fftw_plan c2c_fwd = nullptr;
    fftw_plan c2c_bwd = nullptr;
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;

    PlanSet(int w_, int h_) : w(w_), h(h_) {
        const std::size_t n = std::size_t(w) * h;
        const std::size_t nc = std::size_t(w / 2 + 1) * h;
        fftw_complex* a = fftw_alloc_complex(n);
        fftw_complex* b = fftw_alloc_complex(n);
        double* r = fftw_alloc_real(n);
        fftw_complex* hc = fftw_alloc_complex(nc);
        // row-major: FFTW wants (n0, n1) = (rows, cols) = (h, w)
        c2c_fwd = fftw_plan_dft_2d(h, w, a, b, FFTW_FORWARD, FFTW_MEASURE);
        c2c_bwd = fftw_plan_dft_2d(h, w, a, b, FFTW_BACKWARD, FFTW_MEASURE);
        r2c = fftw_plan_dft_r2c_2d(h, w, r, hc, FFTW_MEASURE);
        c2r = fftw_plan_dft_c2r_2d(h, w, hc, r, FFTW_MEASURE);
        fftw_free(a); fftw_free(b); fftw_free(r); fftw_free(hc);
    }
    ~PlanSet() {
        fftw_destroy_plan(c2c_fwd);
        fftw_destroy_plan(c2c_bwd);
        fftw_destroy_plan(r2c);
        fftw_destroy_plan(c2r);
    }
};

std::mutex g_planner_mutex;
std::map<std::pair<int, int>, std::unique_ptr<PlanSet>>& plan_cache() {
    static std::map<std::pair<int, int>, std::unique_ptr<PlanSet>> cache;
    return cache;
}

PlanSet& plans_for(int w, int h) {
    std::lock_guard<std::mutex> lock(g_planner_mutex);
    auto& cache = plan_cache();
    auto key = std::make_pair(w, h);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::make_unique<PlanSet>(w, h)).first;
    return *it->second;
}

struct FftwBuf {
    fftw_complex* p;
    explicit FftwBuf(std::size_t n) : p(fftw_alloc_complex(n)) {}
    ~FftwBuf() { fftw_free(p); }
};
struct FftwRealBuf {
    double* p;
    explicit FftwRealBuf(std::size_t n) : p(fftw_alloc_real(n)) {}
    ~FftwRealBuf() { fftw_free(p); }
};

} // namespace

Spectrum forward(const Image& img) {
    img.grid.validate();
    const std::size_t n = img.grid.pixels();
    PlanSet& ps = plans_for(img.grid.width, img.grid.height);
    FftwBuf in(n), out(n);
    for (std::size_t i = 0; i < n; ++i) {
        in.p[i][0] = img.v[i];
        in.p[i][1] = 0.0;
    }
    fftw_execute_dft(ps.c2c_fwd, in.p, out.p);
    Spectrum s(img.grid);
    for (std::size_t i = 0; i < n; ++i)
        s.v[i] = {out.p[i][0], out.p[i][1]};
    return s;
}

Image inverse(const Spectrum& spec) {
    spec.grid.validate();
    const std::size_t n = spec.grid.pixels();
    PlanSet& ps = plans_for(spec.grid.width, spec.grid.height);
    FftwBuf in(n), out(n);
    for (std::size_t i = 0; i < n; ++i) {
        in.p[i][0] = spec.v[i].real();
        in.p[i][1] = spec.v[i].imag();
    }
    fftw_execute_dft(ps.c2c_bwd, in.p, out.p);
    Image img(spec.grid);
    const double norm = 1.0 / double(n);
    for (std::size_t i = 0; i < n; ++i)
        img.v[i] = out.p[i][0] * norm;
    return img;
}

void forward_r2c(const Image& img, HalfSpectrum& out) {
    const int w = img.grid.width, h = img.grid.height;
    const std::size_t n = img.grid.pixels();
    const std::size_t nc = std::size_t(w / 2 + 1) * h;
    PlanSet& ps = plans_for(w, h);
    FftwRealBuf in(n);
    FftwBuf hc(nc);
    std::copy(img.v.begin(), img.v.end(), in.p);
    fftw_execute_dft_r2c(ps.r2c, in.p, hc.p);
    out.resize(w, h);
    for (std::size_t i = 0; i < nc; ++i)
        out.v[i] = {hc.p[i][0], hc.p[i][1]};
}

void inverse_c2r(const HalfSpectrum& spec, Image& out) {
    const int w = spec.width, h = spec.height;
    const std::size_t n = std::size_t(w) * h;
    const std::size_t nc = std::size_t(w / 2 + 1) * h;
    PlanSet& ps = plans_for(w, h);
    FftwBuf hc(nc);
    FftwRealBuf re(n);
    for (std::size_t i = 0; i < nc; ++i) {
        hc.p[i][0] = spec.v[i].real();
        hc.p[i][1] = spec.v[i].imag();
    }
    fftw_execute_dft_c2r(ps.c2r, hc.p, re.p);
    if (out.grid.width != w || out.grid.height != h)
        throw ConfigError("inverse_c2r: output image has wrong size");
    const double norm = 1.0 / double(n);
    for (std::size_t i = 0; i < n; ++i)
        out.v[i] = re.p[i] * norm;
}

void clear_plan_cache() {
    std::lock_guard<std::mutex> lock(g_planner_mutex);
    plan_cache().clear();
}

} // namespace simrecon::fft
