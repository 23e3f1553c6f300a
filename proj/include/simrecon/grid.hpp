#pragma once
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "simrecon/errors.hpp"

namespace simrecon {

// Sampling geometry shared by every image, spectrum and kernel in a run.
// pitch is the pixel size in micrometers.
struct GridSpec {
    int width = 0;
    int height = 0;
    double pitch = 0.0;

    void validate() const {
        if (width <= 0 || height <= 0)
            throw ConfigError("grid dimensions must be positive");
        if (!(pitch > 0.0))
            throw ConfigError("grid pitch must be positive");
    }
    std::size_t pixels() const { return std::size_t(width) * std::size_t(height); }
    bool operator==(const GridSpec& o) const {
        return width == o.width && height == o.height && pitch == o.pitch;
    }
    bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

// Real-valued image, row-major, v[y*width + x].
struct Image {
    GridSpec grid;
    std::vector<double> v;

    Image() = default;
    explicit Image(const GridSpec& g, double fill = 0.0) : grid(g), v(g.pixels(), fill) {}

    double& at(int x, int y) { return v[std::size_t(y) * grid.width + x]; }
    double at(int x, int y) const { return v[std::size_t(y) * grid.width + x]; }
    // torus access (negative and out-of-range indices wrap)
    double wrap(int x, int y) const {
        int w = grid.width, h = grid.height;
        x %= w; if (x < 0) x += w;
        y %= h; if (y < 0) y += h;
        return v[std::size_t(y) * w + x];
    }
    std::size_t size() const { return v.size(); }
};

// Complex spectrum on the same layout; bin (kx,ky) holds the DFT coefficient
// with frequencies in cycles/um given by fftfreq-style wrapping.
struct Spectrum {
    GridSpec grid;
    std::vector<std::complex<double>> v;

    Spectrum() = default;
    explicit Spectrum(const GridSpec& g) : grid(g), v(g.pixels()) {}

    std::complex<double>& at(int kx, int ky) { return v[std::size_t(ky) * grid.width + kx]; }
    std::complex<double> at(int kx, int ky) const { return v[std::size_t(ky) * grid.width + kx]; }
    std::size_t size() const { return v.size(); }
};

inline void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
    if (a != b)
        throw ConfigError(std::string(what) + ": operands live on different grids");
}

// Signed integer offset of DFT bin k (wrap-around index), in [-n/2, n/2).
inline int bin_offset(int k, int n) {
    return (k < (n + 1) / 2) ? k : k - n;
}

// Signed frequency (cycles/um) of DFT bin k on an n-point axis.
inline double bin_freq(int k, int n, double pitch) {
    return double(bin_offset(k, n)) / (double(n) * pitch);
}

} // namespace simrecon
