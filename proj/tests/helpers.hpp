#pragma once
// Shared brute-force oracles and fixtures for the unit suites.  All direct
// O(N^4) sums, kept deliberately dumb so they cannot share bugs with the FFT
// implementations they check.

#include <cmath>
#include <random>

#include "simrecon/patterns.hpp"

namespace testutil {

using simrecon::GridSpec;
using simrecon::Image;
using simrecon::Stack;

inline Image random_image(const GridSpec& g, std::uint64_t seed, double lo = 0.0,
                          double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    Image img(g);
    for (double& v : img.v) v = u(rng);
    return img;
}

// circular convolution by direct summation: out(x,y) = sum_ab a(ab) b(x-a, y-b)
inline Image conv_brute(const Image& a, const Image& b) {
    const int w = a.grid.width, h = a.grid.height;
    Image out(a.grid);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int q = 0; q < h; ++q)
                for (int p = 0; p < w; ++p)
                    s += a.at(p, q) * b.wrap(x - p, y - q);
            out.at(x, y) = s;
        }
    return out;
}

// circular cross-correlation: out(d) = sum_r a(r) b(r + d)
inline Image corr_brute(const Image& a, const Image& b) {
    const int w = a.grid.width, h = a.grid.height;
    Image out(a.grid);
    for (int dy = 0; dy < h; ++dy)
        for (int dx = 0; dx < w; ++dx) {
            double s = 0.0;
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    s += a.at(x, y) * b.wrap(x + dx, y + dy);
            out.at(dx, dy) = s;
        }
    return out;
}

inline double max_abs_diff(const Image& a, const Image& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a.v[i] - b.v[i]));
    return m;
}

inline double rel_l2(const Image& a, const Image& ref) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a.v[i] - ref.v[i]) * (a.v[i] - ref.v[i]);
        den += ref.v[i] * ref.v[i];
    }
    return std::sqrt(num / den);
}

// relative L2 after a least-squares scale fit (for quantities with free gain)
inline double rel_l2_scaled(const Image& a, const Image& ref) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += a.v[i] * ref.v[i];
        den += a.v[i] * a.v[i];
    }
    const double c = (den > 0.0) ? num / den : 0.0;
    Image scaled = a;
    for (double& v : scaled.v) v *= c;
    return rel_l2(scaled, ref);
}

// zero-normalized cross-correlation between two images
inline double zncc(const Image& a, const Image& b) {
    const std::size_t n = a.size();
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a.v[i];
        mb += b.v[i];
    }
    ma /= double(n);
    mb /= double(n);
    double num = 0.0, da = 0.0, db = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (a.v[i] - ma) * (b.v[i] - mb);
        da += (a.v[i] - ma) * (a.v[i] - ma);
        db += (b.v[i] - mb) * (b.v[i] - mb);
    }
    return num / std::sqrt(da * db);
}

} // namespace testutil
