#pragma once
#include "simrecon/grid.hpp"

namespace simrecon::fft {

// Forward DFT, unnormalized (matches FFTW convention).
Spectrum forward(const Image& img);

// Inverse DFT divided by N; the imaginary part is discarded.
Image inverse(const Spectrum& spec);

// Half-plane spectrum from a real transform: height rows of (width/2+1) bins.
struct HalfSpectrum {
    int width = 0, height = 0; // logical (real-space) dimensions
    std::vector<std::complex<double>> v;

    int cols() const { return width / 2 + 1; }
    void resize(int w, int h) {
        width = w; height = h;
        v.assign(std::size_t(h) * (w / 2 + 1), {});
    }
};

// Real-to-complex / complex-to-real transforms for hot loops.
// c2r divides by N and preserves its input.
void forward_r2c(const Image& img, HalfSpectrum& out);
void inverse_c2r(const HalfSpectrum& spec, Image& out);

// Drops cached FFTW plans (mainly for leak checkers).
void clear_plan_cache();

} // namespace simrecon::fft
