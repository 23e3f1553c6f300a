#include "simrecon/fourier_ops.hpp"

#include <cmath>
#include <numbers>

#include "simrecon/fft.hpp"

namespace simrecon {

Image convolve(const Image& img, const Kernel& k) {
    require_same_grid(img.grid, k.grid, "convolve");
    Spectrum s = fft::forward(img);
    for (std::size_t i = 0; i < s.size(); ++i)
        s.v[i] *= k.otf.v[i];
    return fft::inverse(s);
}

Image convolve(const Image& a, const Image& b) {
    require_same_grid(a.grid, b.grid, "convolve");
    Spectrum sa = fft::forward(a);
    Spectrum sb = fft::forward(b);
    for (std::size_t i = 0; i < sa.size(); ++i)
        sa.v[i] *= sb.v[i];
    return fft::inverse(sa);
}

Image cross_correlate(const Image& a, const Image& b) {
    require_same_grid(a.grid, b.grid, "cross_correlate");
    Spectrum sa = fft::forward(a);
    Spectrum sb = fft::forward(b);
    for (std::size_t i = 0; i < sa.size(); ++i)
        sa.v[i] = std::conj(sa.v[i]) * sb.v[i];
    return fft::inverse(sa);
}

Image tikhonov_deconvolve(const Image& img, const Spectrum& transfer, double reg) {
    require_same_grid(img.grid, transfer.grid, "tikhonov_deconvolve");
    if (reg < 0.0)
        throw ConfigError("tikhonov_deconvolve: regularizer must be nonnegative");
    Spectrum s = fft::forward(img);
    if (reg == 0.0) {
        // unregularized inversion is only defined when the data carry no energy
        // where the transfer function vanishes
        const double total = [&] {
            double t = 0.0;
            for (auto& c : s.v) t += std::norm(c);
            return t;
        }();
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (std::norm(transfer.v[i]) < 1e-24 && std::norm(s.v[i]) > 1e-20 * total)
                throw NumericError("tikhonov_deconvolve: zero transfer bin carries signal energy; "
                                   "use a positive regularizer");
        }
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double denom = std::norm(transfer.v[i]) + reg;
        s.v[i] = (denom > 0.0) ? s.v[i] * std::conj(transfer.v[i]) / denom
                               : std::complex<double>(0.0, 0.0);
    }
    return fft::inverse(s);
}

Image fourier_shift(const Image& img, double dx_um, double dy_um) {
    img.grid.validate();
    const int w = img.grid.width, h = img.grid.height;
    const double sx = dx_um / img.grid.pitch; // shift in pixels
    const double sy = dy_um / img.grid.pitch;
    // whole-pixel shifts of periodic content are plain rolls; take them
    // exactly instead of paying two transforms of roundoff
    const double rx = std::round(sx), ry = std::round(sy);
    if (std::abs(sx - rx) < 1e-12 && std::abs(sy - ry) < 1e-12)
        return roll(img, int(rx), int(ry));
    Spectrum s = fft::forward(img);
    const double pi = std::numbers::pi;
    for (int ky = 0; ky < h; ++ky) {
        const int oy = bin_offset(ky, h);
        const bool ny_y = (h % 2 == 0 && ky == h / 2);
        const double py = 2.0 * pi * double(oy) / double(h) * sy;
        for (int kx = 0; kx < w; ++kx) {
            const int ox = bin_offset(kx, w);
            const bool ny_x = (w % 2 == 0 && kx == w / 2);
            const double px = 2.0 * pi * double(ox) / double(w) * sx;
            std::complex<double> f(1.0, 0.0);
            // Nyquist bins have no phase partner; attenuate them with the real
            // factor cos(pi*shift) so the shifted image is real for any shift
            if (ny_x) f *= std::cos(pi * sx);
            else f *= std::exp(std::complex<double>(0.0, -px));
            if (ny_y) f *= std::cos(pi * sy);
            else f *= std::exp(std::complex<double>(0.0, -py));
            s.at(kx, ky) *= f;
        }
    }
    return fft::inverse(s);
}

Image roll(const Image& img, int sx, int sy) {
    const int w = img.grid.width, h = img.grid.height;
    Image out(img.grid);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out.at(x, y) = img.wrap(x - sx, y - sy);
    return out;
}

} // namespace simrecon
