#pragma once
#include "simrecon/patterns.hpp"

namespace simrecon {

struct PeConfig {
    double beta = 1e-3;  // object-estimate deconvolution regularizer, x max|H_det|^2
    double delta = 3e-4; // band-projection regularizer
    int iterations = 50;
    double step_scale = 1.0;       // step = step_scale / L, L the data-term Lipschitz bound
    double divergence_factor = 10; // error out when the residual blows past its best value
};

struct PeResult {
    Stack patterns;      // estimated illumination patterns
    Image widefield;     // mean of the measurement stack
    Image o_est;         // deconvolved widefield object estimate
    std::vector<std::vector<double>> cost_traces;
    double seconds = 0.0;
};

// Mean over the stack members; equals (fill * object) * combined blur for a
// laterally uniform pattern ensemble.
Image widefield_average(const Stack& measurements);

// Regularized inverse filter of the widefield image through the detection OTF.
Image estimate_object(const Image& widefield, const Kernel& det, double beta);

// Gradient of || I - (o_est .* p) conv h_det ||^2 with respect to p:
// g = -2 * o_est .* corr(h_det, I - (o_est .* p) conv h_det).
Image pe_gradient(const Image& p, const Image& measurement, const Image& o_est,
                  const Kernel& det);

// Projection onto achievable illumination content: soft band limiter
// |H_illu|^2 / (|H_illu|^2 + delta) applied in frequency space.
Image project_support(const Image& y, const Kernel& illu, double delta);

// Accelerated projected-gradient estimate of one illumination pattern.
// cost_trace (optional) receives iterations+1 values: the data term at every
// iterate plus the cost of the returned estimate; it must end no higher than
// it starts.  init defaults to the zero image.
Image estimate_pattern(const Image& measurement, const Image& o_est, const Kernel& illu,
                       const Kernel& det, const PeConfig& cfg,
                       std::vector<double>* cost_trace = nullptr,
                       const Image* init = nullptr);

// Full first stage: widefield, object estimate, then one pattern per member.
PeResult estimate_all(const Stack& measurements, const Kernel& illu, const Kernel& det,
                      const PeConfig& cfg);

// Momentum weight sequence used by the accelerated iteration (exposed for
// verification): t_1 = 1, t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2.
double momentum_next(double t);

} // namespace simrecon
