#pragma once
#include <optional>
#include <string>

#include "simrecon/metrics.hpp"
#include "simrecon/pixel_reassignment.hpp"

namespace simrecon {

struct PhantomConfig {
    enum class Type { star, two_point, beads };
    Type type = Type::star;
    int spokes = 40;
    double separation_um = 0.3;      // two_point
    int bead_count = 40;             // beads
    double bead_diameter_um = 0.21;  // beads
};

struct PatternConfig {
    enum class Type { random, multispot };
    Type type = Type::random;
    double fill = 0.1;
    ScanGrid scan{20, 20, 0.6};
    bool independent = false; // redraw the mask at every position
    int period_steps = 6;     // multispot
};

// Everything needed to rerun a simulation or reconstruction, loadable from a
// JSON file.  Unknown keys are rejected.
struct RunConfig {
    OpticalConfig optics; // grid.pitch <= 0 selects lambda_det / (8 NA)
    PhantomConfig phantom;
    PatternConfig patterns;
    NoiseSpec noise;
    PeConfig pe;
    SimsConfig sims;
    PrConfig pr;
    std::uint64_t seed = 12345;

    void resolve_and_validate(); // fills the automatic pitch, then validates
    double abbe_um() const { return optics.lambda_det / (2.0 * optics.na); }
};

RunConfig default_run_config();
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& json_text);
std::string run_config_json(const RunConfig& cfg); // round-trippable

struct SimulatedDataset {
    OpticalConfig optics;
    Kernel illu, det;
    Image object;
    std::optional<StarGeometry> star;
    int two_point_px = 0;
    Stack masks;        // binary generator patterns
    Stack patterns;     // projected (blurred) illumination
    Stack measurements; // camera images
    Image widefield;
    ScanGrid scan_used;
    bool multispot_step_adjusted = false;
};

SimulatedDataset simulate_dataset(const RunConfig& cfg);

// Resolution summary used by the comparison table.
struct MethodReading {
    std::string name;
    MtfCurve curve;
    std::optional<double> resolution_um;
};

MethodReading read_method(const std::string& name, const Image& img,
                          const StarGeometry& geom, double abbe_um,
                          double threshold = 0.01);

} // namespace simrecon
