#include "simrecon/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace simrecon {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const char* where, const std::set<std::string>& allowed) {
    if (!j.is_object())
        throw ConfigError(std::string(where) + ": expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError(std::string(where) + ": unknown key '" + it.key() + "'");
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

} // namespace

void RunConfig::resolve_and_validate() {
    if (!(optics.grid.pitch > 0.0))
        optics.grid.pitch = optics.lambda_det / (8.0 * optics.na);
    optics.validate();
    patterns.scan.validate();
    if (pe.iterations < 1) throw ConfigError("pe.iterations must be >= 1");
    if (!(pe.beta > 0.0)) throw ConfigError("pe.beta must be positive");
    if (pe.delta < 0.0) throw ConfigError("pe.delta must be nonnegative");
    if (!(sims.xi > 0.0)) throw ConfigError("sims.xi must be positive");
    switch (phantom.type) {
    case PhantomConfig::Type::star:
        if (phantom.spokes < 4 || phantom.spokes % 2)
            throw ConfigError("phantom.spokes must be an even count >= 4");
        break;
    case PhantomConfig::Type::two_point:
        if (!(phantom.separation_um > 0.0))
            throw ConfigError("phantom.separation_um must be positive");
        break;
    case PhantomConfig::Type::beads:
        if (phantom.bead_count < 1 || !(phantom.bead_diameter_um > 0.0))
            throw ConfigError("phantom.beads needs a count >= 1 and a positive diameter");
        break;
    }
    if (patterns.type == PatternConfig::Type::random) {
        if (!(patterns.fill > 0.0) || patterns.fill >= 1.0)
            throw ConfigError("patterns.fill must be in (0, 1)");
    } else {
        if (patterns.period_steps < 2)
            throw ConfigError("patterns.period_steps must be >= 2");
    }
}

RunConfig default_run_config() {
    RunConfig cfg;
    cfg.optics.grid = GridSpec{256, 256, -1.0};
    cfg.resolve_and_validate();
    return cfg;
}

RunConfig parse_run_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    reject_unknown(j, "config",
                   {"optics", "grid", "phantom", "patterns", "noise", "pe", "sims", "pr", "seed"});

    RunConfig cfg;
    cfg.optics.grid = GridSpec{256, 256, -1.0};
    if (j.contains("optics")) {
        const json& o = j.at("optics");
        reject_unknown(o, "optics", {"na", "lambda_illu", "lambda_det"});
        maybe(o, "na", cfg.optics.na);
        maybe(o, "lambda_illu", cfg.optics.lambda_illu);
        maybe(o, "lambda_det", cfg.optics.lambda_det);
    }
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        reject_unknown(g, "grid", {"width", "height", "pitch"});
        maybe(g, "width", cfg.optics.grid.width);
        maybe(g, "height", cfg.optics.grid.height);
        maybe(g, "pitch", cfg.optics.grid.pitch);
    }
    if (j.contains("phantom")) {
        const json& p = j.at("phantom");
        reject_unknown(p, "phantom",
                       {"type", "spokes", "separation_um", "bead_count", "bead_diameter_um"});
        std::string type = "star";
        maybe(p, "type", type);
        if (type == "star") cfg.phantom.type = PhantomConfig::Type::star;
        else if (type == "two_point") cfg.phantom.type = PhantomConfig::Type::two_point;
        else if (type == "beads") cfg.phantom.type = PhantomConfig::Type::beads;
        else throw ConfigError("phantom.type must be star, two_point or beads");
        maybe(p, "spokes", cfg.phantom.spokes);
        maybe(p, "separation_um", cfg.phantom.separation_um);
        maybe(p, "bead_count", cfg.phantom.bead_count);
        maybe(p, "bead_diameter_um", cfg.phantom.bead_diameter_um);
    }
    if (j.contains("patterns")) {
        const json& p = j.at("patterns");
        reject_unknown(p, "patterns",
                       {"type", "fill", "scan_nx", "scan_ny", "step_fwhm", "independent",
                        "period_steps"});
        std::string type = "random";
        maybe(p, "type", type);
        if (type == "random") cfg.patterns.type = PatternConfig::Type::random;
        else if (type == "multispot") cfg.patterns.type = PatternConfig::Type::multispot;
        else throw ConfigError("patterns.type must be random or multispot");
        maybe(p, "fill", cfg.patterns.fill);
        maybe(p, "scan_nx", cfg.patterns.scan.nx);
        maybe(p, "scan_ny", cfg.patterns.scan.ny);
        maybe(p, "step_fwhm", cfg.patterns.scan.step_fwhm);
        maybe(p, "independent", cfg.patterns.independent);
        maybe(p, "period_steps", cfg.patterns.period_steps);
    }
    if (j.contains("noise")) {
        const json& nj = j.at("noise");
        reject_unknown(nj, "noise", {"mode", "param"});
        std::string mode = "none";
        maybe(nj, "mode", mode);
        if (mode == "none") cfg.noise.mode = NoiseSpec::Mode::none;
        else if (mode == "gaussian") cfg.noise.mode = NoiseSpec::Mode::gaussian;
        else if (mode == "poisson") cfg.noise.mode = NoiseSpec::Mode::poisson;
        else throw ConfigError("noise.mode must be none, gaussian or poisson");
        maybe(nj, "param", cfg.noise.param);
    }
    if (j.contains("pe")) {
        const json& p = j.at("pe");
        reject_unknown(p, "pe", {"beta", "delta", "iterations"});
        maybe(p, "beta", cfg.pe.beta);
        maybe(p, "delta", cfg.pe.delta);
        maybe(p, "iterations", cfg.pe.iterations);
    }
    if (j.contains("sims")) {
        const json& s = j.at("sims");
        reject_unknown(s, "sims", {"xi", "eps", "kernel_mode"});
        maybe(s, "xi", cfg.sims.xi);
        maybe(s, "eps", cfg.sims.eps);
        std::string mode = "analytic";
        maybe(s, "kernel_mode", mode);
        if (mode == "analytic") cfg.sims.kernel_mode = SimsConfig::KernelMode::analytic;
        else if (mode == "empirical") cfg.sims.kernel_mode = SimsConfig::KernelMode::empirical;
        else throw ConfigError("sims.kernel_mode must be analytic or empirical");
    }
    if (j.contains("pr")) {
        const json& p = j.at("pr");
        reject_unknown(p, "pr", {"radius_fwhm"});
        maybe(p, "radius_fwhm", cfg.pr.radius_fwhm);
    }
    maybe(j, "seed", cfg.seed);

    cfg.resolve_and_validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

std::string run_config_json(const RunConfig& cfg) {
    json j;
    j["optics"] = {{"na", cfg.optics.na},
                   {"lambda_illu", cfg.optics.lambda_illu},
                   {"lambda_det", cfg.optics.lambda_det}};
    j["grid"] = {{"width", cfg.optics.grid.width},
                 {"height", cfg.optics.grid.height},
                 {"pitch", cfg.optics.grid.pitch}};
    const char* ptype = cfg.phantom.type == PhantomConfig::Type::star ? "star"
                        : cfg.phantom.type == PhantomConfig::Type::two_point ? "two_point"
                                                                             : "beads";
    j["phantom"] = {{"type", ptype},
                    {"spokes", cfg.phantom.spokes},
                    {"separation_um", cfg.phantom.separation_um},
                    {"bead_count", cfg.phantom.bead_count},
                    {"bead_diameter_um", cfg.phantom.bead_diameter_um}};
    j["patterns"] = {
        {"type", cfg.patterns.type == PatternConfig::Type::random ? "random" : "multispot"},
        {"fill", cfg.patterns.fill},
        {"scan_nx", cfg.patterns.scan.nx},
        {"scan_ny", cfg.patterns.scan.ny},
        {"step_fwhm", cfg.patterns.scan.step_fwhm},
        {"independent", cfg.patterns.independent},
        {"period_steps", cfg.patterns.period_steps}};
    const char* nmode = cfg.noise.mode == NoiseSpec::Mode::none ? "none"
                        : cfg.noise.mode == NoiseSpec::Mode::gaussian ? "gaussian"
                                                                      : "poisson";
    j["noise"] = {{"mode", nmode}, {"param", cfg.noise.param}};
    j["pe"] = {{"beta", cfg.pe.beta}, {"delta", cfg.pe.delta}, {"iterations", cfg.pe.iterations}};
    j["sims"] = {{"xi", cfg.sims.xi},
                 {"eps", cfg.sims.eps},
                 {"kernel_mode",
                  cfg.sims.kernel_mode == SimsConfig::KernelMode::analytic ? "analytic"
                                                                           : "empirical"}};
    j["pr"] = {{"radius_fwhm", cfg.pr.radius_fwhm}};
    j["seed"] = cfg.seed;
    return j.dump(2);
}

SimulatedDataset simulate_dataset(const RunConfig& cfg_in) {
    RunConfig cfg = cfg_in;
    cfg.resolve_and_validate();

    SimulatedDataset ds;
    ds.optics = cfg.optics;
    ds.illu = make_kernel(cfg.optics, Side::illumination);
    ds.det = make_kernel(cfg.optics, Side::detection);

    switch (cfg.phantom.type) {
    case PhantomConfig::Type::star:
        ds.star = star_geometry(cfg.optics, cfg.phantom.spokes);
        ds.object = siemens_star(cfg.optics.grid, *ds.star);
        break;
    case PhantomConfig::Type::two_point:
        ds.object = two_point(cfg.optics, cfg.phantom.separation_um, &ds.two_point_px);
        break;
    case PhantomConfig::Type::beads:
        ds.object = bead_field(cfg.optics, cfg.phantom.bead_count,
                               cfg.phantom.bead_diameter_um, cfg.seed ^ 0xbeadu);
        break;
    }

    ds.scan_used = cfg.patterns.scan;
    if (cfg.patterns.type == PatternConfig::Type::random) {
        ds.masks = random_dmd_stack(cfg.optics, ds.scan_used, cfg.patterns.fill, cfg.seed,
                                    cfg.patterns.independent);
    } else {
        // snap the scan step to whole pixels up front; the generator refuses
        // fractional steps because the unit-cell tiling would not close
        const double step = scan_step_px(cfg.optics, ds.scan_used);
        if (std::abs(step - std::round(step)) > 1e-9) {
            ds.scan_used = multispot_adjust_step(cfg.optics, ds.scan_used);
            ds.multispot_step_adjusted = true;
        }
        ds.masks = multispot_dmd_stack(cfg.optics, ds.scan_used, cfg.patterns.period_steps);
    }

    ds.patterns = project_stack(ds.masks, ds.illu);
    ds.measurements = forward_stack(ds.object, ds.patterns, ds.det, cfg.noise, cfg.seed);
    ds.widefield = widefield_average(ds.measurements);
    return ds;
}

MethodReading read_method(const std::string& name, const Image& img,
                          const StarGeometry& geom, double abbe_um, double threshold) {
    MethodReading r;
    r.name = name;
    r.curve = mtf_curve(img, geom, abbe_um);
    r.resolution_um = resolution_at(r.curve, threshold);
    return r;
}

} // namespace simrecon
