#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "simrecon/pipeline.hpp"
#include "simrecon/stack_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace simrecon;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> beta, delta, xi, eps;
    std::string kernel_mode;
    bool pgm = false;
};

RunConfig resolve_config(const CommonOpts& o) {
    RunConfig cfg = o.config_path.empty() ? default_run_config() : load_run_config(o.config_path);
    if (o.seed) cfg.seed = *o.seed;
    if (o.beta) cfg.pe.beta = *o.beta;
    if (o.delta) cfg.pe.delta = *o.delta;
    if (o.xi) cfg.sims.xi = *o.xi;
    if (o.eps) cfg.sims.eps = *o.eps;
    if (!o.kernel_mode.empty()) {
        if (o.kernel_mode == "analytic") cfg.sims.kernel_mode = SimsConfig::KernelMode::analytic;
        else if (o.kernel_mode == "empirical")
            cfg.sims.kernel_mode = SimsConfig::KernelMode::empirical;
        else throw ConfigError("--kernel-mode must be analytic or empirical");
    }
    cfg.resolve_and_validate();
    return cfg;
}

void ensure_out_dir(const std::string& dir) {
    if (dir.empty()) throw ConfigError("--out-dir is required");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir);
}

void write_json(const std::string& path, const json& j) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp);
        out << j.dump(2) << "\n";
        if (!out) throw IoError("short write: " + tmp);
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move temp file over " + path);
}

void maybe_pgm(const CommonOpts& o, const std::string& stem, const Image& img) {
    if (o.pgm) write_pgm((fs::path(o.out_dir) / (stem + ".pgm")).string(), img);
}

void write_curve_csv(const std::string& path, const MtfCurve& curve) {
    std::ostringstream ss;
    ss << "radius_px,period_um,period_over_abbe,contrast\n";
    ss.precision(10);
    for (const auto& p : curve.points)
        ss << p.radius_px << "," << p.period_um << "," << p.period_um / curve.abbe_um << ","
           << p.contrast << "\n";
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp);
        out << ss.str();
        if (!out) throw IoError("short write: " + tmp);
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move temp file over " + path);
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_simulate(const CommonOpts& o) {
    const RunConfig cfg = resolve_config(o);
    ensure_out_dir(o.out_dir);
    SimulatedDataset ds = simulate_dataset(cfg);
    const fs::path dir(o.out_dir);

    write_stack_file((dir / "measurements.simg").string(), ds.measurements, FileKind::stack);
    write_stack_file((dir / "masks.simg").string(), ds.masks, FileKind::stack);
    write_stack_file((dir / "patterns_true.simg").string(), ds.patterns, FileKind::stack);
    write_image_file((dir / "object.simg").string(), ds.object);
    write_image_file((dir / "widefield.simg").string(), ds.widefield);
    write_image_file((dir / "psf_det.simg").string(), ds.det.psf, FileKind::kernel);
    write_image_file((dir / "psf_illu.simg").string(), ds.illu.psf, FileKind::kernel);
    maybe_pgm(o, "object", ds.object);
    maybe_pgm(o, "widefield", ds.widefield);

    json manifest;
    manifest["config"] = json::parse(run_config_json(cfg));
    manifest["abbe_um"] = cfg.abbe_um();
    manifest["detection_fwhm_um"] = ds.det.fwhm;
    manifest["pattern_count"] = ds.measurements.count();
    manifest["scan_step_px"] = scan_step_px(ds.optics, ds.scan_used);
    manifest["multispot_step_adjusted"] = ds.multispot_step_adjusted;
    if (ds.multispot_step_adjusted)
        manifest["scan_step_fwhm_used"] = ds.scan_used.step_fwhm;
    if (ds.star) {
        manifest["star"] = {{"cx_px", ds.star->cx},
                            {"cy_px", ds.star->cy},
                            {"spokes", ds.star->spokes},
                            {"inner_px", ds.star->inner_px},
                            {"outer_px", ds.star->outer_px}};
    }
    if (cfg.phantom.type == PhantomConfig::Type::two_point)
        manifest["two_point_separation_px"] = ds.two_point_px;
    manifest["files"] = {"measurements.simg", "masks.simg",    "patterns_true.simg",
                         "object.simg",       "widefield.simg", "psf_det.simg",
                         "psf_illu.simg"};
    write_json((dir / "manifest.json").string(), manifest);
    std::cout << "simulated " << ds.measurements.count() << " frames ("
              << cfg.optics.grid.width << "x" << cfg.optics.grid.height << ") -> " << o.out_dir
              << "\n";
    return 0;
}

int cmd_estimate_patterns(const CommonOpts& o, const std::string& in_path) {
    const RunConfig cfg = resolve_config(o);
    ensure_out_dir(o.out_dir);
    StackFileData data = read_stack_file(in_path);
    if (data.kind != FileKind::stack)
        throw IoError("estimate-patterns expects a stack file");
    OpticalConfig optics = cfg.optics;
    optics.grid = data.stack.grid; // the file fixes the grid
    optics.validate();
    const Kernel illu = make_kernel(optics, Side::illumination);
    const Kernel det = make_kernel(optics, Side::detection);

    PeResult pe = estimate_all(data.stack, illu, det, cfg.pe);
    const fs::path dir(o.out_dir);
    write_stack_file((dir / "patterns_est.simg").string(), pe.patterns, FileKind::stack);
    write_image_file((dir / "o_est.simg").string(), pe.o_est);
    write_image_file((dir / "widefield.simg").string(), pe.widefield);
    maybe_pgm(o, "o_est", pe.o_est);

    json diag;
    diag["seconds"] = pe.seconds;
    diag["iterations"] = cfg.pe.iterations;
    diag["beta"] = cfg.pe.beta;
    diag["delta"] = cfg.pe.delta;
    json traces = json::array();
    for (const auto& t : pe.cost_traces)
        traces.push_back(json{{"initial", t.front()}, {"final", t.back()}});
    diag["costs"] = traces;
    write_json((dir / "pe_diagnostics.json").string(), diag);
    std::cout << "estimated " << pe.patterns.count() << " patterns in " << pe.seconds << " s\n";
    return 0;
}

int cmd_reconstruct(const CommonOpts& o, const std::string& in_path,
                    const std::string& patterns_path, const std::string& pipeline) {
    const RunConfig cfg = resolve_config(o);
    ensure_out_dir(o.out_dir);
    if (pipeline != "sims" && pipeline != "pr" && pipeline != "both")
        throw ConfigError("--pipeline must be sims, pr or both");

    StackFileData data = read_stack_file(in_path);
    if (data.kind != FileKind::stack)
        throw IoError("reconstruct expects a measurement stack file");
    OpticalConfig optics = cfg.optics;
    optics.grid = data.stack.grid;
    optics.validate();
    const Kernel illu = make_kernel(optics, Side::illumination);
    const Kernel det = make_kernel(optics, Side::detection);
    const fs::path dir(o.out_dir);

    json diag;
    diag["pipeline"] = pipeline;
    Stack patterns;
    const auto t0 = std::chrono::steady_clock::now();
    if (!patterns_path.empty()) {
        StackFileData pd = read_stack_file(patterns_path);
        if (pd.stack.grid != data.stack.grid)
            throw ConfigError("pattern stack grid does not match the measurements");
        patterns = std::move(pd.stack);
        diag["patterns"] = "provided";
    } else {
        PeResult pe = estimate_all(data.stack, illu, det, cfg.pe);
        write_stack_file((dir / "patterns_est.simg").string(), pe.patterns, FileKind::stack);
        write_image_file((dir / "o_est.simg").string(), pe.o_est);
        json traces = json::array();
        for (const auto& t : pe.cost_traces)
            traces.push_back(json{{"initial", t.front()}, {"final", t.back()}});
        diag["patterns"] = "estimated";
        diag["pe"] = {{"seconds", pe.seconds},
                      {"iterations", cfg.pe.iterations},
                      {"beta", cfg.pe.beta},
                      {"delta", cfg.pe.delta},
                      {"costs", traces}};
        patterns = std::move(pe.patterns);
    }

    if (pipeline == "sims" || pipeline == "both") {
        const auto t1 = std::chrono::steady_clock::now();
        SimsResult sims = sims_reconstruct(data.stack, patterns, illu, det, cfg.sims);
        write_image_file((dir / "i_cov.simg").string(), sims.i_cov);
        write_image_file((dir / "i_cov_dec.simg").string(), sims.i_cov_dec);
        write_image_file((dir / "alpha.simg").string(), sims.alpha);
        write_image_file((dir / "i_sims.simg").string(), sims.i_sims);
        write_image_file((dir / "psf_eff.simg").string(), sims.kernel.psf, FileKind::kernel);
        maybe_pgm(o, "i_sims", sims.i_sims);
        diag["sims"] = {{"seconds", seconds_since(t1)},
                        {"xi", cfg.sims.xi},
                        {"eps_used", sims.eps_used},
                        {"kernel_mode",
                         cfg.sims.kernel_mode == SimsConfig::KernelMode::analytic ? "analytic"
                                                                                  : "empirical"},
                        {"kernel_point_like", sims.kernel.point_like}};
    }
    if (pipeline == "pr" || pipeline == "both") {
        const auto t1 = std::chrono::steady_clock::now();
        PrResult pr = pr_reconstruct(data.stack, patterns, illu, det, cfg.sims, cfg.pr);
        write_image_file((dir / "i_pr.simg").string(), pr.i_pr);
        write_image_file((dir / "i_pr_dec.simg").string(), pr.i_pr_dec);
        write_image_file((dir / "i_sims_pr.simg").string(), pr.i_sims_pr);
        write_image_file((dir / "psf_pr.simg").string(), pr.kernel.psf, FileKind::kernel);
        maybe_pgm(o, "i_sims_pr", pr.i_sims_pr);
        diag["pr"] = {{"seconds", seconds_since(t1)},
                      {"shift_count", pr.shifts.size()},
                      {"radius_fwhm", cfg.pr.radius_fwhm},
                      {"eps_used", pr.eps_used}};
    }
    diag["total_seconds"] = seconds_since(t0);
    write_json((dir / "diagnostics.json").string(), diag);
    std::cout << "reconstruction (" << pipeline << ") written to " << o.out_dir << "\n";
    return 0;
}

int cmd_mtf(const CommonOpts& o, const std::string& in_path, const std::string& out_csv,
            double threshold) {
    const RunConfig cfg = resolve_config(o);
    Image img = read_image_file(in_path);
    OpticalConfig optics = cfg.optics;
    optics.grid = img.grid;
    const StarGeometry geom = star_geometry(optics, cfg.phantom.spokes);
    const MtfCurve curve = mtf_curve(img, geom, cfg.abbe_um());
    if (!out_csv.empty()) write_curve_csv(out_csv, curve);
    const auto res = resolution_at(curve, threshold);
    if (res)
        std::cout << "resolution at contrast " << threshold << ": " << *res << " um ("
                  << *res / cfg.abbe_um() << " abbe units)\n";
    else
        std::cout << "resolution at contrast " << threshold << ": out of range (never above "
                  << "threshold in the sweep)\n";
    return 0;
}

int cmd_compare(const CommonOpts& o, const std::string& pipeline) {
    RunConfig cfg = resolve_config(o);
    if (cfg.phantom.type != PhantomConfig::Type::star)
        throw ConfigError("compare needs a star phantom config");
    ensure_out_dir(o.out_dir);
    const fs::path dir(o.out_dir);
    const auto t0 = std::chrono::steady_clock::now();

    SimulatedDataset ds = simulate_dataset(cfg);
    PeResult pe = estimate_all(ds.measurements, ds.illu, ds.det, cfg.pe);

    std::vector<MethodReading> rows;
    rows.push_back(read_method("widefield", ds.widefield, *ds.star, cfg.abbe_um()));
    rows.push_back(read_method("widefield_deconvolved", pe.o_est, *ds.star, cfg.abbe_um()));
    if (pipeline == "sims" || pipeline == "both") {
        SimsResult sims = sims_reconstruct(ds.measurements, pe.patterns, ds.illu, ds.det, cfg.sims);
        write_image_file((dir / "i_sims.simg").string(), sims.i_sims);
        maybe_pgm(o, "i_sims", sims.i_sims);
        rows.push_back(read_method("pe_sims", sims.i_sims, *ds.star, cfg.abbe_um()));
    }
    if (pipeline == "pr" || pipeline == "both") {
        PrResult pr = pr_reconstruct(ds.measurements, pe.patterns, ds.illu, ds.det, cfg.sims,
                                     cfg.pr);
        write_image_file((dir / "i_sims_pr.simg").string(), pr.i_sims_pr);
        maybe_pgm(o, "i_sims_pr", pr.i_sims_pr);
        rows.push_back(read_method("pe_sims_pr", pr.i_sims_pr, *ds.star, cfg.abbe_um()));
    }

    json out;
    out["abbe_um"] = cfg.abbe_um();
    out["seconds"] = seconds_since(t0);
    json jrows = json::array();
    std::optional<double> wf_res = rows.front().resolution_um;
    std::printf("%-24s %14s %12s %12s\n", "method", "resolution_um", "res/abbe", "enhancement");
    for (const auto& r : rows) {
        write_curve_csv((dir / ("curve_" + r.name + ".csv")).string(), r.curve);
        json jr;
        jr["name"] = r.name;
        if (r.resolution_um) {
            jr["resolution_um"] = *r.resolution_um;
            jr["resolution_abbe"] = *r.resolution_um / cfg.abbe_um();
            if (wf_res) jr["enhancement"] = *wf_res / *r.resolution_um;
            std::printf("%-24s %14.4f %12.3f %12.2f\n", r.name.c_str(), *r.resolution_um,
                        *r.resolution_um / cfg.abbe_um(),
                        wf_res ? *wf_res / *r.resolution_um : 0.0);
        } else {
            jr["resolution_um"] = nullptr;
            std::printf("%-24s %14s %12s %12s\n", r.name.c_str(), "unresolved", "-", "-");
        }
        jrows.push_back(jr);
    }
    out["methods"] = jrows;
    write_json((dir / "compare.json").string(), out);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"simrecon: simulate and reconstruct patterned-illumination image stacks"};
    app.require_subcommand(1);
    CommonOpts o;
    std::string in_path, patterns_path, pipeline = "both", out_csv;
    double threshold = 0.01;

    auto add_common = [&](CLI::App* sub, bool with_out_dir = true) {
        sub->add_option("--config", o.config_path, "JSON run configuration");
        sub->add_option("--seed", o.seed, "override the config seed");
        if (with_out_dir) sub->add_option("--out-dir", o.out_dir, "output directory")->required();
        sub->add_flag("--pgm", o.pgm, "also write PGM previews");
    };
    auto add_reg = [&](CLI::App* sub) {
        sub->add_option("--beta", o.beta, "widefield deconvolution regularizer");
        sub->add_option("--delta", o.delta, "band projection regularizer");
        sub->add_option("--xi", o.xi, "covariance deconvolution regularizer");
        sub->add_option("--eps", o.eps, "shading correction regularizer (-1 = auto)");
        sub->add_option("--kernel-mode", o.kernel_mode, "analytic | empirical");
    };

    CLI::App* sim = app.add_subcommand("simulate", "generate a synthetic acquisition");
    add_common(sim);

    CLI::App* est = app.add_subcommand("estimate-patterns", "recover illumination patterns");
    add_common(est);
    est->add_option("--in", in_path, "measurement stack (.simg)")->required();
    est->add_option("--beta", o.beta, "widefield deconvolution regularizer");
    est->add_option("--delta", o.delta, "band projection regularizer");

    CLI::App* rec = app.add_subcommand("reconstruct", "covariance reconstruction");
    add_common(rec);
    rec->add_option("--in", in_path, "measurement stack (.simg)")->required();
    rec->add_option("--patterns", patterns_path, "pattern stack; skips estimation");
    rec->add_option("--pipeline", pipeline, "sims | pr | both")->capture_default_str();
    add_reg(rec);

    CLI::App* mtf = app.add_subcommand("mtf", "spoke-target contrast sweep");
    mtf->add_option("--config", o.config_path, "JSON run configuration");
    mtf->add_option("--in", in_path, "image file (.simg)")->required();
    mtf->add_option("--out", out_csv, "CSV output path");
    mtf->add_option("--threshold", threshold, "contrast threshold")->capture_default_str();

    CLI::App* cmp = app.add_subcommand("compare", "simulate + reconstruct + resolution table");
    add_common(cmp);
    cmp->add_option("--pipeline", pipeline, "sims | pr | both")->capture_default_str();
    add_reg(cmp);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) return cmd_simulate(o);
        if (est->parsed()) return cmd_estimate_patterns(o, in_path);
        if (rec->parsed()) return cmd_reconstruct(o, in_path, patterns_path, pipeline);
        if (mtf->parsed()) return cmd_mtf(o, in_path, out_csv, threshold);
        if (cmp->parsed()) return cmd_compare(o, pipeline);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
