#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "simrecon/pipeline.hpp"
#include "simrecon/stack_io.hpp"

using namespace simrecon;
using namespace testutil;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("simrecon_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const char* name) const { return (path / name).string(); }
};

// flip bytes at an offset in an existing file
void patch_file(const std::string& path, std::streamoff off,
                const std::vector<unsigned char>& bytes) {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    REQUIRE(bool(f));
    f.seekp(off);
    f.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

void truncate_file(const std::string& path, std::uintmax_t size) {
    fs::resize_file(path, size);
}

// values representable exactly in f32 survive the round trip bit-for-bit
Image f32_friendly_image(const GridSpec& g, std::uint64_t seed) {
    Image img = random_image(g, seed, -2.0, 2.0);
    for (double& v : img.v) v = double(float(v));
    return img;
}

} // namespace

TEST_CASE("image files round-trip exactly for f32-representable data") {
    TempDir dir;
    const GridSpec g{17, 9, 0.08125};
    const Image img = f32_friendly_image(g, 1);

    const std::string path = dir.file("img.simg");
    write_image_file(path, img);
    const Image back = read_image_file(path);
    CHECK(back.grid.width == 17);
    CHECK(back.grid.height == 9);
    CHECK(back.grid.pitch == doctest::Approx(0.08125).epsilon(1e-15));
    CHECK(max_abs_diff(back, img) == 0.0);

    const StackFileData raw = read_stack_file(path);
    CHECK(raw.kind == FileKind::image);
    CHECK(raw.stack.count() == 1);

    // arbitrary doubles land on their nearest f32
    Image dbl = random_image(g, 2, -1.0, 1.0);
    write_image_file(path, dbl);
    const Image quant = read_image_file(path);
    for (std::size_t i = 0; i < dbl.size(); ++i)
        CHECK(quant.v[i] == double(float(dbl.v[i])));
}

TEST_CASE("stack files keep member order, shifts, and kind") {
    TempDir dir;
    const GridSpec g{12, 10, 0.05};
    Stack st;
    st.grid = g;
    for (int l = 0; l < 4; ++l) {
        st.members.push_back(f32_friendly_image(g, 10 + std::uint64_t(l)));
        st.shifts_um.push_back({0.125 * l, -0.25 * l});
    }

    const std::string path = dir.file("stack.simg");
    write_stack_file(path, st, FileKind::stack);
    const StackFileData back = read_stack_file(path);
    CHECK(back.kind == FileKind::stack);
    CHECK(back.stack.count() == 4);
    CHECK(back.stack.grid == g);
    for (int l = 0; l < 4; ++l) {
        CHECK(max_abs_diff(back.stack.members[std::size_t(l)],
                           st.members[std::size_t(l)]) == 0.0);
        CHECK(back.stack.shifts_um[std::size_t(l)] == st.shifts_um[std::size_t(l)]);
    }
    CHECK_THROWS_AS(read_image_file(path), IoError); // not a single image

    const std::string kpath = dir.file("kernel.simg");
    write_image_file(kpath, st.members[0], FileKind::kernel);
    CHECK(read_stack_file(kpath).kind == FileKind::kernel);

    // multi-member image kind is rejected at write time
    CHECK_THROWS_AS(write_stack_file(dir.file("bad.simg"), st, FileKind::image), ConfigError);

    // no temp droppings left behind
    std::size_t files = 0;
    for (auto& e : fs::directory_iterator(dir.path)) {
        (void)e;
        ++files;
    }
    CHECK(files == 2);
}

TEST_CASE("corrupt containers are rejected with io errors") {
    TempDir dir;
    const GridSpec g{8, 6, 0.1};
    const std::string path = dir.file("x.simg");

    auto fresh = [&] {
        Stack st;
        st.grid = g;
        st.members.push_back(f32_friendly_image(g, 3));
        st.members.push_back(f32_friendly_image(g, 4));
        st.shifts_um.push_back({0.0, 0.0});
        st.shifts_um.push_back({0.1, 0.2});
        write_stack_file(path, st, FileKind::stack);
    };

    CHECK_THROWS_AS(read_stack_file(dir.file("missing.simg")), IoError);

    fresh();
    patch_file(path, 0, {'X', 'I', 'M', 'S'});
    CHECK_THROWS_AS(read_stack_file(path), IoError); // magic

    fresh();
    patch_file(path, 4, {9, 0});
    CHECK_THROWS_AS(read_stack_file(path), IoError); // version

    fresh();
    patch_file(path, 6, {7, 0});
    CHECK_THROWS_AS(read_stack_file(path), IoError); // kind

    fresh();
    patch_file(path, 8, {0, 0, 0, 0});
    CHECK_THROWS_AS(read_stack_file(path), IoError); // zero count

    fresh();
    patch_file(path, 12, {0xff, 0xff, 0xff, 0xff});
    CHECK_THROWS_AS(read_stack_file(path), IoError); // absurd width

    fresh();
    truncate_file(path, fs::file_size(path) - 7);
    CHECK_THROWS_AS(read_stack_file(path), IoError); // short payload

    fresh();
    {
        std::ofstream f(path, std::ios::app | std::ios::binary);
        f << "junk";
    }
    CHECK_THROWS_AS(read_stack_file(path), IoError); // trailing bytes

    fresh();
    truncate_file(path, 10);
    CHECK_THROWS_AS(read_stack_file(path), IoError); // header cut off

    CHECK_THROWS_AS(
        write_image_file("/nonexistent_dir_91/x.simg", f32_friendly_image(g, 5)), IoError);
}

TEST_CASE("pgm export writes a 16-bit grayscale file") {
    TempDir dir;
    const GridSpec g{21, 13, 0.05};
    const std::string path = dir.file("img.pgm");
    write_pgm(path, random_image(g, 6));

    std::ifstream f(path, std::ios::binary);
    REQUIRE(bool(f));
    std::string magic, dims1, dims2, maxval;
    f >> magic >> dims1 >> dims2 >> maxval;
    CHECK(magic == "P5");
    CHECK(dims1 == "21");
    CHECK(dims2 == "13");
    CHECK(maxval == "65535");
    CHECK(fs::file_size(path) >= 2u * 21u * 13u);
}

TEST_CASE("default config resolves the automatic pitch") {
    const RunConfig cfg = default_run_config();
    CHECK(cfg.optics.grid.width == 256);
    CHECK(cfg.optics.grid.height == 256);
    CHECK(cfg.optics.grid.pitch == doctest::Approx(0.532 / (8 * 0.8)).epsilon(1e-12));
    CHECK(cfg.patterns.scan.positions() == 400);
    CHECK(cfg.abbe_um() == doctest::Approx(0.532 / 1.6).epsilon(1e-12));
}

TEST_CASE("config parsing applies overrides and rejects junk") {
    const RunConfig cfg = parse_run_config(R"({
        "optics": {"na": 0.9, "lambda_det": 0.6},
        "grid": {"width": 128, "height": 96},
        "phantom": {"type": "two_point", "separation_um": 0.25},
        "patterns": {"type": "random", "fill": 0.2, "scan_nx": 5, "scan_ny": 4,
                     "independent": true},
        "noise": {"mode": "gaussian", "param": 0.01},
        "pe": {"beta": 0.01, "iterations": 12},
        "sims": {"kernel_mode": "empirical", "xi": 0.001},
        "pr": {"radius_fwhm": 0.5},
        "seed": 777
    })");
    CHECK(cfg.optics.na == 0.9);
    CHECK(cfg.optics.lambda_det == 0.6);
    CHECK(cfg.optics.lambda_illu == 0.532);
    CHECK(cfg.optics.grid.width == 128);
    CHECK(cfg.optics.grid.height == 96);
    CHECK(cfg.optics.grid.pitch == doctest::Approx(0.6 / (8 * 0.9)).epsilon(1e-12));
    CHECK(cfg.phantom.type == PhantomConfig::Type::two_point);
    CHECK(cfg.phantom.separation_um == 0.25);
    CHECK(cfg.patterns.fill == 0.2);
    CHECK(cfg.patterns.scan.nx == 5);
    CHECK(cfg.patterns.scan.ny == 4);
    CHECK(cfg.patterns.independent);
    CHECK(cfg.noise.mode == NoiseSpec::Mode::gaussian);
    CHECK(cfg.noise.param == 0.01);
    CHECK(cfg.pe.beta == 0.01);
    CHECK(cfg.pe.iterations == 12);
    CHECK(cfg.sims.kernel_mode == SimsConfig::KernelMode::empirical);
    CHECK(cfg.sims.xi == 0.001);
    CHECK(cfg.pr.radius_fwhm == 0.5);
    CHECK(cfg.seed == 777);

    CHECK_THROWS_AS(parse_run_config("{\"optic\": {}}"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("{\"optics\": {\"NA\": 0.9}}"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("{\"phantom\": {\"type\": \"blob\"}}"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("{\"noise\": {\"mode\": \"salt\"}}"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("not json"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("{\"optics\": {\"na\": 1.5}}"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("{\"grid\": {\"pitch\": 0.4}}"), ConfigError);
    CHECK_THROWS_AS(load_run_config("/no/such/config.json"), IoError);
}

TEST_CASE("config serialization round-trips to a fixed point") {
    RunConfig cfg = default_run_config();
    cfg.phantom.type = PhantomConfig::Type::beads;
    cfg.noise.mode = NoiseSpec::Mode::poisson;
    cfg.noise.param = 500.0;
    cfg.seed = 31;
    const std::string a = run_config_json(cfg);
    const std::string b = run_config_json(parse_run_config(a));
    CHECK(a == b);

    TempDir dir;
    const std::string path = dir.file("cfg.json");
    {
        std::ofstream f(path);
        f << a;
    }
    const RunConfig loaded = load_run_config(path);
    CHECK(run_config_json(loaded) == a);
}

TEST_CASE("dataset simulation honors each phantom and pattern type") {
    RunConfig cfg = default_run_config();
    cfg.optics.grid = GridSpec{128, 128, -1.0};
    cfg.patterns.scan = ScanGrid{3, 3, 0.8};
    cfg.resolve_and_validate();

    SUBCASE("star") {
        const SimulatedDataset ds = simulate_dataset(cfg);
        REQUIRE(ds.star.has_value());
        CHECK(ds.measurements.count() == 9);
        CHECK(ds.masks.count() == 9);
        CHECK(max_abs_diff(ds.widefield, widefield_average(ds.measurements)) == 0.0);
        CHECK(max_abs_diff(ds.patterns.members[4],
                           project_pattern(ds.masks.members[4], ds.illu)) == 0.0);
        for (double v : ds.object.v) CHECK(v >= 0.0);
    }

    SUBCASE("two points") {
        cfg.phantom.type = PhantomConfig::Type::two_point;
        cfg.phantom.separation_um = 0.3;
        const SimulatedDataset ds = simulate_dataset(cfg);
        CHECK_FALSE(ds.star.has_value());
        CHECK(ds.two_point_px == std::lround(0.3 / cfg.optics.grid.pitch));
    }

    SUBCASE("beads are reproducible per seed") {
        cfg.phantom.type = PhantomConfig::Type::beads;
        cfg.phantom.bead_count = 8;
        const SimulatedDataset a = simulate_dataset(cfg);
        const SimulatedDataset b = simulate_dataset(cfg);
        CHECK(max_abs_diff(a.object, b.object) == 0.0);
        cfg.seed = 999;
        const SimulatedDataset c = simulate_dataset(cfg);
        CHECK(max_abs_diff(a.object, c.object) > 0.0);
    }

    SUBCASE("multispot snaps the scan step") {
        cfg.patterns.type = PatternConfig::Type::multispot;
        cfg.patterns.period_steps = 4;
        cfg.patterns.scan = ScanGrid{4, 4, 0.6}; // ~2.47 px: needs snapping
        const SimulatedDataset ds = simulate_dataset(cfg);
        CHECK(ds.multispot_step_adjusted);
        CHECK(ds.scan_used.step_fwhm != cfg.patterns.scan.step_fwhm);
        CHECK(ds.measurements.count() == 16);
        const double step = scan_step_px(cfg.optics, ds.scan_used);
        CHECK(std::abs(step - std::round(step)) < 1e-9);
    }
}

TEST_CASE("method readout wraps curve and resolution together") {
    RunConfig cfg = default_run_config();
    cfg.patterns.scan = ScanGrid{2, 2, 1.0};
    const SimulatedDataset ds = simulate_dataset(cfg);
    REQUIRE(ds.star.has_value());
    // a 4-member widefield still carries pattern residue; read the cleanly
    // blurred object, the wiring under test is the curve + threshold combo
    const MethodReading r =
        read_method("widefield", convolve(ds.object, ds.det), *ds.star, cfg.abbe_um());
    CHECK(r.name == "widefield");
    CHECK(r.curve.points.size() > 10);
    REQUIRE(r.resolution_um.has_value());
    CHECK(*r.resolution_um / cfg.abbe_um() == doctest::Approx(1.035).epsilon(0.10));
}
