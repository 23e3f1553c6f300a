#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "simrecon/pipeline.hpp"
#include "simrecon/stack_io.hpp"

namespace py = pybind11;
using namespace simrecon;

namespace {

py::array_t<double> to_array(const Image& img) {
    py::array_t<double> a({img.grid.height, img.grid.width});
    std::copy(img.v.begin(), img.v.end(), a.mutable_data());
    return a;
}

py::array_t<std::complex<double>> to_array(const Spectrum& s) {
    py::array_t<std::complex<double>> a({s.grid.height, s.grid.width});
    std::copy(s.v.begin(), s.v.end(), a.mutable_data());
    return a;
}

Image image_from(py::array_t<double, py::array::c_style | py::array::forcecast> arr,
                 double pitch) {
    if (arr.ndim() != 2)
        throw ConfigError("expected a 2-D array");
    Image img(GridSpec{int(arr.shape(1)), int(arr.shape(0)), pitch});
    std::copy(arr.data(), arr.data() + img.size(), img.v.begin());
    return img;
}

py::array_t<double> to_array(const Stack& st) {
    py::array_t<double> a({st.count(), st.grid.height, st.grid.width});
    double* out = a.mutable_data();
    for (const Image& m : st.members) {
        std::copy(m.v.begin(), m.v.end(), out);
        out += m.size();
    }
    return a;
}

Stack stack_from(py::array_t<double, py::array::c_style | py::array::forcecast> arr,
                 double pitch) {
    if (arr.ndim() != 3)
        throw ConfigError("expected a 3-D array (members, height, width)");
    Stack st;
    st.grid = GridSpec{int(arr.shape(2)), int(arr.shape(1)), pitch};
    const std::size_t pix = st.grid.pixels();
    const double* in = arr.data();
    for (py::ssize_t m = 0; m < arr.shape(0); ++m) {
        Image img(st.grid);
        std::copy(in, in + pix, img.v.begin());
        in += pix;
        st.members.push_back(std::move(img));
        st.shifts_um.push_back({0.0, 0.0});
    }
    return st;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "patterned-illumination simulation and covariance reconstruction";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_IOError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_RuntimeError);

    py::class_<GridSpec>(m, "GridSpec")
        .def(py::init<>())
        .def(py::init([](int w, int h, double pitch) {
                 return GridSpec{w, h, pitch};
             }),
             py::arg("width"), py::arg("height"), py::arg("pitch"))
        .def_readwrite("width", &GridSpec::width)
        .def_readwrite("height", &GridSpec::height)
        .def_readwrite("pitch", &GridSpec::pitch);

    py::class_<OpticalConfig>(m, "OpticalConfig")
        .def(py::init<>())
        .def_readwrite("na", &OpticalConfig::na)
        .def_readwrite("lambda_illu", &OpticalConfig::lambda_illu)
        .def_readwrite("lambda_det", &OpticalConfig::lambda_det)
        .def_readwrite("grid", &OpticalConfig::grid);

    py::enum_<Side>(m, "Side")
        .value("illumination", Side::illumination)
        .value("detection", Side::detection);

    py::class_<Kernel>(m, "Kernel")
        .def_property_readonly("psf", [](const Kernel& k) { return to_array(k.psf); })
        .def_property_readonly("otf", [](const Kernel& k) { return to_array(k.otf); })
        .def_readonly("cutoff", &Kernel::cutoff)
        .def_readonly("fwhm", &Kernel::fwhm)
        .def_readonly("lambda_um", &Kernel::lambda)
        .def_readonly("na", &Kernel::na);

    m.def("make_kernel", &make_kernel, py::arg("optics"), py::arg("side"));
    m.def("airy_fwhm", &airy_fwhm, py::arg("na"), py::arg("lambda_um"));

    py::class_<ScanGrid>(m, "ScanGrid")
        .def(py::init<>())
        .def_readwrite("nx", &ScanGrid::nx)
        .def_readwrite("ny", &ScanGrid::ny)
        .def_readwrite("step_fwhm", &ScanGrid::step_fwhm);

    py::class_<PeConfig>(m, "PeConfig")
        .def(py::init<>())
        .def_readwrite("beta", &PeConfig::beta)
        .def_readwrite("delta", &PeConfig::delta)
        .def_readwrite("iterations", &PeConfig::iterations);

    py::enum_<SimsConfig::KernelMode>(m, "KernelMode")
        .value("analytic", SimsConfig::KernelMode::analytic)
        .value("empirical", SimsConfig::KernelMode::empirical);

    py::class_<SimsConfig>(m, "SimsConfig")
        .def(py::init<>())
        .def_readwrite("xi", &SimsConfig::xi)
        .def_readwrite("eps", &SimsConfig::eps)
        .def_readwrite("kernel_mode", &SimsConfig::kernel_mode);

    py::class_<PrConfig>(m, "PrConfig")
        .def(py::init<>())
        .def_readwrite("radius_fwhm", &PrConfig::radius_fwhm);

    py::class_<StarGeometry>(m, "StarGeometry")
        .def_readwrite("cx", &StarGeometry::cx)
        .def_readwrite("cy", &StarGeometry::cy)
        .def_readwrite("spokes", &StarGeometry::spokes)
        .def_readwrite("inner_px", &StarGeometry::inner_px)
        .def_readwrite("outer_px", &StarGeometry::outer_px)
        .def("radius_for_period", &StarGeometry::radius_for_period)
        .def("period_at_radius", &StarGeometry::period_at_radius);

    py::class_<RunConfig>(m, "RunConfig")
        .def(py::init(&default_run_config))
        .def_readwrite("optics", &RunConfig::optics)
        .def_readwrite("pe", &RunConfig::pe)
        .def_readwrite("sims", &RunConfig::sims)
        .def_readwrite("pr", &RunConfig::pr)
        .def_readwrite("seed", &RunConfig::seed)
        .def("abbe_um", &RunConfig::abbe_um)
        .def("json", &run_config_json);

    m.def("parse_run_config", &parse_run_config, py::arg("json_text"));
    m.def("load_run_config", &load_run_config, py::arg("path"));

    // phantoms
    m.def(
        "siemens_star",
        [](const OpticalConfig& cfg, int spokes) { return to_array(siemens_star(cfg, spokes)); },
        py::arg("optics"), py::arg("spokes") = 40);
    m.def("star_geometry", &star_geometry, py::arg("optics"), py::arg("spokes") = 40);
    m.def(
        "two_point",
        [](const OpticalConfig& cfg, double sep) {
            int px = 0;
            auto img = two_point(cfg, sep, &px);
            return py::make_tuple(to_array(img), px);
        },
        py::arg("optics"), py::arg("separation_um"));
    m.def(
        "bead_field",
        [](const OpticalConfig& cfg, int n, double d, std::uint64_t seed) {
            return to_array(bead_field(cfg, n, d, seed));
        },
        py::arg("optics"), py::arg("count"), py::arg("diameter_um"), py::arg("seed"));

    // pattern generation and imaging
    m.def(
        "random_dmd_stack",
        [](const OpticalConfig& cfg, const ScanGrid& scan, double fill, std::uint64_t seed,
           bool independent) {
            return to_array(random_dmd_stack(cfg, scan, fill, seed, independent));
        },
        py::arg("optics"), py::arg("scan"), py::arg("fill"), py::arg("seed"),
        py::arg("independent") = false);
    m.def(
        "multispot_dmd_stack",
        [](const OpticalConfig& cfg, const ScanGrid& scan, int period_steps) {
            return to_array(multispot_dmd_stack(cfg, scan, period_steps));
        },
        py::arg("optics"), py::arg("scan"), py::arg("period_steps"));
    m.def(
        "project_stack",
        [](py::array_t<double> masks, const Kernel& illu) {
            return to_array(project_stack(stack_from(masks, illu.grid.pitch), illu));
        },
        py::arg("masks"), py::arg("illu"));
    m.def(
        "forward_stack",
        [](py::array_t<double> object, py::array_t<double> patterns, const Kernel& det,
           std::uint64_t seed) {
            return to_array(forward_stack(image_from(object, det.grid.pitch),
                                          stack_from(patterns, det.grid.pitch), det, {}, seed));
        },
        py::arg("object"), py::arg("patterns"), py::arg("det"), py::arg("seed") = 0);

    // core operations
    m.def(
        "convolve",
        [](py::array_t<double> img, const Kernel& k) {
            return to_array(convolve(image_from(img, k.grid.pitch), k));
        },
        py::arg("image"), py::arg("kernel"));
    m.def(
        "tikhonov_deconvolve",
        [](py::array_t<double> img, const Kernel& k, double reg) {
            return to_array(tikhonov_deconvolve(image_from(img, k.grid.pitch), k.otf, reg));
        },
        py::arg("image"), py::arg("kernel"), py::arg("reg"));
    m.def(
        "fourier_shift",
        [](py::array_t<double> img, double dx, double dy, double pitch) {
            return to_array(fourier_shift(image_from(img, pitch), dx, dy));
        },
        py::arg("image"), py::arg("dx_um"), py::arg("dy_um"), py::arg("pitch"));

    m.def(
        "estimate_all",
        [](py::array_t<double> measurements, const OpticalConfig& optics, const PeConfig& cfg) {
            const Kernel illu = make_kernel(optics, Side::illumination);
            const Kernel det = make_kernel(optics, Side::detection);
            PeResult r = estimate_all(stack_from(measurements, optics.grid.pitch), illu, det, cfg);
            py::dict out;
            out["patterns"] = to_array(r.patterns);
            out["o_est"] = to_array(r.o_est);
            out["widefield"] = to_array(r.widefield);
            out["seconds"] = r.seconds;
            out["cost_traces"] = r.cost_traces;
            return out;
        },
        py::arg("measurements"), py::arg("optics"), py::arg("config") = PeConfig{});

    m.def(
        "covariance_image",
        [](py::array_t<double> meas, py::array_t<double> pats, double pitch, int sx, int sy) {
            return to_array(
                covariance_image(stack_from(meas, pitch), stack_from(pats, pitch), sx, sy));
        },
        py::arg("measurements"), py::arg("patterns"), py::arg("pitch"), py::arg("shift_x") = 0,
        py::arg("shift_y") = 0);
    m.def(
        "pattern_autocovariance",
        [](py::array_t<double> pats, double pitch) {
            return to_array(pattern_autocovariance(stack_from(pats, pitch)));
        },
        py::arg("patterns"), py::arg("pitch"));

    m.def(
        "pe_sims",
        [](py::array_t<double> measurements, const OpticalConfig& optics, const PeConfig& pe_cfg,
           const SimsConfig& sims_cfg) {
            const Kernel illu = make_kernel(optics, Side::illumination);
            const Kernel det = make_kernel(optics, Side::detection);
            PeSimsResult r = pe_sims(stack_from(measurements, optics.grid.pitch), illu, det,
                                     pe_cfg, sims_cfg);
            py::dict out;
            out["patterns"] = to_array(r.pe.patterns);
            out["o_est"] = to_array(r.pe.o_est);
            out["i_cov"] = to_array(r.sims.i_cov);
            out["i_cov_dec"] = to_array(r.sims.i_cov_dec);
            out["alpha"] = to_array(r.sims.alpha);
            out["i_sims"] = to_array(r.sims.i_sims);
            out["psf_eff"] = to_array(r.sims.kernel.psf);
            return out;
        },
        py::arg("measurements"), py::arg("optics"), py::arg("pe_config") = PeConfig{},
        py::arg("sims_config") = SimsConfig{});

    m.def(
        "pe_sims_pr",
        [](py::array_t<double> measurements, const OpticalConfig& optics, const PeConfig& pe_cfg,
           const SimsConfig& sims_cfg, const PrConfig& pr_cfg) {
            const Kernel illu = make_kernel(optics, Side::illumination);
            const Kernel det = make_kernel(optics, Side::detection);
            PeSimsPrResult r = pe_sims_pr(stack_from(measurements, optics.grid.pitch), illu, det,
                                          pe_cfg, sims_cfg, pr_cfg);
            py::dict out;
            out["patterns"] = to_array(r.pe.patterns);
            out["i_pr"] = to_array(r.pr.i_pr);
            out["i_pr_dec"] = to_array(r.pr.i_pr_dec);
            out["alpha"] = to_array(r.pr.alpha);
            out["i_sims_pr"] = to_array(r.pr.i_sims_pr);
            out["psf_pr"] = to_array(r.pr.kernel.psf);
            return out;
        },
        py::arg("measurements"), py::arg("optics"), py::arg("pe_config") = PeConfig{},
        py::arg("sims_config") = SimsConfig{}, py::arg("pr_config") = PrConfig{});

    // metrics
    py::class_<MtfPoint>(m, "MtfPoint")
        .def_readonly("radius_px", &MtfPoint::radius_px)
        .def_readonly("period_um", &MtfPoint::period_um)
        .def_readonly("contrast", &MtfPoint::contrast);
    py::class_<MtfCurve>(m, "MtfCurve")
        .def_readonly("points", &MtfCurve::points)
        .def_readonly("abbe_um", &MtfCurve::abbe_um);
    m.def(
        "mtf_curve",
        [](py::array_t<double> img, const StarGeometry& geom, double pitch, double abbe_um) {
            return mtf_curve(image_from(img, pitch), geom, abbe_um);
        },
        py::arg("image"), py::arg("geometry"), py::arg("pitch"), py::arg("abbe_um"));
    m.def("resolution_at", &resolution_at, py::arg("curve"), py::arg("threshold") = 0.01);
    m.def(
        "azimuthal_contrast",
        [](py::array_t<double> img, const StarGeometry& geom, double pitch, double radius_px) {
            return azimuthal_contrast(image_from(img, pitch), geom, radius_px);
        },
        py::arg("image"), py::arg("geometry"), py::arg("pitch"), py::arg("radius_px"));

    py::class_<TwoPointReading>(m, "TwoPointReading")
        .def_readonly("resolved", &TwoPointReading::resolved)
        .def_readonly("separation_um", &TwoPointReading::separation_um)
        .def_readonly("dip_contrast", &TwoPointReading::dip_contrast)
        .def_readonly("implied_fwhm_um", &TwoPointReading::implied_fwhm_um);
    m.def(
        "two_point_analysis",
        [](py::array_t<double> img, double pitch) {
            return two_point_analysis(image_from(img, pitch));
        },
        py::arg("image"), py::arg("pitch"));
    m.def("separation_to_dip", &separation_to_dip, py::arg("separation_fwhm"));
    m.def("dip_to_separation", &dip_to_separation, py::arg("contrast"));
    m.def("subtract_bead", &subtract_bead, py::arg("measured_fwhm_um"),
          py::arg("bead_diameter_um"));

    // file io
    m.def(
        "read_stack_file",
        [](const std::string& path) {
            StackFileData d = read_stack_file(path);
            py::dict out;
            out["kind"] = int(d.kind);
            out["pitch"] = d.stack.grid.pitch;
            out["data"] = to_array(d.stack);
            out["shifts_um"] = d.stack.shifts_um;
            return out;
        },
        py::arg("path"));
    m.def(
        "write_stack_file",
        [](const std::string& path, py::array_t<double> data, double pitch, int kind) {
            Stack st = stack_from(data, pitch);
            write_stack_file(path, st, FileKind(kind));
        },
        py::arg("path"), py::arg("data"), py::arg("pitch"), py::arg("kind") = 1);

    m.def(
        "simulate_dataset",
        [](const RunConfig& cfg) {
            SimulatedDataset ds = simulate_dataset(cfg);
            py::dict out;
            out["object"] = to_array(ds.object);
            out["masks"] = to_array(ds.masks);
            out["patterns"] = to_array(ds.patterns);
            out["measurements"] = to_array(ds.measurements);
            out["widefield"] = to_array(ds.widefield);
            out["pitch"] = ds.optics.grid.pitch;
            if (ds.star) out["star"] = *ds.star;
            return out;
        },
        py::arg("config"));
}
