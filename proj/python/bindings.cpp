#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pebill/billiard.hpp"
#include "pebill/confocal.hpp"
#include "pebill/lorentz_oval.hpp"
#include "pebill/verify.hpp"

namespace py = pybind11;
using namespace pebill;

namespace {

py::dict orbit_to_dict(const OrbitRecord& rec) {
    const auto rows = static_cast<Eigen::Index>(rec.states.size());
    const Eigen::Index n = rows ? rec.states[0].x.size() : 0;
    Eigen::MatrixXd x(rows, n), v(rows, n);
    Eigen::MatrixXd f(rows, rows && rec.F[0].size() ? n : 0);
    for (Eigen::Index b = 0; b < rows; ++b) {
        x.row(b) = rec.states[static_cast<std::size_t>(b)].x.transpose();
        v.row(b) = rec.states[static_cast<std::size_t>(b)].v.transpose();
        if (f.cols()) f.row(b) = rec.F[static_cast<std::size_t>(b)].transpose();
    }
    std::vector<std::vector<double>> lambdas;
    for (const auto& t : rec.tangency) lambdas.push_back(t.lambdas());
    py::dict d;
    d["x"] = x;
    d["v"] = v;
    d["H"] = rec.H;
    d["F"] = f;
    d["lambdas"] = lambdas;
    if (rec.abort) {
        d["abort"] = py::dict(py::arg("kind") = std::string(to_string(rec.abort->kind)),
                              py::arg("message") = rec.abort->message, py::arg("at_bounce") = rec.abort->at_bounce);
    } else {
        d["abort"] = py::none();
    }
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Billiards in pseudo-Euclidean ellipsoids and Lorentz ovals";

    // the module attribute keeps the type alive
    static py::handle error_type = py::exception<Error>(m, "PebillError").ptr();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
            exc.attr("kind") = std::string(to_string(e.kind()));
            PyErr_SetObject(error_type.ptr(), exc.ptr());
        }
    });

    py::enum_<LineType>(m, "LineType")
        .value("spacelike", LineType::Spacelike)
        .value("timelike", LineType::Timelike)
        .value("lightlike", LineType::Lightlike);

    py::class_<Signature>(m, "Signature")
        .def(py::init<int, int>(), py::arg("p"), py::arg("q"))
        .def_property_readonly("p", &Signature::p)
        .def_property_readonly("q", &Signature::q)
        .def_property_readonly("dim", &Signature::dim)
        .def("signs", &Signature::signs)
        .def("__repr__", [](const Signature& s) {
            return "Signature(" + std::to_string(s.p()) + ", " + std::to_string(s.q()) + ")";
        });

    py::class_<Ellipsoid>(m, "Ellipsoid")
        .def(py::init<Vec>(), py::arg("semi_axes"))
        .def_property_readonly("axes", &Ellipsoid::axes)
        .def("level", &Ellipsoid::level)
        .def("form", &Ellipsoid::form);

    py::class_<RayState>(m, "RayState")
        .def(py::init<Vec, Vec>(), py::arg("x"), py::arg("v"))
        .def_readwrite("x", &RayState::x)
        .def_readwrite("v", &RayState::v);

    m.def("inner", &inner, py::arg("u"), py::arg("v"), py::arg("sig"));
    m.def("classify_vector", &classify_vector, py::arg("v"), py::arg("sig"), py::arg("tol") = Tolerances{}.lightlike);

    m.def("advance_to_boundary", [](const RayState& r, const Ellipsoid& e) { return advance_to_boundary(r, e); });
    m.def("reflect", [](const RayState& r, const Ellipsoid& e, const Signature& s) { return reflect(r, e, s); });
    m.def("billiard_map", [](const RayState& r, const Ellipsoid& e, const Signature& s) { return billiard_map(r, e, s); });
    m.def("joachimsthal", [](const RayState& r, const Ellipsoid& e) { return joachimsthal(r, e); });
    m.def("integrals_F", &integrals_F, py::arg("x"), py::arg("v"), py::arg("ell"), py::arg("sig"));
    m.def("sample_ray", &sample_ray, py::arg("ell"), py::arg("sig"), py::arg("type"), py::arg("seed"));
    m.def("sample_null_ray", &sample_null_ray, py::arg("ell"), py::arg("sig"), py::arg("seed"));
    m.def(
        "run_orbit",
        [](const RayState& r, std::size_t bounces, const Ellipsoid& e, const Signature& s, bool record_tangency) {
            OrbitOptions opts;
            opts.record_tangency = record_tangency;
            return orbit_to_dict(run_orbit(r, bounces, ConfocalFamily(e, s), opts));
        },
        py::arg("r"), py::arg("bounces"), py::arg("ell"), py::arg("sig"), py::arg("record_tangency") = true);

    m.def(
        "tangency_parameters",
        [](const RayState& r, const Ellipsoid& e, const Signature& s) {
            return tangency_parameters(ConfocalFamily(e, s), r).lambdas();
        },
        py::arg("r"), py::arg("ell"), py::arg("sig"));
    m.def(
        "tangency_discriminant",
        [](const RayState& r, const Ellipsoid& e, const Signature& s, double lambda) {
            return tangency_discriminant(ConfocalFamily(e, s), r, lambda);
        },
        py::arg("r"), py::arg("ell"), py::arg("sig"), py::arg("lam"));

    m.def("sum_rule_check", &sum_rule_check, py::arg("ell"), py::arg("sig"), py::arg("samples"), py::arg("seed"),
          py::arg("workers") = 0);
    m.def(
        "max_bracket",
        [](const Ellipsoid& e, const Signature& s, std::size_t samples, std::uint64_t seed, bool wrong_sign) {
            SweepOptions opts;
            opts.wrong_sign_adapter = wrong_sign;
            double worst = 0.0;
            for (const auto& r : commutation_sweep(e, s, samples, seed, opts)) worst = std::max(worst, r.max_normalized);
            return worst;
        },
        py::arg("ell"), py::arg("sig"), py::arg("samples"), py::arg("seed"), py::arg("wrong_sign") = false);

    py::enum_<ChordDirection>(m, "ChordDirection")
        .value("vertical", ChordDirection::Vertical)
        .value("horizontal", ChordDirection::Horizontal);

    py::class_<OvalCurve>(m, "OvalCurve")
        .def_static("ellipse", &OvalCurve::ellipse, py::arg("a"), py::arg("b"))
        .def_static("circle", &OvalCurve::circle, py::arg("radius"))
        .def("point", &OvalCurve::point)
        .def("slope", &OvalCurve::slope)
        .def("parameter_of", &OvalCurve::parameter_of)
        .def("min_curvature", &OvalCurve::min_curvature, py::arg("samples") = 4096);

    py::class_<NullPolygon>(m, "NullPolygon")
        .def(py::init<>())
        .def_readwrite("points", &NullPolygon::points)
        .def_readwrite("params", &NullPolygon::params)
        .def_readwrite("slopes", &NullPolygon::slopes);

    m.def("chord_step", &chord_step, py::arg("curve"), py::arg("s"), py::arg("direction"));
    m.def("oval_map", &oval_map, py::arg("curve"), py::arg("s"));
    m.def("acceleration_factor", &acceleration_factor, py::arg("poly"));
    m.def("simulate_speed", &simulate_speed, py::arg("curve"), py::arg("poly"), py::arg("periods") = 1);
    m.def(
        "find_periodic_orbit",
        [](const OvalCurve& c, int n, double seed) { return find_periodic_orbit(c, n, seed); }, py::arg("curve"),
        py::arg("n"), py::arg("seed"));
    m.def("return_map_derivative", &return_map_derivative, py::arg("curve"), py::arg("poly"));
    m.def(
        "build_accelerating_table",
        [](const std::vector<Point2>& points, const std::vector<double>& slopes) {
            return build_accelerating_table(points, slopes);
        },
        py::arg("points"), py::arg("slopes"));
    m.def("null_chart_image", &null_chart_image, py::arg("a"), py::arg("b"));
}
