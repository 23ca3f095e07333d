#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "projdyn/report.hpp"

namespace py = pybind11;
using projdyn::Matrix;
using projdyn::MatrixDocument;
using projdyn::RunSettings;

namespace {

Matrix array_to_matrix(const py::array_t<std::complex<double>>& arr) {
    auto buf = arr.request();
    if (buf.ndim != 2 || buf.shape[0] != buf.shape[1])
        throw py::value_error("expected a square 2-D complex array");
    const auto n = static_cast<int>(buf.shape[0]);
    Matrix m(n, n);
    auto r = arr.unchecked<2>();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = r(i, j);
    return m;
}

py::object json_to_py(const nlohmann::json& j) {
    switch (j.type()) {
        case nlohmann::json::value_t::null: return py::none();
        case nlohmann::json::value_t::boolean: return py::bool_(j.get<bool>());
        case nlohmann::json::value_t::number_integer: return py::int_(j.get<long long>());
        case nlohmann::json::value_t::number_unsigned: return py::int_(j.get<unsigned long long>());
        case nlohmann::json::value_t::number_float: return py::float_(j.get<double>());
        case nlohmann::json::value_t::string: return py::str(j.get<std::string>());
        case nlohmann::json::value_t::array: {
            py::list out;
            for (const auto& item : j) out.append(json_to_py(item));
            return out;
        }
        case nlohmann::json::value_t::object: {
            py::dict out;
            for (auto it = j.begin(); it != j.end(); ++it) out[py::str(it.key())] = json_to_py(it.value());
            return out;
        }
        default: return py::none();
    }
}

RunSettings settings_from_kwargs(double unit_tol, long max_order, int iters, int samples, int seeds,
                                 std::uint64_t rng_seed) {
    RunSettings rs;
    rs.tol.unit_tol = unit_tol;
    rs.tol.max_order = max_order;
    rs.iters = iters;
    rs.samples = samples;
    rs.seeds = seeds;
    rs.rng_seed = rng_seed;
    return rs;
}

MatrixDocument doc_of(const py::array_t<std::complex<double>>& arr) {
    MatrixDocument doc;
    doc.matrix = array_to_matrix(arr);
    doc.n_plus_1 = static_cast<int>(doc.matrix.rows());
    return doc;
}

}  // namespace

PYBIND11_MODULE(_projdyn, m) {
    m.doc() = "Classification and dynamical invariants of complex projective transformations";

    py::register_exception<projdyn::ValidationError>(m, "ProjdynValidationError", PyExc_ValueError);
    py::register_exception<projdyn::NumericalError>(m, "ProjdynNumericalError", PyExc_ArithmeticError);

    auto with_settings = [](auto fn) {
        return [fn](const py::array_t<std::complex<double>>& arr, double unit_tol, long max_order,
                    int iters, int samples, int seeds, std::uint64_t rng_seed) {
            RunSettings rs = settings_from_kwargs(unit_tol, max_order, iters, samples, seeds, rng_seed);
            return json_to_py(fn(doc_of(arr), rs));
        };
    };

    m.def("classify", with_settings([](const MatrixDocument& d, const RunSettings& rs) {
              return projdyn::classify_report(d, rs);
          }),
          py::arg("matrix"), py::arg("unit_tol") = 1e-8, py::arg("max_order") = 10000,
          py::arg("iters") = 400, py::arg("samples") = 1000, py::arg("seeds") = 100,
          py::arg("rng_seed") = 20240901u,
          "Classify a projective transformation as elliptic, parabolic or loxodromic.");
    m.def("limit_sets", with_settings([](const MatrixDocument& d, const RunSettings& rs) {
              return projdyn::limitset_report(d, rs);
          }),
          py::arg("matrix"), py::arg("unit_tol") = 1e-8, py::arg("max_order") = 10000,
          py::arg("iters") = 400, py::arg("samples") = 1000, py::arg("seeds") = 100,
          py::arg("rng_seed") = 20240901u,
          "Accumulation set, equicontinuity complement, Kulkarni set and maximal regions.");
    m.def("certify", with_settings([](const MatrixDocument& d, const RunSettings& rs) {
              return projdyn::certify_report(d, rs);
          }),
          py::arg("matrix"), py::arg("unit_tol") = 1e-8, py::arg("max_order") = 10000,
          py::arg("iters") = 400, py::arg("samples") = 1000, py::arg("seeds") = 100,
          py::arg("rng_seed") = 20240901u,
          "Invariant-quadric certificate (parabolic) or attracting-ball certificate (loxodromic).");
    m.def("simulate", with_settings([](const MatrixDocument& d, const RunSettings& rs) {
              return projdyn::simulate_report(d, rs, nullptr);
          }),
          py::arg("matrix"), py::arg("unit_tol") = 1e-8, py::arg("max_order") = 10000,
          py::arg("iters") = 400, py::arg("samples") = 1000, py::arg("seeds") = 100,
          py::arg("rng_seed") = 20240901u,
          "Brute-force orbit oracle compared against the predicted accumulation set.");
    m.def(
        "hermitian_selfcheck",
        [](int size, int samples, std::uint64_t rng_seed) {
            RunSettings rs;
            rs.samples = samples;
            rs.rng_seed = rng_seed;
            return json_to_py(projdyn::hermitian_selfcheck_report(size, rs));
        },
        py::arg("size"), py::arg("samples") = 1000, py::arg("rng_seed") = 20240901u,
        "Check the five properties of the invariant quadric family for one Jordan-block size.");
    m.def(
        "quadric_family",
        [](int size) {
            auto fam = projdyn::parabolic_form_family(size);
            const int n = fam.jordan_size;
            py::array_t<std::complex<double>> base({n, n}), direction({n, n});
            auto b = base.mutable_unchecked<2>();
            auto e = direction.mutable_unchecked<2>();
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    b(i, j) = fam.base(i, j);
                    e(i, j) = fam.direction(i, j);
                }
            return py::make_tuple(base, direction);
        },
        py::arg("size"), "Base matrix C0 and rank-one direction E of the family C_r = C0 + r E.");
}
