#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spikekern/dynamics.hpp"
#include "spikekern/jitconn.hpp"
#include "spikekern/network.hpp"
#include "spikekern/reservoir.hpp"
#include "spikekern/sparse_kernels.hpp"

namespace py = pybind11;
using namespace spikekern;

namespace {

using RealArray = py::array_t<Real, py::array::c_style | py::array::forcecast>;
using IndexArray = py::array_t<Index, py::array::c_style | py::array::forcecast>;

template <class T>
std::vector<T> vec_of(const py::array_t<T, py::array::c_style | py::array::forcecast>& a)
{
    if (a.ndim() != 1) throw DimensionError("expected a 1-d array");
    return {a.data(), a.data() + a.size()};
}

py::array_t<Real> to_array(const std::vector<Real>& v)
{
    return py::array_t<Real>(static_cast<py::ssize_t>(v.size()), v.data());
}

SpikeVector spikes_of(const py::array_t<bool, py::array::c_style | py::array::forcecast>& a)
{
    if (a.ndim() != 1) throw DimensionError("expected a 1-d boolean array");
    SpikeVector s(static_cast<std::size_t>(a.size()));
    for (py::ssize_t i = 0; i < a.size(); ++i) s.set(static_cast<std::size_t>(i), a.data()[i]);
    return s;
}

WeightDist dist_of(const std::string& kind, Real w1, Real w2)
{
    if (kind == "homo") return HomoDist{w1};
    if (kind == "uniform") return UniformDist{w1, w2};
    if (kind == "normal") return NormalDist{w1, w2};
    throw ValidationError("unknown weight distribution '" + kind + "'");
}

CommKind comm_kind_of(const std::string& s)
{
    if (s == "jitconn") return CommKind::JitConn;
    if (s == "sparse") return CommKind::Sparse;
    if (s == "dense") return CommKind::Dense;
    throw ValidationError("comm must be jitconn, sparse or dense");
}

py::dict result_dict(const SimulationResult& r)
{
    py::array_t<std::uint64_t> raster({static_cast<py::ssize_t>(r.raster.size()), py::ssize_t{2}});
    auto w = raster.mutable_unchecked<2>();
    for (std::size_t i = 0; i < r.raster.size(); ++i) {
        w(i, 0) = r.raster[i].step;
        w(i, 1) = r.raster[i].neuron;
    }
    py::dict traces;
    for (std::size_t c = 0; c < r.traces.size(); ++c)
        traces[py::str(r.trace_names[c])] = py::array_t<double>(r.traces[c].size(), r.traces[c].data());
    py::dict out;
    out["steps"] = r.steps;
    out["dt"] = r.dt;
    out["raster"] = raster;
    out["spike_counts"] = r.spike_counts;
    out["traces"] = traces;
    out["state_bytes"] = r.bytes.total();
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Event-driven sparse and procedural-connectivity kernels";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<CsrMatrix>(m, "CsrMatrix")
        .def(py::init([](Index rows, Index cols, const IndexArray& indptr, const IndexArray& indices,
                         py::object weights) {
                 if (py::isinstance<py::float_>(weights) || py::isinstance<py::int_>(weights))
                     return CsrMatrix(rows, cols, vec_of(indptr), vec_of(indices),
                                      HomogeneousWeight{weights.cast<Real>()});
                 return CsrMatrix(rows, cols, vec_of(indptr), vec_of(indices), vec_of(weights.cast<RealArray>()));
             }),
             py::arg("n_rows"), py::arg("n_cols"), py::arg("indptr"), py::arg("indices"), py::arg("weights"))
        .def_property_readonly("shape", [](const CsrMatrix& c) { return py::make_tuple(c.n_rows(), c.n_cols()); })
        .def_property_readonly("nnz", &CsrMatrix::nnz)
        .def_property_readonly("state_bytes", &CsrMatrix::state_bytes)
        .def("todense", [](const CsrMatrix& c) {
            const auto d = c.densify();
            py::array_t<Real> out({static_cast<py::ssize_t>(d.rows()), static_cast<py::ssize_t>(d.cols())});
            std::copy(d.data().begin(), d.data().end(), out.mutable_data());
            return out;
        });

    m.def(
        "csrmv", [](const CsrMatrix& c, const RealArray& v, bool t) { return to_array(csrmv(c, vec_of(v), t)); },
        py::arg("m"), py::arg("v"), py::arg("transpose") = false);
    m.def(
        "event_csrmv",
        [](const CsrMatrix& c, const py::array_t<bool, py::array::c_style | py::array::forcecast>& ev, bool t) {
            return to_array(event_csrmv(c, spikes_of(ev), t));
        },
        py::arg("m"), py::arg("events"), py::arg("transpose") = false);

    py::class_<JitConnSpec>(m, "JitConnSpec")
        .def(py::init([](Index rows, Index cols, double prob, std::uint64_t seed, const std::string& dist, Real w1,
                         Real w2) { return make_jitconn_spec(rows, cols, prob, dist_of(dist, w1, w2), seed); }),
             py::arg("n_rows"), py::arg("n_cols"), py::arg("prob"), py::arg("seed") = 0, py::arg("dist") = "homo",
             py::arg("w1") = 1.0, py::arg("w2") = 0.0)
        .def_property_readonly("shape", [](const JitConnSpec& s) { return py::make_tuple(s.n_rows, s.n_cols); })
        .def_property_readonly("gap_bound", &JitConnSpec::gap_bound)
        .def_property_readonly("effective_prob", &JitConnSpec::effective_prob)
        .def_property_readonly_static("state_bytes", [](py::object) { return JitConnSpec::state_bytes(); })
        .def("materialize", [](const JitConnSpec& s) { return materialize(s); });

    m.def(
        "jitconn_matvec",
        [](const JitConnSpec& s, const RealArray& v, bool t) { return to_array(jitconn_matvec(s, vec_of(v), t)); },
        py::arg("spec"), py::arg("v"), py::arg("transpose") = false);
    m.def(
        "jitconn_event_matvec",
        [](const JitConnSpec& s, const py::array_t<bool, py::array::c_style | py::array::forcecast>& ev, bool t) {
            return to_array(jitconn_event_matvec(s, spikes_of(ev), t));
        },
        py::arg("spec"), py::arg("events"), py::arg("transpose") = false);

    m.def("surrogate_relu_grad", &surrogate_relu_grad, py::arg("x"), py::arg("alpha") = 0.3, py::arg("width") = 1.0);

    m.def(
        "simulate_ei_net",
        [](double scale, double duration_ms, std::uint64_t seed, const std::string& comm, double dt) {
            return result_dict(simulate(build_ei_net(scale, comm_kind_of(comm), seed, duration_ms, dt)));
        },
        py::arg("scale") = 1.0, py::arg("duration_ms") = 100.0, py::arg("seed") = 0, py::arg("comm") = "jitconn",
        py::arg("dt") = 0.1);
    m.def(
        "simulate_config", [](const std::string& path) { return result_dict(simulate(load_network_config(path))); },
        py::arg("path"));

    m.def(
        "train_reservoir",
        [](std::size_t n_res, Real rho, Real alpha, Real input_scale, const std::string& task,
           const std::string& method, std::size_t train_steps, std::size_t test_steps, std::uint64_t seed) {
            ReservoirParams p;
            p.n_res = n_res;
            p.rho = rho;
            p.alpha = alpha;
            p.input_scale = input_scale;
            p.seed = seed;
            TrainOptions o;
            if (task == "memory") o.task = ReservoirTask::Memory;
            else if (task != "sine") throw ValidationError("task must be sine or memory");
            if (method == "ridge") o.method = ReadoutMethod::Ridge;
            else if (method != "force") throw ValidationError("method must be force or ridge");
            o.train_steps = train_steps;
            o.test_steps = test_steps;
            const auto r = train_reservoir(p, o);
            py::dict out;
            out["nrmse"] = r.nrmse;
            out["test_error"] = r.test_error;
            out["w_out"] = py::array_t<Real>({r.w_out.rows(), r.w_out.cols()},
                                             {sizeof(Real), sizeof(Real) * r.w_out.rows()}, r.w_out.data());
            return out;
        },
        py::arg("n_res") = 400, py::arg("rho") = 1.0, py::arg("alpha") = 0.9, py::arg("input_scale") = 0.1,
        py::arg("task") = "sine", py::arg("method") = "force", py::arg("train_steps") = 4000,
        py::arg("test_steps") = 1000, py::arg("seed") = 0);
}
