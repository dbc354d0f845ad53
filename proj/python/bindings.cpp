#include <pybind11/pybind11.h>
#include <pybind11/operators.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "sgc/analysis.hpp"
#include "sgc/bitcode.hpp"
#include "sgc/dual_codec.hpp"
#include "sgc/errors.hpp"
#include "sgc/graph.hpp"
#include "sgc/graphon.hpp"
#include "sgc/ls_estimator.hpp"

namespace py = pybind11;
using namespace sgc;

namespace {

LwcMode parse_mode(const std::string& mode) {
  if (mode == "auto") return LwcMode::automatic;
  if (mode == "exact") return LwcMode::exact;
  if (mode == "surrogate") return LwcMode::surrogate;
  throw std::invalid_argument("unknown mode " + mode);
}

// Big integers cross the boundary as Python ints via their decimal text.
py::int_ to_py(const BigInt& v) {
  return py::reinterpret_steal<py::int_>(PyLong_FromString(v.get_str().c_str(), nullptr, 10));
}

BigInt from_py(const py::int_& v) { return BigInt(py::str(v).cast<std::string>()); }

Graph make_graph(std::size_t n, const std::vector<Edge>& edges) { return Graph::from_edges(n, edges); }

}  // namespace

PYBIND11_MODULE(_sgc, m) {
  m.doc() = "Native core of sparsegraphcodec";

  auto malformed = py::register_exception<MalformedStream>(m, "MalformedStream", PyExc_ValueError);
  py::register_exception<VersionError>(m, "VersionError", malformed.ptr());
  py::register_exception<CapacityError>(m, "CapacityError", PyExc_RuntimeError);

  py::class_<Graph>(m, "Graph")
      .def(py::init(&make_graph), py::arg("n"), py::arg("edges") = std::vector<Edge>{})
      .def_property_readonly("n", &Graph::num_vertices)
      .def_property_readonly("m", &Graph::num_edges)
      .def("edges", &Graph::edges)
      .def("degree", &Graph::degree)
      .def("max_degree", &Graph::max_degree)
      .def("has_edge", &Graph::has_edge)
      .def(py::self == py::self)
      .def("__repr__", [](const Graph& g) {
        return "Graph(n=" + std::to_string(g.num_vertices()) + ", m=" + std::to_string(g.num_edges()) + ")";
      });

  m.def(
      "encode",
      [](const Graph& g, const std::string& policy, const std::string& mode) {
        Encoded e;
        {
          py::gil_scoped_release release;
          e = encode(g, DeltaPolicy::parse(policy), parse_mode(mode));
        }
        py::bytes data(reinterpret_cast<const char*>(e.bytes.data()), e.bytes.size());
        return py::make_tuple(data, e.report.to_json().dump());
      },
      py::arg("graph"), py::arg("policy") = "an:log", py::arg("mode") = "auto",
      "Returns (container bytes, report as JSON text).");

  m.def(
      "decode",
      [](const py::bytes& data) {
        const std::string raw = data;
        const std::vector<std::uint8_t> bytes(raw.begin(), raw.end());
        py::gil_scoped_release release;
        return decode(bytes);
      },
      py::arg("data"));

  m.def(
      "sample",
      [](const std::string& graphon_json, std::size_t n, double rho, std::uint64_t seed) {
        const Graphon w = parse_graphon(nlohmann::json::parse(graphon_json));
        return sample_w_random(w, n, rho, LatentStream(seed));
      },
      py::arg("graphon_json"), py::arg("n"), py::arg("rho"), py::arg("seed"));

  m.def(
      "graphon_entropy",
      [](const std::string& graphon_json) { return ent(parse_graphon(nlohmann::json::parse(graphon_json))); },
      py::arg("graphon_json"));

  m.def(
      "ls_fit",
      [](const Graph& g, double beta, std::uint64_t seed) {
        const LsFit fit = ls_fit(g, beta, seed);
        std::vector<std::vector<double>> average(fit.blocks.average.rows());
        for (Eigen::Index i = 0; i < fit.blocks.average.rows(); ++i)
          for (Eigen::Index j = 0; j < fit.blocks.average.cols(); ++j) average[i].push_back(fit.blocks.average(i, j));
        py::dict out;
        out["classes"] = fit.classes;
        out["assignment"] = fit.assignment;
        out["sizes"] = fit.blocks.sizes;
        out["average"] = average;
        out["objective"] = fit.objective;
        return out;
      },
      py::arg("graph"), py::arg("beta"), py::arg("seed") = 0);

  m.def(
      "rank_subset",
      [](const std::vector<std::uint64_t>& elements, std::uint64_t universe) {
        return to_py(rank_subset(elements, universe));
      },
      py::arg("elements"), py::arg("universe"));
  m.def(
      "unrank_subset",
      [](const py::int_& rank, std::uint64_t universe, std::uint64_t size) {
        return unrank_subset(from_py(rank), universe, size);
      },
      py::arg("rank"), py::arg("universe"), py::arg("size"));

  m.def("s_of_d", &s_of_d, py::arg("d"));
  m.def("edge_set_rate", &edge_set_rate, py::arg("n"), py::arg("m"));
  m.def("er_entropy_gap", &er_entropy_gap, py::arg("rho"));

  m.def(
      "run_trend",
      [](const std::string& experiment, const std::string& config_json) {
        TrendSeries s;
        {
          py::gil_scoped_release release;
          s = run_trend(experiment, nlohmann::json::parse(config_json));
        }
        return py::make_tuple(s.columns, s.rows);
      },
      py::arg("experiment"), py::arg("config_json"), "Returns (column names, rows).");
}
