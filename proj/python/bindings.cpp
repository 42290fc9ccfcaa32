// JSON crosses the boundary as text; the Python package decodes it.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "contextkg/engine.hpp"
#include "contextkg/error.hpp"
#include "contextkg/layout.hpp"
#include "contextkg/service.hpp"

namespace py = pybind11;
using namespace ckg;
using nlohmann::json;

namespace {

using GraphPtr = std::shared_ptr<const KnowledgeGraph>;

struct GraphHandle {
  GraphPtr kg;
};

std::string outcome_json(const QueryOutcome& out) {
  return json{{"question", out.question},
              {"preference", out.preference.to_json()},
              {"clusters", out.clusters.to_json()},
              {"sample", out.sample.to_json()},
              {"layout", out.layout.to_json()},
              {"warnings", out.warnings()}}
      .dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "contextkg native core";
  py::register_exception<Error>(m, "ContextKGError");

  m.def("radial_radius", &radial_radius, py::arg("c_i"), py::arg("c_max"), py::arg("r_min"), py::arg("r_max"));

  py::class_<GraphHandle>(m, "Graph")
      .def_static("from_json",
                  [](const std::string& text) {
                    return GraphHandle{std::make_shared<const KnowledgeGraph>(load_graph(text))};
                  })
      .def("node_count", [](const GraphHandle& g) { return g.kg->nodes().size(); })
      .def("edge_count", [](const GraphHandle& g) { return g.kg->edges().size(); })
      .def("to_json", [](const GraphHandle& g) { return g.kg->to_json().dump(); });

  py::class_<Engine>(m, "Engine")
      .def(py::init([](const GraphHandle& g, const std::string& config) {
             return std::make_unique<Engine>(g.kg, EngineConfig::from_json(json::parse(config)));
           }),
           py::arg("graph"), py::arg("config") = "{}")
      .def("extract", [](const Engine& e, const std::string& q) { return e.extract(q).to_json().dump(); })
      .def(
          "query",
          [](const Engine& e, const std::string& q, std::optional<double> diversity, std::optional<int> budget,
             std::uint64_t seed) {
            py::gil_scoped_release release;
            return outcome_json(e.query(q, diversity, budget, seed));
          },
          py::arg("question"), py::arg("diversity") = std::nullopt, py::arg("budget") = std::nullopt,
          py::arg("seed") = 0)
      .def(
          "run",
          [](const Engine& e, const std::string& pref, int budget, std::uint64_t seed) {
            const auto p = UserPreference::from_json(json::parse(pref));
            py::gil_scoped_release release;
            return outcome_json(e.run(p, budget, seed));
          },
          py::arg("preference"), py::arg("budget"), py::arg("seed") = 0)
      .def(
          "insights",
          [](const Engine& e, const std::string& q, std::optional<int> budget, std::uint64_t seed) {
            py::gil_scoped_release release;
            return e.insights(e.query(q, std::nullopt, budget, seed)).to_json().dump();
          },
          py::arg("question"), py::arg("budget") = std::nullopt, py::arg("seed") = 0)
      .def("ontology_view", [](const Engine& e) { return e.ontology_view().dump(); });

  py::class_<Service>(m, "Service")
      .def(py::init([](const std::string& data_dir, const std::string& graphs_dir) {
             auto cfg = ServiceConfig::from_env();
             cfg.data_dir = data_dir;
             cfg.graphs_dir = graphs_dir;
             cfg.log_requests = false;
             return std::make_unique<Service>(cfg);
           }),
           py::arg("data_dir"), py::arg("graphs_dir"))
      .def(
          "handle",
          [](Service& s, const std::string& method, const std::string& path, const std::string& body) {
            py::gil_scoped_release release;
            const auto r = s.handle(method, path, body);
            return std::make_pair(r.status, r.body.dump());
          },
          py::arg("method"), py::arg("path"), py::arg("body") = "");
}
