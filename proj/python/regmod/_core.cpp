#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "regmod/driver.hpp"
#include "regmod/frontend.hpp"

namespace py = pybind11;

namespace {

regmod::Backend backend_of(const std::string& name) {
  if (name == "native") return regmod::Backend::Native;
  if (name == "asp") return regmod::Backend::Asp;
  throw py::value_error("backend must be 'native' or 'asp'");
}

py::object loads(const std::string& text) { return py::module_::import("json").attr("loads")(text); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Regular Herbrand models for Horn clauses over algebraic data types";

  py::register_exception<regmod::ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<regmod::AspError>(m, "AspError", PyExc_RuntimeError);

  py::class_<regmod::Problem>(m, "Problem")
      .def_property_readonly("sorts",
                             [](const regmod::Problem& p) {
                               std::vector<std::string> out;
                               for (const auto& s : p.sorts) out.push_back(s.name);
                               return out;
                             })
      .def_property_readonly("predicates",
                             [](const regmod::Problem& p) {
                               std::vector<std::string> out;
                               for (const auto& d : p.predicates) out.push_back(d.name);
                               return out;
                             })
      .def_property_readonly("clause_count", [](const regmod::Problem& p) { return p.clauses.size(); })
      .def_property_readonly("goal_count", &regmod::Problem::goal_count)
      .def("to_smt2", &regmod::print_problem)
      .def("__eq__", [](const regmod::Problem& a, const regmod::Problem& b) { return a == b; })
      .def("__repr__", [](const regmod::Problem& p) {
        return "<Problem " + std::to_string(p.sorts.size()) + " sorts, " + std::to_string(p.predicates.size()) +
               " predicates, " + std::to_string(p.clauses.size()) + " clauses>";
      });

  m.def(
      "parse",
      [](const std::string& text) {
        std::vector<std::string> warnings;
        auto p = regmod::parse_problem(text, &warnings);
        return py::make_tuple(p, warnings);
      },
      py::arg("text"), "Parses SMT-LIB text; returns (problem, warnings).");

  m.def("gen_member_rev", &regmod::gen_member_rev, py::arg("k"));

  m.def(
      "solve",
      [](const regmod::Problem& p, const std::string& backend, std::size_t max_states, std::optional<std::size_t> max_depth,
         double time_limit, bool symmetry_breaking, const std::string& solver_path) {
        regmod::SolveOptions opts;
        opts.backend = backend_of(backend);
        opts.max_bound = max_states;
        opts.max_depth = max_depth;
        opts.time_limit = time_limit;
        opts.symmetry_breaking = symmetry_breaking;
        opts.solver_path = solver_path;
        std::string json;
        {
          py::gil_scoped_release release;
          auto [out, log] = regmod::solve(p, opts);
          json = regmod::outcome_json(out, log, p);
        }
        return loads(json);
      },
      py::arg("problem"), py::arg("backend") = "native", py::arg("max_states") = 6, py::arg("max_depth") = py::none(),
      py::arg("time_limit") = 0.0, py::arg("symmetry_breaking") = true, py::arg("solver_path") = "",
      "Runs the solver and returns the JSON outcome as a dict.");

  m.def(
      "emit_model_search",
      [](const regmod::Problem& p, std::size_t states, bool symmetry_breaking) {
        regmod::Signature sig(p);
        return regmod::emit_model_search(p, std::vector<std::size_t>(sig.sort_count(), states), symmetry_breaking).text;
      },
      py::arg("problem"), py::arg("states"), py::arg("symmetry_breaking") = true);

  m.def(
      "emit_counterexample_search",
      [](const regmod::Problem& p, std::size_t depth) { return regmod::emit_counterexample_search(p, depth).text; },
      py::arg("problem"), py::arg("depth"));

  m.def("find_solver", &regmod::find_solver);
}
