// Python bindings for the main operations: weight generation, A2, sparse
// families, the weighted sparse norm with its testing-chain diagnostic,
// embedding/testing constants, the maximal lower bound, and sweeps.
//
// Matrices cross the boundary as numpy arrays (copies, never views);
// serialized artifacts cross as JSON text so the python side stays
// byte-compatible with the CLI.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mwlab/carleson.hpp"
#include "mwlab/experiments.hpp"
#include "mwlab/io.hpp"
#include "mwlab/maximal.hpp"
#include "mwlab/rng.hpp"
#include "mwlab/sparse.hpp"
#include "mwlab/spd.hpp"
#include "mwlab/weights.hpp"

namespace py = pybind11;
using namespace mwlab;

namespace {

SparseStrategy strategy_from_string(const std::string& name) {
  if (name == "chain") return SparseStrategy::chain;
  if (name == "random") return SparseStrategy::random;
  if (name == "greedy-maximal") return SparseStrategy::greedy_maximal;
  throw std::invalid_argument("unknown strategy: " + name);
}

WeightSpec spec_from_args(const std::string& kind, double alpha, double center,
                          double theta, double sigma) {
  Json j{{"kind", kind},
         {"alpha", alpha},
         {"center", center},
         {"theta", theta},
         {"sigma", sigma}};
  return weight_spec_from_json(j);
}

// Rows of a (cells x dim) array become the cell values of a grid function.
GridVectorFn fn_from_array(int depth, const Matrix& values) {
  const DyadicTree tree(depth);
  if (values.rows() != tree.cell_count())
    throw DimensionMismatchError("expected one row per cell");
  std::vector<Vector> cells(static_cast<std::size_t>(values.rows()));
  for (std::int64_t i = 0; i < values.rows(); ++i)
    cells[static_cast<std::size_t>(i)] = values.row(i).transpose();
  return GridVectorFn(depth, static_cast<int>(values.cols()),
                      std::move(cells));
}

Matrix fn_to_array(const GridVectorFn& f) {
  const std::int64_t n = DyadicTree(f.depth()).cell_count();
  Matrix out(n, f.dim());
  for (std::int64_t i = 0; i < n; ++i) out.row(i) = f.cell(i).transpose();
  return out;
}

CarlesonSequence induced_sequence(const SparseFamily& family,
                                  const MatrixWeight& against) {
  CarlesonSequence seq(against.depth(), against.dim());
  for (const DyadicIndex& i : family.members())
    seq.set(i, i.measure() * spd_power(average(against, i), -1.0));
  return seq;
}

py::dict proof_chain_dict(const SparseFamily& family, const MatrixWeight& w) {
  ProofChainDiagnostic d;
  {
    py::gil_scoped_release release;
    d = proof_chain_diagnostic(family, w);
  }
  py::dict out;
  out["testing_forward"] = d.testing_forward;
  out["testing_dual"] = d.testing_dual;
  out["embedding_forward"] = d.embedding_forward;
  out["embedding_dual"] = d.embedding_dual;
  out["a2"] = d.a2;
  out["end_to_end"] = d.end_to_end;
  out["norm"] = d.norm;
  out["norm_estimated"] = d.norm_estimated;
  return out;
}

py::dict embedding_dict(const SparseFamily& family, const MatrixWeight& w) {
  const MatrixWeight winv = inverse_weight(w);
  const CarlesonSequence seq = induced_sequence(family, winv);
  py::dict out;
  out["c1_exact"] = embedding_constant(winv, seq);
  out["c2_norm"] = testing_constant_norm(winv, seq);
  out["c2_matrix"] = testing_constant_matrix(winv, seq);
  if (w.dim() == 1) out["scalar_ratio"] = scalar_cet_ratio(winv, seq);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "dyadic matrix-weight laboratory";

  py::register_exception<NotSpdError>(m, "NotSpdError", PyExc_ValueError);
  py::register_exception<InvariantViolation>(m, "InvariantViolationError",
                                             PyExc_RuntimeError);

  py::class_<MatrixWeight>(m, "MatrixWeight")
      .def(py::init<int, int, std::vector<Matrix>>(), py::arg("depth"),
           py::arg("dim"), py::arg("cells"))
      .def_static("identity", &MatrixWeight::identity, py::arg("depth"),
                  py::arg("dim"))
      .def_property_readonly("depth", &MatrixWeight::depth)
      .def_property_readonly("dim", &MatrixWeight::dim)
      .def("cell", &MatrixWeight::cell, py::arg("i"),
           py::return_value_policy::copy)
      .def("__repr__", [](const MatrixWeight& w) {
        return "MatrixWeight(depth=" + std::to_string(w.depth()) +
               ", dim=" + std::to_string(w.dim()) + ")";
      });

  py::class_<SparseFamily>(m, "SparseFamily")
      .def_property_readonly("depth", &SparseFamily::depth)
      .def_property_readonly("sparsity_constant",
                             &SparseFamily::sparsity_constant)
      .def("__len__", &SparseFamily::size)
      .def("members",
           [](const SparseFamily& f) {
             std::vector<std::string> out;
             for (const DyadicIndex& i : f.members()) out.push_back(i.str());
             return out;
           })
      .def("__contains__",
           [](const SparseFamily& f, const std::string& s) {
             return f.contains(DyadicIndex::parse(s));
           })
      .def("__repr__", [](const SparseFamily& f) {
        return "SparseFamily(depth=" + std::to_string(f.depth()) +
               ", members=" + std::to_string(f.size()) + ")";
      });

  m.def(
      "gen_weight",
      [](const std::string& kind, int depth, int dim, std::uint64_t seed,
         double alpha, double center, double theta, double sigma) {
        return gen_weight(spec_from_args(kind, alpha, center, theta, sigma),
                          depth, dim, seed);
      },
      py::arg("kind"), py::arg("depth"), py::arg("dim"), py::arg("seed") = 0,
      py::arg("alpha") = 0.0, py::arg("center") = 0.0, py::arg("theta") = 0.0,
      py::arg("sigma") = 0.0,
      "Generate a weight; kinds: identity, scalar-power, rotated-pair, "
      "log-walk. Only log-walk consumes the seed.");

  m.def("a2", &a2_characteristic, py::arg("weight"),
        py::call_guard<py::gil_scoped_release>(),
        "A2 characteristic: max over intervals of "
        "||<W>_I^{1/2} <W^{-1}>_I^{1/2}||^2.");

  m.def("inverse_weight", &inverse_weight, py::arg("weight"));

  m.def(
      "weight_to_json",
      [](const MatrixWeight& w) { return weight_to_json(w).dump(); },
      py::arg("weight"));
  m.def(
      "weight_from_json",
      [](const std::string& s) { return weight_from_json(Json::parse(s)); },
      py::arg("text"));

  m.def(
      "generate_sparse",
      [](int depth, const std::string& strategy, std::uint64_t seed,
         double c) {
        return generate_sparse(depth, strategy_from_string(strategy), seed, c);
      },
      py::arg("depth"), py::arg("strategy") = "chain", py::arg("seed") = 0,
      py::arg("c") = 0.5,
      "Generate a sparse family; strategies: chain, random, greedy-maximal.");

  m.def(
      "family_to_json",
      [](const SparseFamily& f) { return family_to_json(f).dump(); },
      py::arg("family"));
  m.def(
      "family_from_json",
      [](const std::string& s) { return family_from_json(Json::parse(s)); },
      py::arg("text"));

  m.def("packing_constant", &packing_constant, py::arg("family"),
        py::call_guard<py::gil_scoped_release>(),
        "Max over members J of sum |I|/|J| over members I inside J.");

  m.def(
      "apply_sparse",
      [](const SparseFamily& f, const Matrix& values) {
        return fn_to_array(apply_sparse(f, fn_from_array(f.depth(), values)));
      },
      py::arg("family"), py::arg("values"),
      "Apply the sparse averaging operator to a (cells x dim) array of cell "
      "values; returns the same shape.");

  m.def(
      "sparse_norm",
      [](const SparseFamily& f, const MatrixWeight& w) {
        SparseNormResult r;
        {
          py::gil_scoped_release release;
          r = sparse_weighted_norm_detail(f, w);
        }
        return py::make_tuple(r.value, r.estimated);
      },
      py::arg("family"), py::arg("weight"),
      "Weighted operator norm of the sparse operator; returns (value, "
      "estimated) where estimated means power iteration instead of a dense "
      "SVD.");

  m.def("proof_chain", &proof_chain_dict, py::arg("family"),
        py::arg("weight"),
        "Testing and embedding constants of the induced sequences plus the "
        "end-to-end bound sqrt(a2 * C1_forward * C1_dual) >= norm.");

  m.def("bound_ratio", &bound_ratio, py::arg("family"), py::arg("weight"),
        py::call_guard<py::gil_scoped_release>(),
        "sparse_norm / a2^{3/2}.");

  m.def("embedding_report", &embedding_dict, py::arg("family"),
        py::arg("weight"),
        "C1 (exact embedding constant), C2 (norm and matrix testing "
        "constants) of the sequence |I| <W^{-1}>_I^{-1} tested against "
        "W^{-1}; scalar_ratio included when dim == 1.");

  m.def(
      "maximal_lower_bound",
      [](const MatrixWeight& w, int trials, std::uint64_t seed, bool aux) {
        const MaximalSearchResult r = [&] {
          py::gil_scoped_release release;
          return maximal_norm_lower_bound_detail(
              aux ? MaximalKind::aux : MaximalKind::mw, w, trials, seed);
        }();
        return py::make_tuple(r.value, fn_to_array(r.argmax));
      },
      py::arg("weight"), py::arg("trials") = 4, py::arg("seed") = 0,
      py::arg("aux") = false,
      "Certified lower bound on the weighted maximal operator norm; returns "
      "(value, argmax_cells).");

  m.def(
      "sweep",
      [](const std::string& config_text) {
        const ExperimentConfig config =
            config_from_json(Json::parse(config_text));
        SweepResult r;
        {
          py::gil_scoped_release release;
          r = run_sweep(config);
        }
        py::dict out;
        out["csv"] = r.csv;
        out["json"] = r.json.dump();
        out["slopes"] = py::make_tuple(r.slopes[0], r.slopes[1], r.slopes[2]);
        return out;
      },
      py::arg("config"),
      "Run a sweep from a config JSON string; returns dict with the csv "
      "report, the json report (as text), and the three log-log slopes. "
      "Byte-identical across runs for a fixed config.");

  m.def(
      "instances",
      [](const std::string& config_text) {
        const ExperimentConfig config =
            config_from_json(Json::parse(config_text));
        validate(config);
        std::vector<std::string> out;
        for (const SweepInstance& inst : enumerate_instances(config)) {
          const MatrixWeight w =
              gen_weight(inst.weight, config.depth, config.dim,
                         inst.weight_seed);
          const SparseFamily family =
              generate_sparse(config.depth, config.strategy, inst.family_seed);
          out.push_back(instance_to_json(config, inst, w, family, "").dump());
        }
        return out;
      },
      py::arg("config"),
      "Serialize every instance a sweep config enumerates, exactly as the "
      "quarantine file would.");

  m.def(
      "check",
      [](const std::string& instance_text) {
        const Json inst = Json::parse(instance_text);
        std::vector<std::string> out;
        {
          py::gil_scoped_release release;
          out = check_instance(inst);
        }
        return out;
      },
      py::arg("instance"),
      "Re-run the invariant battery on a serialized instance; returns the "
      "failure messages, empty when clean.");

  m.def(
      "mix_seed",
      [](std::uint64_t seed, std::uint64_t stream) {
        return mix_seed(seed, stream);
      },
      py::arg("seed"), py::arg("stream"));
}
