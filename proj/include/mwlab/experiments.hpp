#pragma once

#include "mwlab/io.hpp"
#include "mwlab/maximal.hpp"

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mwlab {

enum class WeightKind { identity, scalar_power, rotated_pair, log_walk };

/// Weight generator menu.
///   identity      all cells I_d
///   scalar_power  exact cell averages of |x - center|^alpha on the diagonal
///   rotated_pair  R(theta) diag(p+, p-) R(theta)^T, p± the exact cell
///                 averages of |x|^{±alpha}; dim must be 2
///   log_walk      cell_j = exp(H_j), H a symmetric random walk, step sigma
struct WeightSpec {
  WeightKind kind = WeightKind::identity;
  double alpha = 0.0;   // scalar_power, rotated_pair; must lie in (-1, 1)
  double center = 0.0;  // scalar_power; must lie in [0, 1]
  double theta = 0.0;   // rotated_pair
  double sigma = 0.0;   // log_walk; must be >= 0
};

void validate(const WeightSpec& spec, int dim);

/// The seed feeds only the log_walk family; the others are deterministic.
MatrixWeight gen_weight(const WeightSpec& spec, int depth, int dim,
                        std::uint64_t seed);

Json weight_spec_to_json(const WeightSpec& spec);
WeightSpec weight_spec_from_json(const Json& j);

/// A sweep evaluates one instance per alpha_sweep value (when nonempty,
/// overriding weight.alpha) or `trials` seeded instances otherwise.
/// Instance i derives its streams as
///   weight_seed = mix_seed(seed, 3i), family_seed = mix_seed(seed, 3i+1),
///   search_seed = mix_seed(seed, 3i+2).
struct ExperimentConfig {
  int depth = 4;
  int dim = 2;
  WeightSpec weight;
  std::vector<double> alpha_sweep;
  SparseStrategy strategy = SparseStrategy::chain;
  std::uint64_t seed = 0;
  int trials = 1;
};

void validate(const ExperimentConfig& config);
Json config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const Json& j);

/// One CSV/JSON line of a sweep. scalar_ratio is NaN when dim > 1.
/// wall_ms is logged to stderr only; serialized outputs stay byte-identical
/// across runs.
struct ReportRow {
  int instance = 0;
  double a2 = 0.0;
  double c2_norm = 0.0;
  double c2_matrix = 0.0;
  double c1_exact = 0.0;
  double scalar_ratio = 0.0;
  double maximal_lower_bound = 0.0;
  double sparse_norm = 0.0;
  double packing = 0.0;
  double bound_ratio = 0.0;
  double duality_ratio = 0.0;
  double wall_ms = 0.0;
};

/// Raised when an instance fails one of the module invariants; carries the
/// fully serialized instance so the failure can be replayed with `check`.
struct InvariantViolation : std::runtime_error {
  Json instance;
  InvariantViolation(const std::string& what, Json inst)
      : std::runtime_error(what), instance(std::move(inst)) {}
};

struct SweepInstance {
  int id = 0;
  WeightSpec weight;
  std::uint64_t weight_seed = 0;
  std::uint64_t family_seed = 0;
  std::uint64_t search_seed = 0;
};

std::vector<SweepInstance> enumerate_instances(const ExperimentConfig& config);

Json instance_to_json(const ExperimentConfig& config, const SweepInstance& inst,
                      const MatrixWeight& w, const SparseFamily& family,
                      const std::string& violation);

/// Evaluates one instance with every assertable inequality re-checked;
/// throws InvariantViolation on the first failure.
ReportRow evaluate_instance(const ExperimentConfig& config,
                            const SweepInstance& inst);

/// Re-runs the full invariant battery on a serialized instance (quarantine
/// file); returns the failure messages, empty when clean. The weight is taken
/// from the serialized cells, so a quarantined violation reproduces exactly.
std::vector<std::string> check_instance(const Json& instance);

struct SweepResult {
  std::vector<ReportRow> rows;
  /// Least-squares log-log slopes against a2: maximal lower bound,
  /// c1/c2 loss, sparse norm. Reported, never asserted.
  std::array<double, 3> slopes{};
  std::string csv;
  Json json;
};

/// Runs all instances (in parallel, gathered in instance order) and builds
/// the two reports. Deterministic: fixed config gives byte-identical csv
/// and json fields.
SweepResult run_sweep(const ExperimentConfig& config);

/// run_sweep plus files: writes <out_base>.csv and <out_base>.json and logs
/// wall times to stderr. On an invariant violation writes
/// <out_base>.quarantine.json and rethrows.
SweepResult run_sweep_files(const ExperimentConfig& config,
                            const std::string& out_base);

}  // namespace mwlab
