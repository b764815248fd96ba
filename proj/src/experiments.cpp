#include "mwlab/experiments.hpp"

#include "mwlab/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <thread>

namespace mwlab {

namespace {

constexpr const char* kConfigSchema = "mwlab-config-v1";
constexpr const char* kInstanceSchema = "mwlab-instance-v1";
constexpr const char* kSweepSchema = "mwlab-sweep-v1";

// Exact cell average of |x - c|^alpha over [a, b]: the antiderivative
// t^(alpha+1)/(alpha+1) applied on each side of c, then a power-of-two
// rescale by 1/(b - a).
double power_cell_average(double alpha, double c, double a, double b,
                          int depth) {
  const double ap1 = alpha + 1.0;
  const auto prim = [ap1](double t) { return std::pow(t, ap1) / ap1; };
  double integral;
  if (c <= a)
    integral = prim(b - c) - prim(a - c);
  else if (c >= b)
    integral = prim(c - a) - prim(c - b);
  else
    integral = prim(c - a) + prim(b - c);
  return std::ldexp(integral, depth);
}

Matrix sym_exp(const Matrix& h) {
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
  return eig.eigenvectors() *
         eig.eigenvalues().array().exp().matrix().asDiagonal() *
         eig.eigenvectors().transpose();
}

const char* kind_name(WeightKind kind) {
  switch (kind) {
    case WeightKind::identity: return "identity";
    case WeightKind::scalar_power: return "scalar-power";
    case WeightKind::rotated_pair: return "rotated-pair";
    case WeightKind::log_walk: return "log-walk";
  }
  throw std::invalid_argument("unknown weight kind");
}

WeightKind kind_from_name(const std::string& name) {
  for (const WeightKind k :
       {WeightKind::identity, WeightKind::scalar_power,
        WeightKind::rotated_pair, WeightKind::log_walk})
    if (name == kind_name(k)) return k;
  throw std::invalid_argument("unknown weight kind \"" + name + "\"");
}

const char* strategy_name(SparseStrategy s) {
  switch (s) {
    case SparseStrategy::chain: return "chain";
    case SparseStrategy::random: return "random";
    case SparseStrategy::greedy_maximal: return "greedy-maximal";
  }
  throw std::invalid_argument("unknown sparse strategy");
}

SparseStrategy strategy_from_name(const std::string& name) {
  for (const SparseStrategy s :
       {SparseStrategy::chain, SparseStrategy::random,
        SparseStrategy::greedy_maximal})
    if (name == strategy_name(s)) return s;
  throw std::invalid_argument("unknown sparse strategy \"" + name + "\"");
}

void require_alpha(double alpha) {
  if (!(alpha > -1.0 && alpha < 1.0))
    throw std::invalid_argument("power exponent must lie in (-1, 1)");
}

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void validate(const WeightSpec& spec, int dim) {
  switch (spec.kind) {
    case WeightKind::identity:
      break;
    case WeightKind::scalar_power:
      require_alpha(spec.alpha);
      if (!(spec.center >= 0.0 && spec.center <= 1.0))
        throw std::invalid_argument("power center must lie in [0, 1]");
      break;
    case WeightKind::rotated_pair:
      require_alpha(spec.alpha);
      if (dim != 2)
        throw std::invalid_argument("rotated-pair weights require dim = 2");
      break;
    case WeightKind::log_walk:
      if (!(spec.sigma >= 0.0))
        throw std::invalid_argument("log-walk step must be >= 0");
      break;
  }
}

MatrixWeight gen_weight(const WeightSpec& spec, int depth, int dim,
                        std::uint64_t seed) {
  validate(spec, dim);
  const DyadicTree tree(depth);
  const std::int64_t n = tree.cell_count();
  std::vector<Matrix> cells(static_cast<std::size_t>(n));

  switch (spec.kind) {
    case WeightKind::identity:
      return MatrixWeight::identity(depth, dim);

    case WeightKind::scalar_power:
      for (std::int64_t p = 0; p < n; ++p) {
        const DyadicIndex cell = tree.cell(p);
        const double v = power_cell_average(spec.alpha, spec.center,
                                            cell.left(), cell.right(), depth);
        cells[static_cast<std::size_t>(p)] = v * Matrix::Identity(dim, dim);
      }
      break;

    case WeightKind::rotated_pair: {
      Matrix rot(2, 2);
      rot << std::cos(spec.theta), -std::sin(spec.theta), std::sin(spec.theta),
          std::cos(spec.theta);
      for (std::int64_t p = 0; p < n; ++p) {
        const DyadicIndex cell = tree.cell(p);
        Matrix diag = Matrix::Zero(2, 2);
        diag(0, 0) = power_cell_average(spec.alpha, 0.0, cell.left(),
                                        cell.right(), depth);
        diag(1, 1) = power_cell_average(-spec.alpha, 0.0, cell.left(),
                                        cell.right(), depth);
        cells[static_cast<std::size_t>(p)] = rot * diag * rot.transpose();
      }
      break;
    }

    case WeightKind::log_walk: {
      Rng rng(seed);
      Matrix h = Matrix::Zero(dim, dim);
      for (std::int64_t p = 0; p < n; ++p) {
        Matrix step(dim, dim);
        for (int r = 0; r < dim; ++r)
          for (int c = 0; c < dim; ++c) step(r, c) = rng.normal();
        h += 0.5 * spec.sigma * (step + step.transpose());
        cells[static_cast<std::size_t>(p)] = sym_exp(h);
      }
      break;
    }
  }
  return MatrixWeight(depth, dim, std::move(cells));
}

Json weight_spec_to_json(const WeightSpec& spec) {
  Json j{{"kind", kind_name(spec.kind)}};
  switch (spec.kind) {
    case WeightKind::identity:
      break;
    case WeightKind::scalar_power:
      j["alpha"] = spec.alpha;
      j["center"] = spec.center;
      break;
    case WeightKind::rotated_pair:
      j["alpha"] = spec.alpha;
      j["theta"] = spec.theta;
      break;
    case WeightKind::log_walk:
      j["sigma"] = spec.sigma;
      break;
  }
  return j;
}

WeightSpec weight_spec_from_json(const Json& j) {
  WeightSpec spec;
  spec.kind = kind_from_name(j.at("kind").get<std::string>());
  spec.alpha = j.value("alpha", 0.0);
  spec.center = j.value("center", 0.0);
  spec.theta = j.value("theta", 0.0);
  spec.sigma = j.value("sigma", 0.0);
  return spec;
}

void validate(const ExperimentConfig& config) {
  DyadicTree tree(config.depth);  // rejects out-of-range depths
  if (config.dim < 1) throw std::invalid_argument("dim must be >= 1");
  if (config.trials < 1) throw std::invalid_argument("trials must be >= 1");
  validate(config.weight, config.dim);
  if (!config.alpha_sweep.empty()) {
    if (config.weight.kind != WeightKind::scalar_power &&
        config.weight.kind != WeightKind::rotated_pair)
      throw std::invalid_argument("alpha_sweep requires a power-type weight");
    for (const double a : config.alpha_sweep) require_alpha(a);
  }
}

Json config_to_json(const ExperimentConfig& config) {
  return {{"schema", kConfigSchema},
          {"depth", config.depth},
          {"dim", config.dim},
          {"weight", weight_spec_to_json(config.weight)},
          {"alpha_sweep", config.alpha_sweep},
          {"strategy", strategy_name(config.strategy)},
          {"seed", config.seed},
          {"trials", config.trials}};
}

ExperimentConfig config_from_json(const Json& j) {
  detail::require_schema(j, kConfigSchema);
  ExperimentConfig config;
  config.depth = j.at("depth").get<int>();
  config.dim = j.at("dim").get<int>();
  config.weight = weight_spec_from_json(j.at("weight"));
  config.alpha_sweep = j.value("alpha_sweep", std::vector<double>{});
  config.strategy = strategy_from_name(j.value("strategy", "chain"));
  config.seed = j.value("seed", std::uint64_t{0});
  config.trials = j.value("trials", 1);
  validate(config);
  return config;
}

std::vector<SweepInstance> enumerate_instances(const ExperimentConfig& config) {
  std::vector<SweepInstance> out;
  const int count = config.alpha_sweep.empty()
                        ? config.trials
                        : static_cast<int>(config.alpha_sweep.size());
  for (int i = 0; i < count; ++i) {
    SweepInstance inst;
    inst.id = i;
    inst.weight = config.weight;
    if (!config.alpha_sweep.empty())
      inst.weight.alpha = config.alpha_sweep[static_cast<std::size_t>(i)];
    const std::uint64_t base = static_cast<std::uint64_t>(3 * i);
    inst.weight_seed = mix_seed(config.seed, base);
    inst.family_seed = mix_seed(config.seed, base + 1);
    inst.search_seed = mix_seed(config.seed, base + 2);
    out.push_back(inst);
  }
  return out;
}

Json instance_to_json(const ExperimentConfig& config, const SweepInstance& inst,
                      const MatrixWeight& w, const SparseFamily& family,
                      const std::string& violation) {
  Json j{{"schema", kInstanceSchema},
         {"instance", inst.id},
         {"depth", config.depth},
         {"dim", config.dim},
         {"weight_spec", weight_spec_to_json(inst.weight)},
         {"weight", weight_to_json(w)},
         {"family", family_to_json(family)},
         {"seeds",
          {{"weight", inst.weight_seed},
           {"family", inst.family_seed},
           {"search", inst.search_seed}}}};
  if (!violation.empty()) j["violation"] = violation;
  return j;
}

namespace {

// The shared battery behind evaluate_instance and check_instance: computes
// the full report row, invoking fail(message) for each violated inequality.
template <typename FailFn>
ReportRow invariant_battery(int depth, int dim, const MatrixWeight& w,
                            const SparseFamily& family,
                            std::uint64_t search_seed, int instance_id,
                            FailFn&& fail) {
  ReportRow row;
  row.instance = instance_id;

  row.a2 = a2_characteristic(w);
  if (row.a2 < 1.0 - 1e-9) fail("a2 characteristic below 1");
  for (const DyadicIndex& i : w.tree().all_intervals())
    if (contraction_check(w, i) > 1.0 + 1e-10)
      fail("contraction above 1 at " + i.str());

  const ProofChainDiagnostic diag = proof_chain_diagnostic(family, w);
  if (diag.testing_forward > 2.0 + 1e-9)
    fail("forward testing constant above 2");
  if (diag.testing_dual > 2.0 + 1e-9) fail("dual testing constant above 2");
  if (diag.end_to_end < diag.norm - 1e-9)
    fail("testing chain fails to dominate the sparse norm");

  const MatrixWeight winv = inverse_weight(w);
  CarlesonSequence fwd(depth, dim);
  for (const DyadicIndex& i : family.members())
    fwd.set(i, i.measure() * spd_power(average(winv, i), -1.0));
  row.c2_norm = testing_constant_norm(winv, fwd);
  row.c2_matrix = testing_constant_matrix(winv, fwd);
  row.c1_exact = embedding_constant(winv, fwd);
  if (row.c2_matrix > row.c1_exact + 1e-9)
    fail("testing constant exceeds the embedding constant");

  if (dim == 1) {
    row.scalar_ratio = scalar_cet_ratio(winv, fwd);
    if (row.scalar_ratio < 1.0 - 1e-9 || row.scalar_ratio > 4.0 + 1e-9)
      fail("scalar embedding/testing ratio outside [1, 4]");
  } else {
    row.scalar_ratio = std::numeric_limits<double>::quiet_NaN();
  }

  const MaximalSearchResult search =
      maximal_norm_lower_bound_detail(MaximalKind::mw, w, 2, search_seed);
  row.maximal_lower_bound = search.value;
  if (row.maximal_lower_bound < 1.0 - 1e-9)
    fail("maximal norm lower bound below 1");
  if (check_domination(w, search.argmax) > 1e-10)
    fail("pointwise maximal domination fails");
  if (check_g_domination(w, search.argmax) > 4.0 + 1e-9)
    fail("stopping-time g bound above 4");

  row.sparse_norm = diag.norm;
  row.packing = packing_constant(family);
  const double packing_cap = 1.0 / (1.0 - family.sparsity_constant());
  if (row.packing > packing_cap + 1e-12)
    fail("packing constant above the geometric bound");
  row.bound_ratio = row.sparse_norm / (row.a2 * std::sqrt(row.a2));

  MatrixSequence s(depth, dim);
  MatrixSequence t(depth, dim);
  for (const DyadicIndex& i : family.members()) {
    s.set(i, psd_sqrt(i.measure() * spd_power(average(winv, i), -1.0)));
    t.set(i, psd_sqrt(i.measure() * spd_power(average(w, i), -1.0)));
  }
  if (check_sest(s) > 1.0 + 1e-9) fail("sequence level-set estimate above 1");
  row.duality_ratio = duality_ratio(s, t);
  if (!std::isfinite(row.duality_ratio) || row.duality_ratio < 0.0)
    fail("duality ratio is not a finite nonnegative value");

  return row;
}

}  // namespace

ReportRow evaluate_instance(const ExperimentConfig& config,
                            const SweepInstance& inst) {
  const auto start = std::chrono::steady_clock::now();
  const MatrixWeight w =
      gen_weight(inst.weight, config.depth, config.dim, inst.weight_seed);
  const SparseFamily family =
      generate_sparse(config.depth, config.strategy, inst.family_seed);
  const auto fail = [&](const std::string& msg) {
    throw InvariantViolation(
        msg, instance_to_json(config, inst, w, family, msg));
  };
  ReportRow row = invariant_battery(config.depth, config.dim, w, family,
                                    inst.search_seed, inst.id, fail);
  row.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - start)
                    .count();
  return row;
}

std::vector<std::string> check_instance(const Json& instance) {
  detail::require_schema(instance, kInstanceSchema);
  const MatrixWeight w = weight_from_json(instance.at("weight"));
  const SparseFamily family = family_from_json(instance.at("family"));
  const std::uint64_t search_seed =
      instance.at("seeds").at("search").get<std::uint64_t>();
  const int id = instance.value("instance", 0);

  std::vector<std::string> failures;
  invariant_battery(w.depth(), w.dim(), w, family, search_seed, id,
                    [&](const std::string& msg) { failures.push_back(msg); });
  return failures;
}

namespace {

double loglog_slope(const std::vector<double>& xs,
                    const std::vector<double>& ys) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (xs[i] > 0.0 && ys[i] > 0.0 && std::isfinite(xs[i]) &&
        std::isfinite(ys[i])) {
      lx.push_back(std::log(xs[i]));
      ly.push_back(std::log(ys[i]));
    }
  if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(lx.size());
  my /= static_cast<double>(lx.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / sxx;
}

Json row_to_json(const ReportRow& r) {
  return {{"instance", r.instance},
          {"a2", r.a2},
          {"c2_norm", r.c2_norm},
          {"c2_matrix", r.c2_matrix},
          {"c1_exact", r.c1_exact},
          {"scalar_ratio", r.scalar_ratio},
          {"maximal_lower_bound", r.maximal_lower_bound},
          {"sparse_norm", r.sparse_norm},
          {"packing", r.packing},
          {"bound_ratio", r.bound_ratio},
          {"duality_ratio", r.duality_ratio}};
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& config) {
  validate(config);
  const std::vector<SweepInstance> instances = enumerate_instances(config);

  // Instances evaluate in parallel; rows are gathered in instance order, so
  // both output files and the choice of first-reported violation are
  // deterministic regardless of scheduling.
  const std::size_t workers = std::max<std::size_t>(
      1, std::min<std::size_t>(std::thread::hardware_concurrency(), 8));
  std::vector<ReportRow> rows(instances.size());
  for (std::size_t begin = 0; begin < instances.size(); begin += workers) {
    const std::size_t end = std::min(begin + workers, instances.size());
    std::vector<std::future<ReportRow>> batch;
    for (std::size_t i = begin; i < end; ++i)
      batch.push_back(std::async(std::launch::async, [&config, &instances, i] {
        return evaluate_instance(config, instances[i]);
      }));
    for (std::size_t i = begin; i < end; ++i) rows[i] = batch[i - begin].get();
  }

  SweepResult result;
  result.rows = rows;

  std::vector<double> a2s, maximals, losses, sparses;
  for (const ReportRow& r : rows) {
    a2s.push_back(r.a2);
    maximals.push_back(r.maximal_lower_bound);
    losses.push_back(r.c2_matrix > 0.0 ? r.c1_exact / r.c2_matrix : 0.0);
    sparses.push_back(r.sparse_norm);
  }
  result.slopes = {loglog_slope(a2s, maximals), loglog_slope(a2s, losses),
                   loglog_slope(a2s, sparses)};

  std::string csv = "schema," + std::string(kSweepSchema) + "\n";
  csv +=
      "instance,a2,c2_norm,c2_matrix,c1_exact,scalar_ratio,"
      "maximal_lower_bound,sparse_norm,packing,bound_ratio,duality_ratio\n";
  for (const ReportRow& r : rows) {
    csv += std::to_string(r.instance);
    for (const double v :
         {r.a2, r.c2_norm, r.c2_matrix, r.c1_exact, r.scalar_ratio,
          r.maximal_lower_bound, r.sparse_norm, r.packing, r.bound_ratio,
          r.duality_ratio})
      csv += "," + format_value(v);
    csv += "\n";
  }
  result.csv = std::move(csv);

  Json rows_json = Json::array();
  for (const ReportRow& r : rows) rows_json.push_back(row_to_json(r));
  result.json = {{"schema", kSweepSchema},
                 {"config", config_to_json(config)},
                 {"rows", std::move(rows_json)},
                 {"slopes",
                  {{"maximal_vs_a2", result.slopes[0]},
                   {"cet_loss_vs_a2", result.slopes[1]},
                   {"sparse_vs_a2", result.slopes[2]}}}};
  return result;
}

SweepResult run_sweep_files(const ExperimentConfig& config,
                            const std::string& out_base) {
  try {
    SweepResult result = run_sweep(config);
    write_text_file(out_base + ".csv", result.csv);
    write_text_file(out_base + ".json", result.json.dump(2) + "\n");
    for (const ReportRow& r : result.rows)
      std::fprintf(stderr, "instance %d: %.1f ms\n", r.instance, r.wall_ms);
    return result;
  } catch (const InvariantViolation& v) {
    write_text_file(out_base + ".quarantine.json",
                    v.instance.dump(2) + "\n");
    std::fprintf(stderr, "invariant violation: %s (instance written to %s)\n",
                 v.what(), (out_base + ".quarantine.json").c_str());
    throw;
  }
}

}  // namespace mwlab
