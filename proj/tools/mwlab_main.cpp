// Command-line front end: every operation of the library on weights,
// families, and sweep configs serialized as JSON.
//
// Exit codes: 0 success, 1 invariant violation, 2 bad input / IO error.

#include "mwlab/experiments.hpp"
#include "mwlab/rng.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace {

using namespace mwlab;

struct Options {
  int depth = 4;
  int dim = 2;
  std::uint64_t seed = 0;
  std::string config_path;
  std::string out_path;
  std::string format = "json";

  std::string weight_path;
  std::string kind = "identity";
  double alpha = 0.0;
  double center = 0.0;
  double theta = 0.0;
  double sigma = 0.0;

  std::string family_path;
  std::string strategy = "chain";

  int trials = 2;
  bool aux = false;
};

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

WeightSpec spec_from_flags(const Options& o) {
  Json j{{"kind", o.kind},
         {"alpha", o.alpha},
         {"center", o.center},
         {"theta", o.theta},
         {"sigma", o.sigma}};
  return weight_spec_from_json(j);
}

MatrixWeight resolve_weight(const Options& o) {
  if (!o.weight_path.empty())
    return weight_from_json(load_json_file(o.weight_path));
  return gen_weight(spec_from_flags(o), o.depth, o.dim, o.seed);
}

SparseStrategy parse_strategy(const std::string& name) {
  if (name == "chain") return SparseStrategy::chain;
  if (name == "random") return SparseStrategy::random;
  if (name == "greedy-maximal") return SparseStrategy::greedy_maximal;
  throw std::invalid_argument("unknown sparse strategy \"" + name + "\"");
}

SparseFamily resolve_family(const Options& o, const MatrixWeight& w) {
  if (!o.family_path.empty()) {
    SparseFamily f = family_from_json(load_json_file(o.family_path));
    if (f.depth() != w.depth())
      throw std::invalid_argument("family depth does not match the weight");
    return f;
  }
  return generate_sparse(w.depth(), parse_strategy(o.strategy),
                         mix_seed(o.seed, 1));
}

void emit(const Json& obj, const Options& o) {
  std::string text;
  if (o.format == "csv") {
    for (const auto& [key, value] : obj.items()) {
      text += key;
      text += ",";
      text += value.is_number() ? format_value(value.get<double>())
                                : value.dump();
      text += "\n";
    }
  } else {
    text = obj.dump(2) + "\n";
  }
  if (o.out_path.empty())
    std::fputs(text.c_str(), stdout);
  else
    write_text_file(o.out_path, text);
}

CarlesonSequence induced_sequence(const SparseFamily& family,
                                  const MatrixWeight& against) {
  CarlesonSequence seq(against.depth(), against.dim());
  for (const DyadicIndex& i : family.members())
    seq.set(i, i.measure() * spd_power(average(against, i), -1.0));
  return seq;
}

int run_gen_weight(const Options& o) {
  emit(weight_to_json(resolve_weight(o)), o);
  return 0;
}

int run_a2(const Options& o) {
  emit({{"a2", a2_characteristic(resolve_weight(o))}}, o);
  return 0;
}

int run_embed(const Options& o) {
  const MatrixWeight w = resolve_weight(o);
  const SparseFamily family = resolve_family(o, w);
  const MatrixWeight winv = inverse_weight(w);
  const CarlesonSequence seq = induced_sequence(family, winv);
  const double c1 = embedding_constant(winv, seq);
  const double c2n = testing_constant_norm(winv, seq);
  const double c2m = testing_constant_matrix(winv, seq);
  Json out{{"c1_exact", c1},
           {"c2_norm", c2n},
           {"c2_matrix", c2m},
           {"c1_over_c2_matrix", c2m > 0.0 ? c1 / c2m : 0.0}};
  if (w.dim() == 1) out["scalar_ratio"] = scalar_cet_ratio(winv, seq);
  emit(out, o);
  return 0;
}

int run_maximal(const Options& o) {
  const MatrixWeight w = resolve_weight(o);
  const MaximalSearchResult r = maximal_norm_lower_bound_detail(
      o.aux ? MaximalKind::aux : MaximalKind::mw, w, o.trials,
      mix_seed(o.seed, 2));
  emit({{"norm_lower_bound", r.value},
        {"kind", o.aux ? "aux" : "mw"},
        {"trials", o.trials}},
       o);
  return 0;
}

int run_stopping(const Options& o) {
  const MatrixWeight w = resolve_weight(o);
  Rng rng(mix_seed(o.seed, 3));
  std::vector<Vector> cells(static_cast<std::size_t>(w.cell_count()));
  for (auto& c : cells) {
    c = Vector(w.dim());
    for (int k = 0; k < w.dim(); ++k) c(k) = rng.normal();
  }
  const GridVectorFn f(w.depth(), w.dim(), cells);
  const StoppingDecomposition dec = stopping_time(w, f);
  Json bands = Json::object();
  for (const auto& [k, intervals] : dec.bands)
    bands[std::to_string(k)] = intervals.size();
  emit({{"bands", bands},
        {"g_max", dec.g.max()},
        {"g_over_maximal", check_g_domination(w, f)}},
       o);
  return 0;
}

int run_duality(const Options& o) {
  const MatrixWeight w = resolve_weight(o);
  const SparseFamily family = resolve_family(o, w);
  const MatrixWeight winv = inverse_weight(w);
  MatrixSequence s(w.depth(), w.dim());
  MatrixSequence t(w.depth(), w.dim());
  for (const DyadicIndex& i : family.members()) {
    s.set(i, psd_sqrt(i.measure() * spd_power(average(winv, i), -1.0)));
    t.set(i, psd_sqrt(i.measure() * spd_power(average(w, i), -1.0)));
  }
  emit({{"s_norm", s_norm(s)},
        {"t_norm", t_norm(t)},
        {"pairing", pairing(s, t)},
        {"duality_ratio", duality_ratio(s, t)},
        {"level_set_estimate", check_sest(s)}},
       o);
  return 0;
}

int run_sparse_norm(const Options& o) {
  const MatrixWeight w = resolve_weight(o);
  const SparseFamily family = resolve_family(o, w);
  const ProofChainDiagnostic diag = proof_chain_diagnostic(family, w);
  emit({{"norm", diag.norm},
        {"estimated", diag.norm_estimated},
        {"packing", packing_constant(family)},
        {"a2", diag.a2},
        {"testing_forward", diag.testing_forward},
        {"testing_dual", diag.testing_dual},
        {"embedding_forward", diag.embedding_forward},
        {"embedding_dual", diag.embedding_dual},
        {"end_to_end", diag.end_to_end},
        {"bound_ratio", diag.norm / (diag.a2 * std::sqrt(diag.a2))}},
       o);
  return 0;
}

int run_sweep_cmd(const Options& o) {
  if (o.config_path.empty())
    throw std::invalid_argument("sweep requires --config <json>");
  const ExperimentConfig config =
      config_from_json(load_json_file(o.config_path));
  const std::string base = o.out_path.empty() ? "sweep" : o.out_path;
  try {
    const SweepResult result = run_sweep_files(config, base);
    std::fprintf(stderr, "wrote %s.csv and %s.json (%zu rows)\n", base.c_str(),
                 base.c_str(), result.rows.size());
    return 0;
  } catch (const InvariantViolation& v) {
    std::fprintf(stderr, "sweep aborted: %s\n", v.what());
    return 1;
  }
}

int run_check(const Options& o) {
  if (o.config_path.empty())
    throw std::invalid_argument("check requires --config <instance json>");
  const Json inst = load_json_file(o.config_path);
  const std::vector<std::string> failures = check_instance(inst);
  for (const std::string& msg : failures)
    std::fprintf(stderr, "violation: %s\n", msg.c_str());
  if (failures.empty()) std::fprintf(stderr, "all invariants hold\n");
  return failures.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dyadic matrix-weight laboratory"};
  app.require_subcommand(1);

  Options o;
  const auto add_common = [&o](CLI::App* cmd) {
    cmd->add_option("--depth", o.depth, "tree depth (levels 0..depth)");
    cmd->add_option("--dim", o.dim, "vector dimension");
    cmd->add_option("--seed", o.seed, "base random seed");
    cmd->add_option("--config", o.config_path, "config / instance json path");
    cmd->add_option("--out", o.out_path, "output path (default: stdout)");
    cmd->add_option("--format", o.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
  };
  const auto add_weight = [&o](CLI::App* cmd) {
    cmd->add_option("--weight", o.weight_path, "weight json path");
    cmd->add_option("--kind", o.kind, "weight family")
        ->check(CLI::IsMember(
            {"identity", "scalar-power", "rotated-pair", "log-walk"}));
    cmd->add_option("--alpha", o.alpha, "power exponent in (-1, 1)");
    cmd->add_option("--center", o.center, "power center in [0, 1]");
    cmd->add_option("--theta", o.theta, "rotation angle");
    cmd->add_option("--sigma", o.sigma, "log-walk step");
  };
  const auto add_family = [&o](CLI::App* cmd) {
    cmd->add_option("--family", o.family_path, "sparse family json path");
    cmd->add_option("--strategy", o.strategy, "sparse generator")
        ->check(CLI::IsMember({"chain", "random", "greedy-maximal"}));
  };

  CLI::App* gen = app.add_subcommand("gen-weight", "generate a weight json");
  add_common(gen);
  add_weight(gen);

  CLI::App* a2 = app.add_subcommand("a2", "A2 characteristic of a weight");
  add_common(a2);
  add_weight(a2);

  CLI::App* embed = app.add_subcommand(
      "embed", "Carleson embedding and testing constants of the induced "
               "sequence on a sparse family");
  add_common(embed);
  add_weight(embed);
  add_family(embed);

  CLI::App* maximal =
      app.add_subcommand("maximal", "maximal operator norm lower bound");
  add_common(maximal);
  add_weight(maximal);
  maximal->add_option("--trials", o.trials, "search restarts");
  maximal->add_flag("--aux", o.aux, "use the auxiliary maximal operator");

  CLI::App* stopping =
      app.add_subcommand("stopping", "stopping-time decomposition summary");
  add_common(stopping);
  add_weight(stopping);

  CLI::App* duality = app.add_subcommand(
      "duality", "sequence-space norms and trace duality on the induced pair");
  add_common(duality);
  add_weight(duality);
  add_family(duality);

  CLI::App* sparse =
      app.add_subcommand("sparse-norm", "weighted sparse operator norm and "
                                        "the testing-chain diagnostic");
  add_common(sparse);
  add_weight(sparse);
  add_family(sparse);

  CLI::App* sweep =
      app.add_subcommand("sweep", "run a sweep config, write csv+json reports");
  add_common(sweep);

  CLI::App* check = app.add_subcommand(
      "check", "re-run the invariant battery on a serialized instance");
  add_common(check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(gen)) return run_gen_weight(o);
    if (app.got_subcommand(a2)) return run_a2(o);
    if (app.got_subcommand(embed)) return run_embed(o);
    if (app.got_subcommand(maximal)) return run_maximal(o);
    if (app.got_subcommand(stopping)) return run_stopping(o);
    if (app.got_subcommand(duality)) return run_duality(o);
    if (app.got_subcommand(sparse)) return run_sparse_norm(o);
    if (app.got_subcommand(sweep)) return run_sweep_cmd(o);
    if (app.got_subcommand(check)) return run_check(o);
  } catch (const InvariantViolation& v) {
    std::fprintf(stderr, "invariant violation: %s\n", v.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
