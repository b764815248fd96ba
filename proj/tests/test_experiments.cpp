#include "mwlab/experiments.hpp"

#include "mwlab/rng.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

using namespace mwlab;

namespace {

std::string temp_base(const std::string& name) {
  static int counter = 0;
  return "/tmp/mwlab-sweep-" + std::to_string(::getpid()) + "-" +
         std::to_string(counter++) + "-" + name;
}

WeightSpec power_spec(double alpha, double center = 0.0) {
  WeightSpec spec;
  spec.kind = WeightKind::scalar_power;
  spec.alpha = alpha;
  spec.center = center;
  return spec;
}

WeightSpec rotated_spec(double alpha, double theta) {
  WeightSpec spec;
  spec.kind = WeightKind::rotated_pair;
  spec.alpha = alpha;
  spec.theta = theta;
  return spec;
}

WeightSpec walk_spec(double sigma) {
  WeightSpec spec;
  spec.kind = WeightKind::log_walk;
  spec.sigma = sigma;
  return spec;
}

}  // namespace

TEST_CASE("identity and flat-power specs give the identity weight") {
  const MatrixWeight id = gen_weight(WeightSpec{}, 3, 2, 0);
  CHECK(a2_characteristic(id) == doctest::Approx(1.0).epsilon(1e-12));

  // alpha = 0 with a dyadic-exact center: cells are exactly I.
  const MatrixWeight flat = gen_weight(power_spec(0.0, 0.0), 4, 2, 0);
  for (std::int64_t p = 0; p < flat.cell_count(); ++p)
    CHECK((flat.cell(p) - Matrix::Identity(2, 2)).norm() == 0.0);

  // alpha = 0 with a center inside a cell still averages to 1.
  const MatrixWeight off = gen_weight(power_spec(0.0, 0.3), 4, 1, 0);
  for (std::int64_t p = 0; p < off.cell_count(); ++p)
    CHECK(off.cell(p)(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("scalar-power cells match the antiderivative closed form") {
  const MatrixWeight w = gen_weight(power_spec(0.5, 0.0), 2, 1, 0);
  const auto cell_value = [](double a, double b) {
    return (std::pow(b, 1.5) - std::pow(a, 1.5)) / 1.5 / (b - a);
  };
  for (std::int64_t p = 0; p < 4; ++p) {
    const double a = 0.25 * static_cast<double>(p);
    CHECK(w.cell(p)(0, 0) ==
          doctest::Approx(cell_value(a, a + 0.25)).epsilon(1e-14));
  }

  // Center inside a cell: two-sided split at c = 0.5 with alpha = -0.5;
  // cell [0.25, 0.5) has integral ((c-a)^{1/2})/0.5 with c = b.
  const MatrixWeight v = gen_weight(power_spec(-0.5, 0.5), 2, 1, 0);
  const double expected =
      (std::sqrt(0.25) / 0.5) * 4.0;  // primitive t^{1/2}/(1/2), a = 0.25
  CHECK(v.cell(1)(0, 0) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("a2 of the power weight agrees with an independent scalar loop") {
  const int depth = 8;
  const MatrixWeight w = gen_weight(power_spec(0.5, 0.0), depth, 1, 0);
  const DyadicTree tree(depth);
  double best = 0.0;
  for (const DyadicIndex& i : tree.all_intervals()) {
    const auto [lo, hi] = tree.cell_range(i);
    double mean = 0.0, mean_inv = 0.0;
    for (std::int64_t p = lo; p < hi; ++p) {
      mean += w.cell(p)(0, 0);
      mean_inv += 1.0 / w.cell(p)(0, 0);
    }
    const double count = static_cast<double>(hi - lo);
    best = std::max(best, (mean / count) * (mean_inv / count));
  }
  CHECK(a2_characteristic(w) == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("a2 of power weights grows with the exponent") {
  double prev = 0.0;
  for (const double alpha : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const double a2 = a2_characteristic(gen_weight(power_spec(alpha), 6, 1, 0));
    CHECK(a2 > prev - 1e-12);
    prev = a2;
  }
  CHECK(prev > 1.5);  // far from trivial at alpha = 0.9
}

TEST_CASE("rotated-pair weight is a rotation of the diagonal pair") {
  const MatrixWeight straight = gen_weight(rotated_spec(0.4, 0.0), 4, 2, 0);
  for (std::int64_t p = 0; p < straight.cell_count(); ++p) {
    CHECK(straight.cell(p)(0, 1) == 0.0);
    CHECK(straight.cell(p)(1, 0) == 0.0);
  }
  // The expected diagonal entries are the scalar power cells for +-alpha.
  const MatrixWeight plus = gen_weight(power_spec(0.4), 4, 1, 0);
  const MatrixWeight minus = gen_weight(power_spec(-0.4), 4, 1, 0);
  for (std::int64_t p = 0; p < straight.cell_count(); ++p) {
    CHECK(straight.cell(p)(0, 0) == plus.cell(p)(0, 0));
    CHECK(straight.cell(p)(1, 1) == minus.cell(p)(0, 0));
  }

  // A fixed rotation conjugates every cell, so the characteristic is
  // invariant under theta.
  const MatrixWeight tilted = gen_weight(rotated_spec(0.4, 0.6), 4, 2, 0);
  CHECK(a2_characteristic(tilted) ==
        doctest::Approx(a2_characteristic(straight)).epsilon(1e-10));

  CHECK_THROWS_AS(gen_weight(rotated_spec(0.4, 0.6), 4, 3, 0),
                  std::invalid_argument);
}

TEST_CASE("log-walk weight is seed-deterministic") {
  const MatrixWeight frozen = gen_weight(walk_spec(0.0), 3, 2, 9);
  for (std::int64_t p = 0; p < frozen.cell_count(); ++p)
    CHECK((frozen.cell(p) - Matrix::Identity(2, 2)).norm() <= 1e-14);

  const MatrixWeight a = gen_weight(walk_spec(0.4), 4, 2, 9);
  const MatrixWeight b = gen_weight(walk_spec(0.4), 4, 2, 9);
  for (std::int64_t p = 0; p < a.cell_count(); ++p)
    CHECK((a.cell(p) - b.cell(p)).norm() == 0.0);
  const MatrixWeight c = gen_weight(walk_spec(0.4), 4, 2, 10);
  CHECK(a2_characteristic(a) != a2_characteristic(c));
  CHECK(a2_characteristic(a) >= 1.0);
}

TEST_CASE("weight spec validation") {
  CHECK_THROWS_AS(gen_weight(power_spec(1.0), 3, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(gen_weight(power_spec(-1.0), 3, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(gen_weight(power_spec(0.5, -0.1), 3, 1, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(gen_weight(walk_spec(-1.0), 3, 2, 0), std::invalid_argument);
}

TEST_CASE("weight spec and config json round trips") {
  for (const WeightSpec& spec :
       {WeightSpec{}, power_spec(0.3, 0.5), rotated_spec(-0.2, 1.1),
        walk_spec(0.7)}) {
    const WeightSpec back = weight_spec_from_json(weight_spec_to_json(spec));
    CHECK(back.kind == spec.kind);
    CHECK(back.alpha == spec.alpha);
    CHECK(back.center == spec.center);
    CHECK(back.theta == spec.theta);
    CHECK(back.sigma == spec.sigma);
  }

  ExperimentConfig config;
  config.depth = 5;
  config.dim = 2;
  config.weight = rotated_spec(0.1, 0.6);
  config.alpha_sweep = {0.1, 0.2, 0.3};
  config.strategy = SparseStrategy::random;
  config.seed = 12345;
  config.trials = 7;
  const ExperimentConfig back =
      config_from_json(Json::parse(config_to_json(config).dump()));
  CHECK(back.depth == 5);
  CHECK(back.dim == 2);
  CHECK(back.weight.theta == 0.6);
  CHECK(back.alpha_sweep == config.alpha_sweep);
  CHECK(back.strategy == SparseStrategy::random);
  CHECK(back.seed == 12345);
  CHECK(back.trials == 7);

  Json bad = config_to_json(config);
  bad["weight"]["kind"] = "unheard-of";
  CHECK_THROWS_AS(config_from_json(bad), std::invalid_argument);

  ExperimentConfig invalid = config;
  invalid.trials = 0;
  CHECK_THROWS_AS(validate(invalid), std::invalid_argument);

  ExperimentConfig mismatched = config;
  mismatched.weight = WeightSpec{};
  CHECK_THROWS_AS(validate(mismatched), std::invalid_argument);
}

TEST_CASE("instance enumeration derives per-instance streams") {
  ExperimentConfig config;
  config.depth = 4;
  config.dim = 2;
  config.weight = rotated_spec(0.5, 0.2);
  config.alpha_sweep = {0.1, 0.4, 0.8};
  config.seed = 99;
  const auto instances = enumerate_instances(config);
  REQUIRE(instances.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(instances[static_cast<std::size_t>(i)].id == i);
    CHECK(instances[static_cast<std::size_t>(i)].weight.alpha ==
          config.alpha_sweep[static_cast<std::size_t>(i)]);
    CHECK(instances[static_cast<std::size_t>(i)].weight_seed ==
          mix_seed(99, static_cast<std::uint64_t>(3 * i)));
    CHECK(instances[static_cast<std::size_t>(i)].family_seed ==
          mix_seed(99, static_cast<std::uint64_t>(3 * i + 1)));
    CHECK(instances[static_cast<std::size_t>(i)].search_seed ==
          mix_seed(99, static_cast<std::uint64_t>(3 * i + 2)));
  }

  ExperimentConfig plain;
  plain.weight = walk_spec(0.3);
  plain.trials = 4;
  CHECK(enumerate_instances(plain).size() == 4);
}

TEST_CASE("evaluate_instance fills a consistent row") {
  ExperimentConfig config;
  config.depth = 4;
  config.dim = 1;
  config.weight = power_spec(0.5, 0.0);
  config.strategy = SparseStrategy::chain;
  config.seed = 7;
  const auto instances = enumerate_instances(config);
  REQUIRE(instances.size() == 1);
  const ReportRow row = evaluate_instance(config, instances[0]);

  CHECK(row.instance == 0);
  CHECK(row.a2 >= 1.0);
  CHECK(row.c2_matrix <= row.c1_exact + 1e-9);
  CHECK(row.scalar_ratio >= 1.0 - 1e-9);
  CHECK(row.scalar_ratio <= 4.0 + 1e-9);
  CHECK(row.maximal_lower_bound >= 1.0 - 1e-9);
  CHECK(row.packing == 2.0 - std::ldexp(1.0, -4));
  CHECK(row.bound_ratio ==
        doctest::Approx(row.sparse_norm / std::pow(row.a2, 1.5))
            .epsilon(1e-12));
  CHECK(row.duality_ratio >= 0.0);
  CHECK(std::isfinite(row.duality_ratio));
  CHECK(row.wall_ms >= 0.0);

  // The identity instance keeps the trivial values.
  ExperimentConfig id_config;
  id_config.depth = 3;
  id_config.dim = 2;
  const ReportRow id_row =
      evaluate_instance(id_config, enumerate_instances(id_config)[0]);
  CHECK(id_row.a2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::isnan(id_row.scalar_ratio));
  CHECK(id_row.bound_ratio == doctest::Approx(id_row.sparse_norm).epsilon(1e-9));
}

TEST_CASE("check_instance accepts a serialized healthy instance") {
  ExperimentConfig config;
  config.depth = 3;
  config.dim = 2;
  config.weight = walk_spec(0.5);
  config.strategy = SparseStrategy::random;
  config.seed = 21;
  const SweepInstance inst = enumerate_instances(config)[0];
  const MatrixWeight w =
      gen_weight(inst.weight, config.depth, config.dim, inst.weight_seed);
  const SparseFamily family =
      generate_sparse(config.depth, config.strategy, inst.family_seed);
  const Json doc = instance_to_json(config, inst, w, family, "");
  CHECK(!doc.contains("violation"));
  CHECK(check_instance(Json::parse(doc.dump())).empty());

  const Json quarantined =
      instance_to_json(config, inst, w, family, "synthetic message");
  CHECK(quarantined.at("violation") == "synthetic message");

  CHECK_THROWS_AS(check_instance(Json{{"schema", "other"}}),
                  std::invalid_argument);
}

TEST_CASE("run_sweep is deterministic and carries the full schema") {
  ExperimentConfig config;
  config.depth = 3;
  config.dim = 2;
  config.weight = rotated_spec(0.1, 0.6);
  config.alpha_sweep = {0.1, 0.5};
  config.strategy = SparseStrategy::chain;
  config.seed = 11;

  const SweepResult first = run_sweep(config);
  const SweepResult second = run_sweep(config);
  CHECK(first.csv == second.csv);
  CHECK(first.json.dump() == second.json.dump());

  REQUIRE(first.rows.size() == 2);
  CHECK(first.csv.rfind("schema,mwlab-sweep-v1\n", 0) == 0);
  CHECK(first.csv.find("instance,a2,c2_norm,c2_matrix,c1_exact,scalar_ratio,"
                       "maximal_lower_bound,sparse_norm,packing,bound_ratio,"
                       "duality_ratio\n") != std::string::npos);
  // dim = 2: the scalar column is nan, printed deterministically.
  CHECK(first.csv.find(",nan,") != std::string::npos);

  CHECK(first.json.at("schema") == "mwlab-sweep-v1");
  CHECK(first.json.at("config").at("depth") == 3);
  CHECK(first.json.at("rows").size() == 2);
  CHECK(first.json.at("slopes").contains("sparse_vs_a2"));

  // A csv cell parses back to the exact double of the row.
  const std::string& csv = first.csv;
  std::size_t line_start = csv.find('\n', csv.find('\n') + 1) + 1;
  std::size_t comma = csv.find(',', line_start);
  const double a2 = std::strtod(csv.c_str() + comma + 1, nullptr);
  CHECK(a2 == first.rows[0].a2);

  // Rows grow with alpha on this corpus.
  CHECK(first.rows[1].a2 > first.rows[0].a2);
}

TEST_CASE("run_sweep_files writes byte-identical reports") {
  ExperimentConfig config;
  config.depth = 3;
  config.dim = 1;
  config.weight = walk_spec(0.4);
  config.strategy = SparseStrategy::random;
  config.seed = 5;
  config.trials = 3;

  const std::string base = temp_base("report");
  const SweepResult result = run_sweep_files(config, base);
  const std::string csv1 = read_text_file(base + ".csv");
  CHECK(csv1 == result.csv);
  const Json mirror = load_json_file(base + ".json");
  CHECK(mirror.at("rows").size() == 3);
  CHECK(mirror.at("config").at("seed") == 5);

  run_sweep_files(config, base);
  CHECK(read_text_file(base + ".csv") == csv1);

  std::remove((base + ".csv").c_str());
  std::remove((base + ".json").c_str());
}
