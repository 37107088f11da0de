#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "qmkl/error.hpp"
#include "qmkl/experiment.hpp"

using namespace qmkl;
using Catch::Matchers::WithinAbs;

namespace {

const KernelChoice kLinear{KernelKind::Linear, QaoaTopology::AllPairs};
const KernelChoice kRX{KernelKind::RX, QaoaTopology::AllPairs};
const KernelChoice kRBF{KernelKind::RBF, QaoaTopology::AllPairs};
const KernelChoice kIQP{KernelKind::IQP, QaoaTopology::AllPairs};

ExperimentConfig tiny(std::vector<std::pair<KernelChoice, KernelChoice>> pairs, std::vector<ResultType> types) {
    auto c = default_experiment_config();
    c.kernel_pairs = std::move(pairs);
    c.result_types = std::move(types);
    c.d_range = {2};
    c.repetitions = 1;
    c.qccnet.max_outer_iters = 10;
    c.threads = 1;
    return c;
}

ResultRow row_with(double gamma_a, double accuracy, ResultType t) {
    ResultRow r;
    r.kernel_a = "rx";
    r.kernel_b = "linear";
    r.d = 2;
    r.result_type = t;
    r.gamma_l1 = {gamma_a, 1 - gamma_a};
    r.theta = {{}, {}};
    r.metrics = {accuracy, 0.5, 0.1, 0.2, 1.0};
    return r;
}

} // namespace

TEST_CASE("pair list and default grid sizes") {
    const auto pairs = all_kernel_pairs();
    CHECK(pairs.size() == 21);
    int self = 0;
    for (const auto &[a, b] : pairs) self += a == b ? 1 : 0;
    CHECK(self == 6);
    CHECK(expected_row_count(default_experiment_config(true)) == 7560);
    CHECK(expected_row_count(default_experiment_config(false)) == 21 * 5 * 10 * 3);
}

TEST_CASE("one pair, one d, one repetition, one type gives one row") {
    const auto rows = run_experiment(tiny({{kLinear, kRX}}, {ResultType::I}));
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].error.empty());
    CHECK(rows[0].gamma_l1 == std::vector{0.5, 0.5});
    CHECK(std::isnan(rows[0].loss));
}

TEST_CASE("rows are ordered and weights sum to one") {
    auto c = tiny({{kLinear, kRX}, {kRBF, kIQP}}, {ResultType::I, ResultType::II, ResultType::III});
    c.d_range = {2, 3};
    c.repetitions = 2;
    const auto rows = run_experiment(c);
    REQUIRE(rows.size() == expected_row_count(c));
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto &a = rows[i - 1], &b = rows[i];
        const auto ka = std::make_tuple(a.pair_index, a.d, a.repetition, static_cast<int>(a.result_type));
        const auto kb = std::make_tuple(b.pair_index, b.d, b.repetition, static_cast<int>(b.result_type));
        CHECK(ka < kb);
    }
    for (const auto &r : rows) {
        CHECK(r.error.empty());
        CHECK_THAT(r.gamma_l1[0] + r.gamma_l1[1], WithinAbs(1.0, 1e-6));
    }
}

TEST_CASE("non-parametric pairs give identical type II and III rows") {
    const auto rows = run_experiment(tiny({{kLinear, kRX}, {kRX, kIQP}}, {ResultType::II, ResultType::III}));
    REQUIRE(rows.size() == 4);
    for (std::size_t i = 0; i < 4; i += 2) {
        CHECK(std::abs(rows[i].gamma_l1[0] - rows[i + 1].gamma_l1[0]) <= 1e-9);
        CHECK(std::abs(rows[i].metrics.accuracy - rows[i + 1].metrics.accuracy) <= 1e-9);
        CHECK(std::abs(rows[i].metrics.aucroc - rows[i + 1].metrics.aucroc) <= 1e-9);
        CHECK(std::abs(rows[i].loss - rows[i + 1].loss) <= 1e-9);
    }
}

TEST_CASE("worker count does not change the output") {
    auto c = tiny({{kLinear, kRBF}, {kIQP, kIQP}}, {ResultType::I, ResultType::III});
    c.repetitions = 2;
    std::ostringstream one, three;
    write_rows_jsonl(one, run_experiment(c));
    c.threads = 3;
    write_rows_jsonl(three, run_experiment(c));
    CHECK(one.str() == three.str());
}

TEST_CASE("identical-kernel pair reproduces the lone kernel") {
    InstanceConfig ic;
    ic.generator.seed = 14;
    const auto data = make_instance(ic);
    const auto pair = initial_specs({kRBF, kRBF}, 2, 3);
    const auto both = evaluate_instance(pair, data, ResultType::II, {});
    const auto lone = evaluate_instance({pair[0]}, data, ResultType::II, {});
    CHECK(both.combination.gamma == std::vector{0.5, 0.5});
    CHECK(both.metrics.accuracy == lone.metrics.accuracy);
    CHECK(both.metrics.aucroc == lone.metrics.aucroc);
    CHECK(both.metrics.margin == lone.metrics.margin);
}

TEST_CASE("row JSON round trip") {
    const auto rows = run_experiment(tiny({{kLinear, kRBF}}, {ResultType::I, ResultType::III}));
    std::stringstream ss;
    write_rows_jsonl(ss, rows);
    const auto back = read_rows_jsonl(ss);
    REQUIRE(back.size() == rows.size());
    std::stringstream again;
    write_rows_jsonl(again, back);
    CHECK(again.str() == ss.str());
    CHECK(ss.str().find("wall_time") == std::string::npos);
    std::stringstream bad("{\"d\":\n");
    CHECK_THROWS(read_rows_jsonl(bad));
}

TEST_CASE("config parsing keeps defaults for missing keys") {
    const auto base = default_experiment_config();
    const auto c = parse_experiment_config(nlohmann::json::parse(R"({"repetitions":3,"d_range":[2,4],
        "kernel_pairs":[["rx","linear"],["qaoa","qaoa"]],"qaoa_topology":"ring","result_types":["II"],
        "qccnet":{"learning_rate":0.01}})"),
                                           base);
    CHECK(c.repetitions == 3);
    CHECK(c.d_range == std::vector<std::size_t>{2, 4});
    REQUIRE(c.kernel_pairs.size() == 2);
    CHECK(c.kernel_pairs[1].first.topology == QaoaTopology::Ring);
    CHECK(c.result_types == std::vector{ResultType::II});
    CHECK(c.qccnet.learning_rate == 0.01);
    CHECK(c.lambda == base.lambda);
    const auto round = parse_experiment_config(to_json(c), default_experiment_config(true));
    CHECK(to_json(round) == to_json(c));
    CHECK_THROWS_AS(parse_experiment_config(nlohmann::json::parse(R"({"repetitions":0})"), base), Error);
}

TEST_CASE("aggregation medians and differences") {
    std::vector<ResultRow> rows{row_with(0.2, 0.6, ResultType::II), row_with(0.5, 0.7, ResultType::II),
                                row_with(0.8, 0.9, ResultType::II)};
    const auto rep = aggregate_report(rows);
    REQUIRE(rep.medians.size() == 1);
    CHECK(rep.medians[0].gamma_a == 0.5);
    CHECK(rep.medians[0].metrics.accuracy == 0.7);
    CHECK(rep.medians[0].count == 3);
    std::size_t total = 0;
    for (const auto &d : rep.densities) total += d.count;
    CHECK(total == 3);
    CHECK(rep.densities.size() == kDensityBins);

    const auto single = aggregate_report({row_with(0.3, 0.55, ResultType::I)});
    CHECK(single.medians[0].metrics.accuracy == 0.55);

    const auto same = aggregate_report({row_with(0.3, 0.8, ResultType::I), row_with(0.3, 0.8, ResultType::III)});
    REQUIRE(same.differences.size() == 1);
    CHECK(same.differences[0].delta.accuracy == 0.0);
    CHECK(same.differences[0].delta.aucroc == 0.0);

    try {
        aggregate_report({});
        FAIL("expected an error");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::Aggregation);
    }
    auto broken = row_with(0.3, 0.8, ResultType::I);
    broken.error = "boom";
    CHECK_THROWS_AS(aggregate_report({broken}), Error);
}

TEST_CASE("decision grid") {
    InstanceConfig ic;
    ic.generator.seed = 2;
    const auto data = make_instance(ic);
    const auto res = evaluate_instance({KernelSpec(KernelKind::Linear, 2)}, data, ResultType::I, {});
    const auto grid = decision_grid(res.model, res.combination, data.train_features(), 100);
    CHECK(grid.size() == 10000);
    CHECK(grid.front().x == 0.0);
    CHECK_THAT(grid.back().x, WithinAbs(2 * std::numbers::pi, 1e-12));

    InstanceConfig ic3;
    ic3.generator.n_features = 3;
    const auto d3 = make_instance(ic3);
    const auto r3 = evaluate_instance({KernelSpec(KernelKind::RX, 3)}, d3, ResultType::I, {});
    try {
        decision_grid(r3.model, r3.combination, d3.train_features(), 10);
        FAIL("expected an error");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::Dimension);
    }
}
