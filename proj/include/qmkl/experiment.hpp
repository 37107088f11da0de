#pragma once

/**
 * @file
 * Experiment grid over kernel pairs, feature counts and repetitions, plus
 * the report aggregation and decision-surface sampling built on top of it.
 *
 * Result types:
 *   I    untrained parameters, uniform weights
 *   II   untrained parameters, EasyMKL weights
 *   III  QCC-net trained parameters, EasyMKL weights
 */

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qmkl/data.hpp"
#include "qmkl/kernels.hpp"
#include "qmkl/metrics.hpp"
#include "qmkl/qccnet.hpp"
#include "qmkl/svm.hpp"

namespace qmkl {

enum class ResultType { I = 1, II = 2, III = 3 };

std::string_view result_type_name(ResultType type) noexcept;
ResultType parse_result_type(std::string_view name);

struct KernelChoice {
    KernelKind kind = KernelKind::Linear;
    QaoaTopology topology = QaoaTopology::AllPairs;

    friend bool operator==(const KernelChoice &, const KernelChoice &) = default;
};

struct ExperimentConfig {
    std::vector<std::pair<KernelChoice, KernelChoice>> kernel_pairs;
    std::vector<std::size_t> d_range;
    int repetitions = 10;
    std::vector<ResultType> result_types{ResultType::I, ResultType::II, ResultType::III};
    double lambda = 0.2;
    double svm_C = 1.0;
    QCCNetConfig qccnet;
    std::uint64_t base_seed = 0;
    std::size_t n_samples = 100;
    double class_sep = 1.0;
    std::size_t clusters_per_class = 2;
    double train_ratio = 0.5;
    bool scale_on_train_only = false;
    /// Worker threads; 0 picks the hardware concurrency.
    unsigned threads = 0;
};

/// All 21 unordered pairs (including self-pairs) of the six base kernels.
std::vector<std::pair<KernelChoice, KernelChoice>> all_kernel_pairs();

/// Desk-scale grid (d = 2..6) or, with `full`, d = 2..13.
ExperimentConfig default_experiment_config(bool full = false);

/// Missing keys keep the defaults of `base`.
ExperimentConfig parse_experiment_config(const nlohmann::json &j, ExperimentConfig base);
nlohmann::json to_json(const ExperimentConfig &config);

/// Kernel specs together with the weights that combine them.
struct KernelCombination {
    std::vector<KernelSpec> specs;
    std::vector<double> gamma; ///< L1-normalized

    [[nodiscard]] GramMatrix train_gram(const Matrix &X) const;
    /// Combined k(A_t, B_m), unbounded kernels normalized per entry.
    [[nodiscard]] Matrix cross_gram(const Matrix &A, const Matrix &B) const;
};

struct InstanceResult {
    KernelCombination combination;
    SVMModel model;
    MetricsRecord metrics;
    double loss = 0.0; ///< EasyMKL objective (NaN for type I)
    std::optional<TrainingTrace> trace;
};

struct InstanceSettings {
    double lambda = 0.2;
    double svm_C = 1.0;
    QCCNetConfig qccnet;
};

/// Builds the combination for one result type, fits the SVM on the training
/// partition, and scores it on the testing partition.
InstanceResult evaluate_instance(const std::vector<KernelSpec> &initial_specs, const Dataset &data,
                                 ResultType type, const InstanceSettings &settings);

struct ResultRow {
    std::size_t pair_index = 0;
    std::string kernel_a;
    std::string kernel_b;
    std::size_t d = 0;
    int repetition = 0;
    std::uint64_t seed = 0;
    ResultType result_type = ResultType::I;
    std::vector<double> gamma_l1;
    std::vector<std::vector<double>> theta;
    MetricsRecord metrics;
    double loss = 0.0;
    std::string error;
    double wall_time = 0.0;
};

nlohmann::json to_json(const ResultRow &row);
ResultRow row_from_json(const nlohmann::json &j);

/// Seeds for one grid cell. Data depends on (base, d, repetition) only, so
/// every pair sees the same instances; kernel initialization also depends on
/// the pair.
std::uint64_t instance_seed(std::uint64_t base, std::size_t pair_index, std::size_t d, int repetition);
std::uint64_t data_seed(std::uint64_t base, std::size_t d, int repetition);

/// Initial specs for a pair: Table defaults for classical kernels, seeded
/// random angles for QAOA (identical kinds share their draw).
std::vector<KernelSpec> initial_specs(const std::pair<KernelChoice, KernelChoice> &pair,
                                      std::size_t d, std::uint64_t seed);

using ProgressCallback = std::function<void(std::size_t done, std::size_t total)>;

/// Rows in canonical (pair, d, repetition, type) order regardless of threading.
std::vector<ResultRow> run_experiment(const ExperimentConfig &config,
                                      const ProgressCallback &progress = {});

std::size_t expected_row_count(const ExperimentConfig &config);

void write_rows_jsonl(std::ostream &out, const std::vector<ResultRow> &rows);
void write_rows_csv(std::ostream &out, const std::vector<ResultRow> &rows);
void write_timings_csv(std::ostream &out, const std::vector<ResultRow> &rows);
std::vector<ResultRow> read_rows_jsonl(std::istream &in);

struct MedianRow {
    std::string kernel_a;
    std::string kernel_b;
    ResultType result_type = ResultType::I;
    std::size_t count = 0;
    MetricsRecord metrics;
    double gamma_a = 0.0;
};

struct DensityRow {
    std::string kernel_a;
    std::string kernel_b;
    ResultType result_type = ResultType::I;
    std::size_t d = 0;
    std::size_t bin = 0;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
    double density = 0.0;
};

struct DifferenceRow {
    std::string kernel_a;
    std::string kernel_b;
    MetricsRecord delta; ///< type III minus type I, rounded to 2 decimals
};

struct AggregateReport {
    std::vector<MedianRow> medians;
    std::vector<DensityRow> densities;
    std::vector<DifferenceRow> differences;
};

inline constexpr std::size_t kDensityBins = 50;

double median(std::vector<double> values);

/// Rows carrying an error are skipped. Throws ErrorCode::Aggregation when
/// nothing is left.
AggregateReport aggregate_report(const std::vector<ResultRow> &rows);

void write_medians_csv(std::ostream &out, const AggregateReport &report);
void write_densities_csv(std::ostream &out, const AggregateReport &report);
void write_differences_csv(std::ostream &out, const AggregateReport &report);

struct GridPoint {
    double x;
    double y;
    double score;
};

/// SVM decision values on a resolution x resolution lattice over [0, 2pi]^2.
std::vector<GridPoint> decision_grid(const SVMModel &model, const KernelCombination &combination,
                                     const Matrix &train_X, std::size_t resolution);

void write_grid_csv(std::ostream &out, const std::vector<GridPoint> &grid);

} // namespace qmkl
