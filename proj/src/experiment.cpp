#include "qmkl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <thread>
#include <tuple>

#include "qmkl/error.hpp"
#include "qmkl/random.hpp"

namespace qmkl {

using nlohmann::json;

namespace {

std::string choice_name(const KernelChoice &c) {
    std::string name(kind_name(c.kind));
    if (c.kind == KernelKind::QAOA && c.topology == QaoaTopology::Ring) {
        name += ":ring";
    }
    return name;
}

KernelChoice parse_choice(const std::string &text) {
    KernelChoice c;
    const auto colon = text.find(':');
    c.kind = parse_kind(text.substr(0, colon));
    if (colon != std::string::npos) {
        c.topology = parse_topology(text.substr(colon + 1));
    }
    return c;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json nan_as_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double null_as_nan(const json &j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

} // namespace

std::string_view result_type_name(ResultType type) noexcept {
    switch (type) {
    case ResultType::I: return "I";
    case ResultType::II: return "II";
    case ResultType::III: return "III";
    }
    return "?";
}

ResultType parse_result_type(std::string_view name) {
    if (name == "I" || name == "i" || name == "1") {
        return ResultType::I;
    }
    if (name == "II" || name == "ii" || name == "2") {
        return ResultType::II;
    }
    if (name == "III" || name == "iii" || name == "3") {
        return ResultType::III;
    }
    fail(ErrorCode::Argument, "unknown result type '" + std::string(name) + "'");
}

std::vector<std::pair<KernelChoice, KernelChoice>> all_kernel_pairs() {
    std::vector<std::pair<KernelChoice, KernelChoice>> pairs;
    constexpr std::size_t n = std::size(kAllKernelKinds);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a; b < n; ++b) {
            pairs.push_back({KernelChoice{kAllKernelKinds[a]}, KernelChoice{kAllKernelKinds[b]}});
        }
    }
    return pairs;
}

ExperimentConfig default_experiment_config(bool full) {
    ExperimentConfig c;
    c.kernel_pairs = all_kernel_pairs();
    const std::size_t d_max = full ? 13 : 6;
    for (std::size_t d = 2; d <= d_max; ++d) {
        c.d_range.push_back(d);
    }
    return c;
}

ExperimentConfig parse_experiment_config(const json &j, ExperimentConfig c) {
    if (!j.is_object()) {
        fail(ErrorCode::Parse, "experiment config must be a JSON object");
    }
    try {
        if (j.contains("kernel_pairs")) {
            const auto &kp = j.at("kernel_pairs");
            if (kp.is_string() && kp.get<std::string>() == "all") {
                c.kernel_pairs = all_kernel_pairs();
            } else {
                c.kernel_pairs.clear();
                for (const auto &p : kp) {
                    if (!p.is_array() || p.size() != 2) {
                        fail(ErrorCode::Parse, "kernel_pairs entries must be two-element arrays");
                    }
                    c.kernel_pairs.emplace_back(parse_choice(p[0].get<std::string>()),
                                                parse_choice(p[1].get<std::string>()));
                }
            }
        }
        if (j.contains("qaoa_topology")) {
            const auto topo = parse_topology(j.at("qaoa_topology").get<std::string>());
            for (auto &[a, b] : c.kernel_pairs) {
                a.topology = a.kind == KernelKind::QAOA ? topo : a.topology;
                b.topology = b.kind == KernelKind::QAOA ? topo : b.topology;
            }
        }
        if (j.contains("d_range")) {
            c.d_range = j.at("d_range").get<std::vector<std::size_t>>();
        }
        if (j.contains("result_types")) {
            c.result_types.clear();
            for (const auto &t : j.at("result_types")) {
                c.result_types.push_back(parse_result_type(t.get<std::string>()));
            }
        }
        c.repetitions = j.value("repetitions", c.repetitions);
        c.lambda = j.value("lambda", c.lambda);
        c.svm_C = j.value("svm_C", c.svm_C);
        c.base_seed = j.value("base_seed", c.base_seed);
        c.n_samples = j.value("n_samples", c.n_samples);
        c.class_sep = j.value("class_sep", c.class_sep);
        c.clusters_per_class = j.value("clusters_per_class", c.clusters_per_class);
        c.train_ratio = j.value("train_ratio", c.train_ratio);
        c.scale_on_train_only = j.value("scale_on_train_only", c.scale_on_train_only);
        c.threads = j.value("threads", c.threads);
        if (j.contains("qccnet")) {
            const auto &q = j.at("qccnet");
            c.qccnet.learning_rate = q.value("learning_rate", c.qccnet.learning_rate);
            c.qccnet.adam_beta1 = q.value("adam_beta1", c.qccnet.adam_beta1);
            c.qccnet.adam_beta2 = q.value("adam_beta2", c.qccnet.adam_beta2);
            c.qccnet.adam_epsilon = q.value("adam_epsilon", c.qccnet.adam_epsilon);
            c.qccnet.max_outer_iters = q.value("max_outer_iters", c.qccnet.max_outer_iters);
            c.qccnet.loss_tolerance = q.value("loss_tolerance", c.qccnet.loss_tolerance);
            c.qccnet.patience = q.value("patience", c.qccnet.patience);
            c.qccnet.seed = q.value("seed", c.qccnet.seed);
        }
    } catch (const json::exception &e) {
        fail(ErrorCode::Parse, std::string("experiment config: ") + e.what());
    }
    if (c.repetitions < 1) {
        fail(ErrorCode::Argument, "experiment config: repetitions must be >= 1");
    }
    if (c.kernel_pairs.empty() || c.d_range.empty() || c.result_types.empty()) {
        fail(ErrorCode::Argument, "experiment config: empty grid");
    }
    if (!(c.lambda >= 0.0 && c.lambda < 1.0)) {
        fail(ErrorCode::Argument, "experiment config: lambda must lie in [0, 1)");
    }
    if (!(c.qccnet.learning_rate > 0.0)) {
        fail(ErrorCode::Argument, "experiment config: learning_rate must be positive");
    }
    c.qccnet.lambda = c.lambda;
    return c;
}

json to_json(const ExperimentConfig &c) {
    json pairs = json::array();
    for (const auto &[a, b] : c.kernel_pairs) {
        pairs.push_back({choice_name(a), choice_name(b)});
    }
    json types = json::array();
    for (auto t : c.result_types) {
        types.push_back(result_type_name(t));
    }
    return {
        {"kernel_pairs", pairs},
        {"d_range", c.d_range},
        {"repetitions", c.repetitions},
        {"result_types", types},
        {"lambda", c.lambda},
        {"svm_C", c.svm_C},
        {"base_seed", c.base_seed},
        {"n_samples", c.n_samples},
        {"class_sep", c.class_sep},
        {"clusters_per_class", c.clusters_per_class},
        {"train_ratio", c.train_ratio},
        {"scale_on_train_only", c.scale_on_train_only},
        {"qccnet",
         {{"learning_rate", c.qccnet.learning_rate},
          {"adam_beta1", c.qccnet.adam_beta1},
          {"adam_beta2", c.qccnet.adam_beta2},
          {"adam_epsilon", c.qccnet.adam_epsilon},
          {"max_outer_iters", c.qccnet.max_outer_iters},
          {"loss_tolerance", c.qccnet.loss_tolerance},
          {"patience", c.qccnet.patience},
          {"seed", c.qccnet.seed}}},
    };
}

GramMatrix KernelCombination::train_gram(const Matrix &X) const {
    std::vector<GramMatrix> grams;
    grams.reserve(specs.size());
    for (const auto &s : specs) {
        grams.push_back(prepared_gram(s, X));
    }
    return combine_grams(grams, gamma);
}

Matrix KernelCombination::cross_gram(const Matrix &A, const Matrix &B) const {
    if (specs.size() != gamma.size()) {
        fail(ErrorCode::Dimension, "KernelCombination: one weight per kernel required");
    }
    Matrix out = Matrix::Zero(A.rows(), B.rows());
    std::vector<Matrix> parts;
    for (const auto &s : specs) {
        parts.push_back(qmkl::cross_gram(s, A, B, true));
    }
    bool identical = true;
    for (std::size_t r = 1; r < parts.size() && identical; ++r) {
        identical = parts[r] == parts[0];
    }
    if (identical) {
        return parts[0];
    }
    for (std::size_t r = 0; r < parts.size(); ++r) {
        out += gamma[r] * parts[r];
    }
    return out;
}

InstanceResult evaluate_instance(const std::vector<KernelSpec> &initial, const Dataset &data,
                                 ResultType type, const InstanceSettings &settings) {
    const Matrix Xtr = data.train_features();
    const Matrix Xte = data.test_features();
    const auto ytr = data.train_labels();
    const auto yte = data.test_labels();

    InstanceResult out;
    GramMatrix K;
    if (type == ResultType::III) {
        QCCNetConfig qc = settings.qccnet;
        qc.lambda = settings.lambda;
        auto tr = train(initial, Xtr, ytr, qc);
        out.combination.specs = tr.specs;
        out.combination.gamma.assign(tr.gamma_l1.data(), tr.gamma_l1.data() + tr.gamma_l1.size());
        out.loss = tr.solution.loss;
        K = std::move(tr.final_gram);
        out.trace = std::move(tr.trace);
    } else {
        out.combination.specs = initial;
        std::vector<GramMatrix> grams;
        for (const auto &s : initial) {
            grams.push_back(prepared_gram(s, Xtr));
        }
        if (type == ResultType::I) {
            out.combination.gamma.assign(initial.size(), 1.0 / static_cast<double>(initial.size()));
            out.loss = std::numeric_limits<double>::quiet_NaN();
        } else {
            const auto sol = solve_easymkl({grams, ytr, settings.lambda}, settings.qccnet.solver);
            out.combination.gamma.assign(sol.gamma_l1.data(), sol.gamma_l1.data() + sol.gamma_l1.size());
            out.loss = sol.loss;
        }
        K = combine_grams(grams, out.combination.gamma);
    }

    SVMOptions svm;
    svm.C = settings.svm_C;
    out.model = train_svm(K.entries, ytr, svm);
    const Matrix Kte = out.combination.cross_gram(Xte, Xtr);
    const Vector scores = decision_values(out.model, Kte);
    const auto pred = predict(out.model, Kte);
    std::vector<double> sc(scores.data(), scores.data() + scores.size());
    out.metrics.accuracy = accuracy(pred, yte);
    out.metrics.aucroc = aucroc(sc, yte);
    out.metrics.margin = margin(K.entries, ytr);
    const auto sr = spectral_ratio(K.entries);
    out.metrics.spectral_ratio = sr.normalized;
    out.metrics.spectral_ratio_raw = sr.raw;
    return out;
}

std::uint64_t instance_seed(std::uint64_t base, std::size_t pair_index, std::size_t d, int repetition) {
    return derive_seed({base, 0x1a57ULL, pair_index, d, static_cast<std::uint64_t>(repetition)});
}

std::uint64_t data_seed(std::uint64_t base, std::size_t d, int repetition) {
    return derive_seed({base, 0xda7aULL, d, static_cast<std::uint64_t>(repetition)});
}

std::vector<KernelSpec> initial_specs(const std::pair<KernelChoice, KernelChoice> &pair,
                                      std::size_t d, std::uint64_t seed) {
    std::vector<KernelSpec> specs;
    for (const auto &c : {pair.first, pair.second}) {
        const auto kind_seed = derive_seed({seed, static_cast<std::uint64_t>(c.kind)});
        specs.push_back(KernelSpec::with_defaults(c.kind, d, kind_seed, c.topology));
    }
    return specs;
}

std::size_t expected_row_count(const ExperimentConfig &c) {
    return c.kernel_pairs.size() * c.d_range.size() * static_cast<std::size_t>(c.repetitions) *
           c.result_types.size();
}

std::vector<ResultRow> run_experiment(const ExperimentConfig &config, const ProgressCallback &progress) {
    struct Job {
        std::size_t pair;
        std::size_t d;
        int rep;
    };
    std::vector<Job> jobs;
    for (std::size_t p = 0; p < config.kernel_pairs.size(); ++p) {
        for (auto d : config.d_range) {
            for (int r = 0; r < config.repetitions; ++r) {
                jobs.push_back({p, d, r});
            }
        }
    }

    InstanceSettings settings;
    settings.lambda = config.lambda;
    settings.svm_C = config.svm_C;
    settings.qccnet = config.qccnet;
    settings.qccnet.lambda = config.lambda;

    std::vector<std::vector<ResultRow>> results(jobs.size());
    auto run_job = [&](const Job &job) {
        const auto &pair = config.kernel_pairs[job.pair];
        std::vector<ResultRow> rows;
        const auto seed = instance_seed(config.base_seed, job.pair, job.d, job.rep);

        ResultRow proto;
        proto.pair_index = job.pair;
        proto.kernel_a = choice_name(pair.first);
        proto.kernel_b = choice_name(pair.second);
        proto.d = job.d;
        proto.repetition = job.rep;
        proto.seed = seed;

        std::optional<Dataset> data;
        std::vector<KernelSpec> specs;
        std::string setup_error;
        try {
            InstanceConfig ic;
            ic.generator.n_features = job.d;
            ic.generator.n_samples = config.n_samples;
            ic.generator.class_sep = config.class_sep;
            ic.generator.clusters_per_class = config.clusters_per_class;
            ic.generator.seed = data_seed(config.base_seed, job.d, job.rep);
            ic.train_ratio = config.train_ratio;
            ic.scale_on_train_only = config.scale_on_train_only;
            data = make_instance(ic);
            specs = initial_specs(pair, job.d, seed);
        } catch (const std::exception &e) {
            setup_error = e.what();
        }

        for (auto type : config.result_types) {
            ResultRow row = proto;
            row.result_type = type;
            const auto t0 = std::chrono::steady_clock::now();
            if (!setup_error.empty()) {
                row.error = setup_error;
            } else {
                try {
                    auto res = evaluate_instance(specs, *data, type, settings);
                    row.gamma_l1 = res.combination.gamma;
                    for (const auto &s : res.combination.specs) {
                        row.theta.emplace_back(s.theta().begin(), s.theta().end());
                    }
                    row.metrics = res.metrics;
                    row.loss = res.loss;
                } catch (const std::exception &e) {
                    row.error = e.what();
                }
            }
            row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            rows.push_back(std::move(row));
        }
        return rows;
    };

    unsigned n_threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, std::max<std::size_t>(jobs.size(), 1)));
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex progress_mutex;
    auto worker = [&] {
        for (;;) {
            const auto k = next.fetch_add(1);
            if (k >= jobs.size()) {
                return;
            }
            results[k] = run_job(jobs[k]);
            const auto finished = done.fetch_add(1) + 1;
            if (progress) {
                std::lock_guard lock(progress_mutex);
                progress(finished, jobs.size());
            }
        }
    };
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n_threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto &t : pool) {
            t.join();
        }
    }

    std::vector<ResultRow> rows;
    rows.reserve(expected_row_count(config));
    for (auto &r : results) {
        for (auto &row : r) {
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

json to_json(const ResultRow &row) {
    json j = {
        {"pair_index", row.pair_index},
        {"kernel_a", row.kernel_a},
        {"kernel_b", row.kernel_b},
        {"d", row.d},
        {"repetition", row.repetition},
        {"seed", row.seed},
        {"result_type", result_type_name(row.result_type)},
        {"gamma_l1", row.gamma_l1},
        {"theta", row.theta},
        {"accuracy", row.metrics.accuracy},
        {"aucroc", row.metrics.aucroc},
        {"margin", row.metrics.margin},
        {"spectral_ratio", row.metrics.spectral_ratio},
        {"spectral_ratio_raw", row.metrics.spectral_ratio_raw},
        {"loss", nan_as_null(row.loss)},
        {"error", row.error.empty() ? json(nullptr) : json(row.error)},
    };
    return j;
}

ResultRow row_from_json(const json &j) {
    ResultRow row;
    try {
        row.pair_index = j.value("pair_index", std::size_t{0});
        row.kernel_a = j.at("kernel_a").get<std::string>();
        row.kernel_b = j.at("kernel_b").get<std::string>();
        row.d = j.at("d").get<std::size_t>();
        row.repetition = j.value("repetition", 0);
        row.seed = j.value("seed", std::uint64_t{0});
        row.result_type = parse_result_type(j.at("result_type").get<std::string>());
        row.gamma_l1 = j.value("gamma_l1", std::vector<double>{});
        row.theta = j.value("theta", std::vector<std::vector<double>>{});
        row.metrics.accuracy = null_as_nan(j.at("accuracy"));
        row.metrics.aucroc = null_as_nan(j.at("aucroc"));
        row.metrics.margin = null_as_nan(j.at("margin"));
        row.metrics.spectral_ratio = null_as_nan(j.at("spectral_ratio"));
        row.metrics.spectral_ratio_raw = null_as_nan(j.at("spectral_ratio_raw"));
        row.loss = j.contains("loss") ? null_as_nan(j.at("loss")) : std::numeric_limits<double>::quiet_NaN();
        if (j.contains("error") && !j.at("error").is_null()) {
            row.error = j.at("error").get<std::string>();
        }
    } catch (const json::exception &e) {
        fail(ErrorCode::Parse, std::string("result row: ") + e.what());
    }
    return row;
}

void write_rows_jsonl(std::ostream &out, const std::vector<ResultRow> &rows) {
    for (const auto &r : rows) {
        out << to_json(r).dump() << '\n';
    }
}

void write_rows_csv(std::ostream &out, const std::vector<ResultRow> &rows) {
    out << "kernel_a,kernel_b,d,repetition,seed,result_type,gamma_a,gamma_b,accuracy,aucroc,margin,"
           "spectral_ratio,spectral_ratio_raw,loss,error\n";
    for (const auto &r : rows) {
        const double ga = r.gamma_l1.size() > 0 ? r.gamma_l1[0] : std::nan("");
        const double gb = r.gamma_l1.size() > 1 ? r.gamma_l1[1] : std::nan("");
        std::string err = r.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        out << r.kernel_a << ',' << r.kernel_b << ',' << r.d << ',' << r.repetition << ',' << r.seed
            << ',' << result_type_name(r.result_type) << ',' << fmt17(ga) << ',' << fmt17(gb) << ','
            << fmt17(r.metrics.accuracy) << ',' << fmt17(r.metrics.aucroc) << ','
            << fmt17(r.metrics.margin) << ',' << fmt17(r.metrics.spectral_ratio) << ','
            << fmt17(r.metrics.spectral_ratio_raw) << ',' << fmt17(r.loss) << ',' << err << '\n';
    }
}

void write_timings_csv(std::ostream &out, const std::vector<ResultRow> &rows) {
    out << "kernel_a,kernel_b,d,repetition,result_type,wall_time\n";
    for (const auto &r : rows) {
        out << r.kernel_a << ',' << r.kernel_b << ',' << r.d << ',' << r.repetition << ','
            << result_type_name(r.result_type) << ',' << fmt17(r.wall_time) << '\n';
    }
}

std::vector<ResultRow> read_rows_jsonl(std::istream &in) {
    std::vector<ResultRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception &e) {
            fail(ErrorCode::Parse, "rows line " + std::to_string(line_no) + ": " + e.what());
        }
        rows.push_back(row_from_json(j));
    }
    return rows;
}

double median(std::vector<double> values) {
    if (values.empty()) {
        fail(ErrorCode::Aggregation, "median of an empty selection");
    }
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

AggregateReport aggregate_report(const std::vector<ResultRow> &rows) {
    using PairKey = std::tuple<std::size_t, std::string, std::string>;
    using GroupKey = std::tuple<std::size_t, std::string, std::string, int>;
    std::map<GroupKey, std::vector<const ResultRow *>> groups;
    std::map<std::tuple<std::size_t, std::string, std::string, int, std::size_t>,
             std::vector<const ResultRow *>>
        by_d;
    for (const auto &r : rows) {
        if (!r.error.empty()) {
            continue;
        }
        const int t = static_cast<int>(r.result_type);
        groups[{r.pair_index, r.kernel_a, r.kernel_b, t}].push_back(&r);
        by_d[{r.pair_index, r.kernel_a, r.kernel_b, t, r.d}].push_back(&r);
    }
    if (groups.empty()) {
        fail(ErrorCode::Aggregation, "aggregate_report: no successful rows");
    }

    AggregateReport report;
    std::map<PairKey, std::map<int, MetricsRecord>> per_pair;
    for (const auto &[key, members] : groups) {
        const auto &[pi, a, b, t] = key;
        auto collect = [&](auto field) {
            std::vector<double> v;
            for (const auto *r : members) {
                v.push_back(field(*r));
            }
            return median(std::move(v));
        };
        MedianRow m;
        m.kernel_a = a;
        m.kernel_b = b;
        m.result_type = static_cast<ResultType>(t);
        m.count = members.size();
        m.metrics.accuracy = collect([](const ResultRow &r) { return r.metrics.accuracy; });
        m.metrics.aucroc = collect([](const ResultRow &r) { return r.metrics.aucroc; });
        m.metrics.margin = collect([](const ResultRow &r) { return r.metrics.margin; });
        m.metrics.spectral_ratio = collect([](const ResultRow &r) { return r.metrics.spectral_ratio; });
        m.metrics.spectral_ratio_raw =
            collect([](const ResultRow &r) { return r.metrics.spectral_ratio_raw; });
        m.gamma_a = collect([](const ResultRow &r) {
            return r.gamma_l1.empty() ? std::nan("") : r.gamma_l1[0];
        });
        per_pair[{pi, a, b}][t] = m.metrics;
        report.medians.push_back(std::move(m));
    }

    const double width = 1.0 / static_cast<double>(kDensityBins);
    for (const auto &[key, members] : by_d) {
        const auto &[pi, a, b, t, d] = key;
        std::vector<std::size_t> counts(kDensityBins, 0);
        for (const auto *r : members) {
            if (r->gamma_l1.empty()) {
                continue;
            }
            const double g = std::clamp(r->gamma_l1[0], 0.0, 1.0);
            const auto bin = std::min(static_cast<std::size_t>(g / width), kDensityBins - 1);
            ++counts[bin];
        }
        for (std::size_t k = 0; k < kDensityBins; ++k) {
            DensityRow dr;
            dr.kernel_a = a;
            dr.kernel_b = b;
            dr.result_type = static_cast<ResultType>(t);
            dr.d = d;
            dr.bin = k;
            dr.lo = static_cast<double>(k) * width;
            dr.hi = static_cast<double>(k + 1) * width;
            dr.count = counts[k];
            dr.density = static_cast<double>(counts[k]) / (static_cast<double>(members.size()) * width);
            report.densities.push_back(dr);
        }
    }

    auto round2 = [](double v) { return std::round(v * 100.0) / 100.0 + 0.0; };
    for (const auto &[key, types] : per_pair) {
        const auto i = types.find(static_cast<int>(ResultType::I));
        const auto iii = types.find(static_cast<int>(ResultType::III));
        if (i == types.end() || iii == types.end()) {
            continue;
        }
        DifferenceRow dr;
        dr.kernel_a = std::get<1>(key);
        dr.kernel_b = std::get<2>(key);
        dr.delta.accuracy = round2(iii->second.accuracy - i->second.accuracy);
        dr.delta.aucroc = round2(iii->second.aucroc - i->second.aucroc);
        dr.delta.margin = round2(iii->second.margin - i->second.margin);
        dr.delta.spectral_ratio = round2(iii->second.spectral_ratio - i->second.spectral_ratio);
        dr.delta.spectral_ratio_raw =
            round2(iii->second.spectral_ratio_raw - i->second.spectral_ratio_raw);
        report.differences.push_back(dr);
    }
    return report;
}

void write_medians_csv(std::ostream &out, const AggregateReport &report) {
    out << "kernel_a,kernel_b,result_type,count,accuracy,aucroc,margin,spectral_ratio,"
           "spectral_ratio_raw,gamma_a\n";
    for (const auto &m : report.medians) {
        out << m.kernel_a << ',' << m.kernel_b << ',' << result_type_name(m.result_type) << ','
            << m.count << ',' << fmt17(m.metrics.accuracy) << ',' << fmt17(m.metrics.aucroc) << ','
            << fmt17(m.metrics.margin) << ',' << fmt17(m.metrics.spectral_ratio) << ','
            << fmt17(m.metrics.spectral_ratio_raw) << ',' << fmt17(m.gamma_a) << '\n';
    }
}

void write_densities_csv(std::ostream &out, const AggregateReport &report) {
    out << "kernel_a,kernel_b,result_type,d,bin,lo,hi,count,density\n";
    for (const auto &r : report.densities) {
        out << r.kernel_a << ',' << r.kernel_b << ',' << result_type_name(r.result_type) << ','
            << r.d << ',' << r.bin << ',' << fmt17(r.lo) << ',' << fmt17(r.hi) << ',' << r.count
            << ',' << fmt17(r.density) << '\n';
    }
}

void write_differences_csv(std::ostream &out, const AggregateReport &report) {
    out << "kernel_a,kernel_b,accuracy,aucroc,margin,spectral_ratio,spectral_ratio_raw\n";
    char buf[160];
    for (const auto &r : report.differences) {
        std::snprintf(buf, sizeof buf, "%.2f,%.2f,%.2f,%.2f,%.2f", r.delta.accuracy, r.delta.aucroc,
                      r.delta.margin, r.delta.spectral_ratio, r.delta.spectral_ratio_raw);
        out << r.kernel_a << ',' << r.kernel_b << ',' << buf << '\n';
    }
}

std::vector<GridPoint> decision_grid(const SVMModel &model, const KernelCombination &combination,
                                     const Matrix &train_X, std::size_t resolution) {
    if (train_X.cols() != 2) {
        fail(ErrorCode::Dimension, "decision_grid: only two-feature data can be gridded");
    }
    if (resolution < 2) {
        fail(ErrorCode::Argument, "decision_grid: resolution must be at least 2");
    }
    const double step = 2.0 * std::numbers::pi / static_cast<double>(resolution - 1);
    Matrix lattice(static_cast<Eigen::Index>(resolution * resolution), 2);
    for (std::size_t i = 0; i < resolution; ++i) {
        for (std::size_t j = 0; j < resolution; ++j) {
            const auto row = static_cast<Eigen::Index>(i * resolution + j);
            lattice(row, 0) = static_cast<double>(i) * step;
            lattice(row, 1) = static_cast<double>(j) * step;
        }
    }
    const Vector scores = decision_values(model, combination.cross_gram(lattice, train_X));
    std::vector<GridPoint> grid;
    grid.reserve(static_cast<std::size_t>(lattice.rows()));
    for (Eigen::Index r = 0; r < lattice.rows(); ++r) {
        grid.push_back({lattice(r, 0), lattice(r, 1), scores(r)});
    }
    return grid;
}

void write_grid_csv(std::ostream &out, const std::vector<GridPoint> &grid) {
    out << "x,y,score\n";
    for (const auto &p : grid) {
        out << fmt17(p.x) << ',' << fmt17(p.y) << ',' << fmt17(p.score) << '\n';
    }
}

} // namespace qmkl
