#include "qmkl.h"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "qmkl/data.hpp"
#include "qmkl/error.hpp"
#include "qmkl/experiment.hpp"
#include "qmkl/kernels.hpp"
#include "qmkl/mkl.hpp"
#include "qmkl/qccnet.hpp"
#include "qmkl/random.hpp"
#include "qmkl/svm.hpp"
#include "qmkl/metrics.hpp"
#include <cmath>
#include <cstdlib>

struct qmkl_dataset {
    qmkl::Dataset value;
};
struct qmkl_kernel {
    qmkl::KernelSpec value;
};
struct qmkl_gram {
    qmkl::GramMatrix value;
};
struct qmkl_svm {
    qmkl::SVMModel value;
};

namespace {

using nlohmann::json;

thread_local std::string g_last_error;

qmkl_status to_status(qmkl::ErrorCode code) {
    return static_cast<qmkl_status>(static_cast<int>(code));
}

template <class F>
qmkl_status guarded(F &&body) noexcept {
    try {
        g_last_error.clear();
        body();
        return QMKL_OK;
    } catch (const qmkl::Error &e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const json::exception &e) {
        g_last_error = std::string("json: ") + e.what();
        return QMKL_ERR_PARSE;
    } catch (const std::exception &e) {
        g_last_error = e.what();
        return QMKL_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown failure";
        return QMKL_ERR_INTERNAL;
    }
}

void require(const void *p, const char *name) {
    if (p == nullptr) {
        throw qmkl::Error(qmkl::ErrorCode::Argument, std::string(name) + " is null");
    }
}

char *dup_string(const std::string &s) {
    char *out = static_cast<char *>(std::malloc(s.size() + 1));
    if (!out) {
        throw std::bad_alloc();
    }
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

std::ifstream open_in(const char *path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) {
        qmkl::fail(qmkl::ErrorCode::Io, std::string("cannot open '") + path + "' for reading");
    }
    return in;
}

std::ofstream open_out(const std::filesystem::path &path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode);
    if (!out) {
        qmkl::fail(qmkl::ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
    }
    return out;
}

std::vector<double> to_std(const qmkl::Vector &v) { return {v.data(), v.data() + v.size()}; }

qmkl::Matrix partition_rows(const qmkl::Dataset &ds, qmkl_partition part) {
    switch (part) {
    case QMKL_PARTITION_TRAIN: return ds.train_features();
    case QMKL_PARTITION_TEST: return ds.test_features();
    default: return ds.features;
    }
}

std::vector<int> partition_labels(const qmkl::Dataset &ds, qmkl_partition part) {
    switch (part) {
    case QMKL_PARTITION_TRAIN: return ds.train_labels();
    case QMKL_PARTITION_TEST: return ds.test_labels();
    default: return ds.labels;
    }
}

json parse_request(const char *text) {
    if (text == nullptr || *text == '\0') {
        return json::object();
    }
    json j = json::parse(text);
    if (!j.is_object()) {
        qmkl::fail(qmkl::ErrorCode::Parse, "request must be a JSON object");
    }
    return j;
}

std::vector<qmkl::KernelSpec> kernels_from_request(const json &req, std::size_t d) {
    if (!req.contains("kernels") || !req.at("kernels").is_array() || req.at("kernels").empty()) {
        qmkl::fail(qmkl::ErrorCode::Argument, "request needs a non-empty \"kernels\" array");
    }
    const auto seed = req.value("seed", std::uint64_t{0});
    std::vector<qmkl::KernelSpec> specs;
    for (const auto &k : req.at("kernels")) {
        json obj = k.is_string() ? json{{"kind", k}} : k;
        const auto kind = qmkl::parse_kind(obj.at("kind").get<std::string>());
        const auto topo = qmkl::parse_topology(obj.value("topology", std::string("all_pairs")));
        if (obj.contains("theta")) {
            specs.emplace_back(kind, d, obj.at("theta").get<std::vector<double>>(), topo);
        } else {
            const auto kind_seed = qmkl::derive_seed({seed, static_cast<std::uint64_t>(kind)});
            specs.push_back(qmkl::KernelSpec::with_defaults(kind, d, kind_seed, topo));
        }
    }
    return specs;
}

qmkl::QCCNetConfig qccnet_from_request(const json &req) {
    qmkl::QCCNetConfig c;
    c.lambda = req.value("lambda", c.lambda);
    if (req.contains("qccnet")) {
        const auto &q = req.at("qccnet");
        c.learning_rate = q.value("learning_rate", c.learning_rate);
        c.adam_beta1 = q.value("adam_beta1", c.adam_beta1);
        c.adam_beta2 = q.value("adam_beta2", c.adam_beta2);
        c.adam_epsilon = q.value("adam_epsilon", c.adam_epsilon);
        c.max_outer_iters = q.value("max_outer_iters", c.max_outer_iters);
        c.loss_tolerance = q.value("loss_tolerance", c.loss_tolerance);
        c.patience = q.value("patience", c.patience);
        c.seed = q.value("seed", c.seed);
    }
    return c;
}

json mkl_solution_json(const qmkl::MKLSolution &s) {
    return {{"phi", to_std(s.phi)},
            {"gamma_l2", to_std(s.gamma_l2)},
            {"gamma_l1", to_std(s.gamma_l1)},
            {"loss", s.loss},
            {"iterations", s.iterations},
            {"converged", s.converged},
            {"degenerate", s.degenerate}};
}

json specs_theta(const std::vector<qmkl::KernelSpec> &specs) {
    json out = json::array();
    for (const auto &s : specs) {
        out.push_back(std::vector<double>(s.theta().begin(), s.theta().end()));
    }
    return out;
}

json trace_record_json(const qmkl::TraceRecord &r) {
    return {{"iteration", r.iteration},
            {"loss", r.loss},
            {"gamma_l2", to_std(r.gamma_l2)},
            {"gamma_l1", to_std(r.gamma_l1)},
            {"theta", r.theta},
            {"solver_iterations", r.solver_iterations},
            {"degenerate", r.degenerate}};
}

json model_json(const qmkl::SVMModel &m) {
    return {{"alpha", to_std(m.alpha)},
            {"bias", m.bias},
            {"support_indices", m.support_indices},
            {"C", m.C}};
}

struct Evaluated {
    qmkl::InstanceResult result;
    qmkl::ResultType type = qmkl::ResultType::II;
    bool fixed_gamma = false;
};

Evaluated evaluate_request(const qmkl::Dataset &ds, const json &req) {
    const auto specs = kernels_from_request(req, ds.n_features());
    qmkl::InstanceSettings settings;
    settings.qccnet = qccnet_from_request(req);
    settings.lambda = settings.qccnet.lambda;
    settings.svm_C = req.value("svm_C", settings.svm_C);

    Evaluated ev;
    if (req.contains("gamma")) {
        ev.fixed_gamma = true;
        auto &res = ev.result;
        res.combination.specs = specs;
        res.combination.gamma = req.at("gamma").get<std::vector<double>>();
        const qmkl::Matrix Xtr = ds.train_features();
        const auto ytr = ds.train_labels();
        const auto K = res.combination.train_gram(Xtr);
        qmkl::SVMOptions opts;
        opts.C = settings.svm_C;
        res.model = qmkl::train_svm(K.entries, ytr, opts);
        const qmkl::Matrix Kte = res.combination.cross_gram(ds.test_features(), Xtr);
        const qmkl::Vector scores = qmkl::decision_values(res.model, Kte);
        const auto pred = qmkl::predict(res.model, Kte);
        const auto yte = ds.test_labels();
        res.metrics.accuracy = qmkl::accuracy(pred, yte);
        res.metrics.aucroc = qmkl::aucroc(to_std(scores), yte);
        res.metrics.margin = qmkl::margin(K.entries, ytr);
        const auto sr = qmkl::spectral_ratio(K.entries);
        res.metrics.spectral_ratio = sr.normalized;
        res.metrics.spectral_ratio_raw = sr.raw;
        res.loss = std::nan("");
        return ev;
    }
    ev.type = qmkl::parse_result_type(req.value("result_type", std::string("II")));
    ev.result = qmkl::evaluate_instance(specs, ds, ev.type, settings);
    return ev;
}

} // namespace

extern "C" {

const char *qmkl_version(void) { return "0.1.0"; }

const char *qmkl_status_string(qmkl_status status) {
    switch (status) {
    case QMKL_OK: return "ok";
    case QMKL_ERR_NULL_ARGUMENT: return "null argument";
    case QMKL_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    default:
        if (status >= QMKL_ERR_SIZE && status <= QMKL_ERR_INTERNAL) {
            return qmkl::error_code_name(static_cast<qmkl::ErrorCode>(status));
        }
        return "unknown status";
    }
}

const char *qmkl_last_error_message(void) { return g_last_error.c_str(); }

void qmkl_string_free(char *s) { std::free(s); }

qmkl_status qmkl_dataset_generate(size_t n_features, size_t n_samples, double class_sep,
                                  size_t clusters_per_class, uint64_t seed, double train_ratio,
                                  int scale_on_train_only, qmkl_dataset **out) {
    if (!out) {
        return QMKL_ERR_NULL_ARGUMENT;
    }
    return guarded([&] {
        qmkl::InstanceConfig c;
        c.generator = {n_features, n_samples, class_sep, clusters_per_class, seed};
        c.train_ratio = train_ratio;
        c.scale_on_train_only = scale_on_train_only != 0;
        *out = new qmkl_dataset{qmkl::make_instance(c)};
    });
}

qmkl_status qmkl_dataset_load_csv(const char *path, qmkl_dataset **out) {
    if (!path || !out) {
        return QMKL_ERR_NULL_ARGUMENT;
    }
    return guarded([&] {
        auto in = open_in(path);
        *out = new qmkl_dataset{qmkl::load_csv(in)};
    });
}

qmkl_status qmkl_dataset_save_csv(const qmkl_dataset *ds, const char *path) {
    if (!ds || !path) {
        return QMKL_ERR_NULL_ARGUMENT;
    }
    return guarded([&] {
        auto out = open_out(path);
        qmkl::save_csv(out, ds->value);
    });
}

qmkl_status qmkl_dataset_shape(const qmkl_dataset *ds, size_t *n_samples, size_t *n_features,
                               size_t *n_train, size_t *n_test) {
    if (!ds) {
        return QMKL_ERR_NULL_ARGUMENT;
    }
    if (n_samples) *n_samples = ds->value.n_samples();
    if (n_features) *n_features = ds->value.n_features();
    if (n_train) *n_train = ds->value.train_indices.size();
    if (n_test) *n_test = ds->value.test_indices.size();
    return QMKL_OK;
}

qmkl_status qmkl_dataset_labels(const qmkl_dataset *ds, qmkl_partition part, int *buffer,
                                size_t capacity, size_t *count) {
    if (!ds || !count) {
        return QMKL_ERR_NULL_ARGUMENT;
    }
    const auto labels = partition_labels(ds->value, part);
    *count = labels.size();
    if (!buffer) {
        return QMKL_OK;
    }
    if (capacity < labels.size()) {
        g_last_error = "label buffer too small";
        return QMKL_ERR_BUFFER_TOO_SMALL;
    }
    std::copy(labels.begin(), labels.end(), buffer);
    return QMKL_OK;
}

void qmkl_dataset_free(qmkl_dataset *ds) { delete ds; }

qmkl_status qmkl_kernel_create(const char *kind, size_t n_features, const double *theta,
                               size_t n_theta, const char *topology, qmkl_kernel **out) {
    if (!kind || !out || (n_theta > 0 && !theta)) {
        return QMKL_ERR_NULL_ARGUMENT;
    }
    return guarded([&] {
        const auto topo = topology ? qmkl::parse_topology(topology) : qmkl::QaoaTopology::AllPairs;
        std::vector<double> t(theta, theta + n_theta);
        *out = new qmkl_kernel{qmkl::KernelSpec(qmkl::parse_kind(kind), n_features, std::move(t), topo)};
    });
}

qmkl_status qmkl_kernel_create_default(const char *kind, size_t n_features, uint64_t seed,
                                       const char *topology, qmkl_kernel **out) {
    if (!kind || !out) {
        return QMKL_ERR_NULL_ARGUMENT;
    }
    return guarded([&] {
        const auto topo = topology ? qmkl::parse_topology(topology) : qmkl::QaoaTopology::AllPairs;
        *out = new qmkl_kernel{
            qmkl::KernelSpec::with_defaults(qmkl::parse_kind(kind), n_features, seed, topo)};
    });
}

qmkl_status qmkl_kernel_theta(const qmkl_kernel *k, double *buffer, size_t capacity, size_t *count) {
    if (!k || !count) {
        return QMKL_ERR_NULL_ARGUMENT;
    }
    const auto theta = k->value.theta();
    *count = theta.size();
    if (!buffer) {
        return QMKL_OK;
    }
    if (capacity < theta.size()) {
        g_last_error = "theta buffer too small";
        return QMKL_ERR_BUFFER_TOO_SMALL;
    }
    std::copy(theta.begin(), theta.end(), buffer);
    return QMKL_OK;
}

qmkl_status qmkl_kernel_eval(const qmkl_kernel *k, const double *x, const double *y,
                             size_t n_features, double *out) {
    if (!k || !x || !y || !out) {
        return QMKL_ERR_NULL_ARGUMENT;
    }
    return guarded([&] {
        *out = qmkl::kernel_eval(k->value, {x, n_features}, {y, n_features});
    });
}

void qmkl_kernel_free(qmkl_kernel *k) { delete k; }

qmkl_status qmkl_gram_compute(const qmkl_kernel *k, const qmkl_dataset *ds, qmkl_partition part,
                              int normalize, qmkl_gram **out) {
    if (!k || !ds || !out) {
        return QMKL_ERR_NULL_ARGUMENT;
    }
    return guarded([&] {
        auto K = qmkl::gram_matrix(k->value, partition_rows(ds->value, part));
        if (normalize && !K.bounded) {
            K = qmkl::normalize_gram(K);
        }
        *out = new qmkl_gram{std::move(K)};
    });
}

qmkl_status qmkl_gram_from_entries(const double *entries, size_t m, qmkl_gram **out) {
    if (!entries || !out) {
        return QMKL_ERR_NULL_ARGUMENT;
    }
    return guarded([&] {
        qmkl::GramMatrix K;
        K.entries = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            entries, static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
        *out = new qmkl_gram{std::move(K)};
    });
}

qmkl_status qmkl_gram_load(const char *path, qmkl_gram **out) {
    if (!path || !out) {
        return QMKL_ERR_NULL_ARGUMENT;
    }
    return guarded([&] {
        auto in = open_in(path, std::ios::in | std::ios::binary);
        char magic[4] = {};
        in.read(magic, 4);
        const bool binary = in.gcount() == 4 && std::memcmp(magic, "QGRM", 4) == 0;
        in.clear();
        in.seekg(0);
        qmkl::GramMatrix K;
        K.entries = binary ? qmkl::read_gram_binary(in) : qmkl::read_gram_csv(in);
        bool unit_diag = K.size() > 0;
        for (Eigen::Index i = 0; i < K.size(); ++i) {
            unit_diag = unit_diag && std::abs(K.entries(i, i) - 1.0) <= 1e-10;
        }
        K.normalized = unit_diag;
        *out = new qmkl_gram{std::move(K)};
    });
}

qmkl_status qmkl_gram_save(const qmkl_gram *g, const char *path, qmkl_gram_format format) {
    if (!g || !path) {
        return QMKL_ERR_NULL_ARGUMENT;
    }
    return guarded([&] {
        if (format == QMKL_GRAM_BINARY) {
            auto out = open_out(path, std::ios::out | std::ios::binary);
            qmkl::write_gram_binary(out, g->value.entries);
        } else {
            auto out = open_out(path);
            qmkl::write_gram_csv(out, g->value.entries);
        }
    });
}

qmkl_status qmkl_gram_size(const qmkl_gram *g, size_t *m) {
    if (!g || !m) {
        return QMKL_ERR_NULL_ARGUMENT;
    }
    *m = static_cast<size_t>(g->value.size());
    return QMKL_OK;
}

qmkl_status qmkl_gram_entries(const qmkl_gram *g, double *buffer, size_t capacity) {
    if (!g || !buffer) {
        return QMKL_ERR_NULL_ARGUMENT;
    }
    const auto m = static_cast<size_t>(g->value.size());
    if (capacity < m * m) {
        g_last_error = "entry buffer too small";
        return QMKL_ERR_BUFFER_TOO_SMALL;
    }
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = 0; j < m; ++j) {
            buffer[i * m + j] = g->value.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    }
    return QMKL_OK;
}

qmkl_status qmkl_gram_min_eigenvalue(const qmkl_gram *g, double *out) {
    if (!g || !out) {
        return QMKL_ERR_NULL_ARGUMENT;
    }
    return guarded([&] { *out = qmkl::min_eigenvalue(g->value.entries); });
}

void qmkl_gram_free(qmkl_gram *g) { delete g; }

qmkl_status qmkl_mkl_fit(const qmkl_gram *const *grams, size_t n_grams, const int *labels, size_t m,
                         double lambda, char **solution_json) {
    if (!grams || !labels || !solution_json) {
        return QMKL_ERR_NULL_ARGUMENT;
    }
    return guarded([&] {
        qmkl::MKLProblem p;
        for (size_t r = 0; r < n_grams; ++r) {
            require(grams[r], "gram handle");
            p.grams.push_back(grams[r]->value);
        }
        p.labels.assign(labels, labels + m);
        p.lambda = lambda;
        const auto sol = qmkl::solve_easymkl(p);
        *solution_json = dup_string(mkl_solution_json(sol).dump());
    });
}


qmkl_status qmkl_svm_train(const qmkl_gram *g, const int *labels, size_t m, double C, qmkl_svm **out) {
    if (!g || !labels || !out) {
        return QMKL_ERR_NULL_ARGUMENT;
    }
    return guarded([&] {
        if (static_cast<size_t>(g->value.size()) != m) {
            qmkl::fail(qmkl::ErrorCode::Dimension, "label count does not match the Gram size");
        }
        qmkl::SVMOptions opts;
        opts.C = C;
        std::vector<int> y(labels, labels + m);
        *out = new qmkl_svm{qmkl::train_svm(g->value.entries, y, opts)};
    });
}

qmkl_status qmkl_svm_decision(const qmkl_svm *model, const double *k_cross, size_t t, size_t m,
                              double *out) {
    if (!model || !k_cross || !out) {
        return QMKL_ERR_NULL_ARGUMENT;
    }
    return guarded([&] {
        const qmkl::Matrix K =
            Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
                k_cross, static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(m));
        const qmkl::Vector v = qmkl::decision_values(model->value, K);
        std::copy(v.data(), v.data() + v.size(), out);
    });
}

qmkl_status qmkl_svm_to_json(const qmkl_svm *model, char **out) {
    if (!model || !out) {
        return QMKL_ERR_NULL_ARGUMENT;
    }
    return guarded([&] { *out = dup_string(model_json(model->value).dump()); });
}

void qmkl_svm_free(qmkl_svm *model) { delete model; }

qmkl_status qmkl_train(const qmkl_dataset *ds, const char *request_json, char **result_json,
                       char **trace_jsonl) {
    if (!ds || !result_json) {
        return QMKL_ERR_NULL_ARGUMENT;
    }
    return guarded([&] {
        const json req = parse_request(request_json);
        const auto specs = kernels_from_request(req, ds->value.n_features());
        const auto config = qccnet_from_request(req);
        const auto res = qmkl::train(specs, ds->value.train_features(), ds->value.train_labels(), config);
        json out = {{"theta", specs_theta(res.specs)},
                    {"gamma_l2", to_std(res.gamma_l2)},
                    {"gamma_l1", to_std(res.gamma_l1)},
                    {"loss", res.solution.loss},
                    {"best_iteration", res.trace.best_iteration},
                    {"trained", res.trained}};
        std::string trace;
        for (const auto &r : res.trace.records) {
            trace += trace_record_json(r).dump();
            trace += '\n';
        }
        char *result = dup_string(out.dump());
        if (trace_jsonl) {
            *trace_jsonl = dup_string(trace);
        }
        *result_json = result;
    });
}

qmkl_status qmkl_evaluate(const qmkl_dataset *ds, const char *request_json, char **result_json) {
    if (!ds || !result_json) {
        return QMKL_ERR_NULL_ARGUMENT;
    }
    return guarded([&] {
        const json req = parse_request(request_json);
        const auto ev = evaluate_request(ds->value, req);
        const auto &r = ev.result;
        json out = {{"theta", specs_theta(r.combination.specs)},
                    {"gamma_l1", r.combination.gamma},
                    {"accuracy", r.metrics.accuracy},
                    {"aucroc", r.metrics.aucroc},
                    {"margin", r.metrics.margin},
                    {"spectral_ratio", r.metrics.spectral_ratio},
                    {"spectral_ratio_raw", r.metrics.spectral_ratio_raw},
                    {"n_support", r.model.support_indices.size()}};
        out["loss"] = std::isnan(r.loss) ? json(nullptr) : json(r.loss);
        out["result_type"] = ev.fixed_gamma ? json(nullptr) : json(std::string(qmkl::result_type_name(ev.type)));
        *result_json = dup_string(out.dump());
    });
}

qmkl_status qmkl_experiment_run(const char *config_json, const char *out_dir, int full,
                                unsigned threads, int verbose, char **summary_json) {
    if (!out_dir) {
        return QMKL_ERR_NULL_ARGUMENT;
    }
    return guarded([&] {
        auto config = qmkl::default_experiment_config(full != 0);
        if (config_json && *config_json) {
            config = qmkl::parse_experiment_config(json::parse(config_json), config);
        }
        if (threads > 0) {
            config.threads = threads;
        }
        const std::filesystem::path dir(out_dir);
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) {
            qmkl::fail(qmkl::ErrorCode::Io, "cannot create '" + dir.string() + "': " + ec.message());
        }
        {
            auto out = open_out(dir / "config.json");
            out << qmkl::to_json(config).dump(2) << '\n';
        }
        qmkl::ProgressCallback progress;
        if (verbose) {
            progress = [](std::size_t done, std::size_t total) {
                std::fprintf(stderr, "\r%zu/%zu instances", done, total);
                if (done == total) {
                    std::fputc('\n', stderr);
                }
            };
        }
        const auto rows = qmkl::run_experiment(config, progress);
        {
            auto out = open_out(dir / "rows.jsonl");
            qmkl::write_rows_jsonl(out, rows);
        }
        {
            auto out = open_out(dir / "rows.csv");
            qmkl::write_rows_csv(out, rows);
        }
        {
            auto out = open_out(dir / "timings.csv");
            qmkl::write_timings_csv(out, rows);
        }
        std::size_t errors = 0;
        for (const auto &r : rows) {
            errors += r.error.empty() ? 0 : 1;
        }
        if (summary_json) {
            json s = {{"rows", rows.size()},
                      {"expected_rows", qmkl::expected_row_count(config)},
                      {"errors", errors},
                      {"out_dir", dir.string()}};
            *summary_json = dup_string(s.dump());
        }
    });
}

qmkl_status qmkl_aggregate(const char *rows_path, const char *out_dir) {
    if (!rows_path || !out_dir) {
        return QMKL_ERR_NULL_ARGUMENT;
    }
    return guarded([&] {
        auto in = open_in(rows_path);
        const auto report = qmkl::aggregate_report(qmkl::read_rows_jsonl(in));
        const std::filesystem::path dir(out_dir);
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) {
            qmkl::fail(qmkl::ErrorCode::Io, "cannot create '" + dir.string() + "': " + ec.message());
        }
        auto medians = open_out(dir / "medians.csv");
        qmkl::write_medians_csv(medians, report);
        auto densities = open_out(dir / "weights_density.csv");
        qmkl::write_densities_csv(densities, report);
        auto diffs = open_out(dir / "difference.csv");
        qmkl::write_differences_csv(diffs, report);
    });
}

qmkl_status qmkl_decision_grid(const qmkl_dataset *ds, const char *request_json, size_t resolution,
                               const char *out_path) {
    if (!ds || !out_path) {
        return QMKL_ERR_NULL_ARGUMENT;
    }
    return guarded([&] {
        const json req = parse_request(request_json);
        const auto ev = evaluate_request(ds->value, req);
        const auto grid = qmkl::decision_grid(ev.result.model, ev.result.combination,
                                              ds->value.train_features(), resolution);
        auto out = open_out(out_path);
        qmkl::write_grid_csv(out, grid);
    });
}

} // extern "C"
