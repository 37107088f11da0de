// Command-line front end over the C API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qmkl.h"

namespace {

using nlohmann::json;

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void check(qmkl_status s, const std::string &what) {
    if (s != QMKL_OK) {
        throw Failure(what + ": " + qmkl_status_string(s) + ": " + qmkl_last_error_message());
    }
}

struct DatasetDeleter {
    void operator()(qmkl_dataset *p) const { qmkl_dataset_free(p); }
};
struct KernelDeleter {
    void operator()(qmkl_kernel *p) const { qmkl_kernel_free(p); }
};
struct GramDeleter {
    void operator()(qmkl_gram *p) const { qmkl_gram_free(p); }
};
struct SvmDeleter {
    void operator()(qmkl_svm *p) const { qmkl_svm_free(p); }
};
struct StringDeleter {
    void operator()(char *p) const { qmkl_string_free(p); }
};
using DatasetPtr = std::unique_ptr<qmkl_dataset, DatasetDeleter>;
using KernelPtr = std::unique_ptr<qmkl_kernel, KernelDeleter>;
using GramPtr = std::unique_ptr<qmkl_gram, GramDeleter>;
using SvmPtr = std::unique_ptr<qmkl_svm, SvmDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

std::string slurp(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw Failure("cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void emit(const std::string &text, const std::string &path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        if (text.empty() || text.back() != '\n') {
            std::cout << '\n';
        }
        return;
    }
    std::ofstream out(path);
    if (!out) {
        throw Failure("cannot open '" + path + "' for writing");
    }
    out << text;
    if (!text.empty() && text.back() != '\n') {
        out << '\n';
    }
}

DatasetPtr load_dataset(const std::string &path) {
    qmkl_dataset *ds = nullptr;
    check(qmkl_dataset_load_csv(path.c_str(), &ds), "load dataset");
    return DatasetPtr(ds);
}

qmkl_partition parse_partition(const std::string &name) {
    if (name == "train") return QMKL_PARTITION_TRAIN;
    if (name == "test") return QMKL_PARTITION_TEST;
    if (name == "all") return QMKL_PARTITION_ALL;
    throw Failure("unknown partition '" + name + "'");
}

std::vector<int> labels_of(const qmkl_dataset *ds, qmkl_partition part) {
    size_t n = 0;
    check(qmkl_dataset_labels(ds, part, nullptr, 0, &n), "labels");
    std::vector<int> y(n);
    check(qmkl_dataset_labels(ds, part, y.data(), y.size(), &n), "labels");
    return y;
}

// "kind" or "kind:topology"
json kernel_entry(const std::string &text) {
    const auto colon = text.find(':');
    json k = {{"kind", text.substr(0, colon)}};
    if (colon != std::string::npos) {
        k["topology"] = text.substr(colon + 1);
    }
    return k;
}

// Shared request flags for train, evaluate and decision-grid.
struct RequestFlags {
    std::string request_path;
    std::vector<std::string> kernels;
    std::optional<std::uint64_t> seed;
    std::optional<double> lambda;
    std::optional<double> learning_rate;
    std::optional<int> max_outer_iters;

    void add(CLI::App *cmd) {
        cmd->add_option("--request", request_path, "JSON request file");
        cmd->add_option("-k,--kernel", kernels, "kernel kind, optionally kind:topology (repeatable)");
        cmd->add_option("--seed", seed, "seed for default kernel parameters");
        cmd->add_option("--lambda", lambda, "EasyMKL regularization");
        cmd->add_option("--lr", learning_rate, "QCC-net learning rate");
        cmd->add_option("--max-iters", max_outer_iters, "QCC-net outer iterations");
    }

    [[nodiscard]] json build() const {
        json req = request_path.empty() ? json::object() : json::parse(slurp(request_path));
        if (!kernels.empty()) {
            req["kernels"] = json::array();
            for (const auto &k : kernels) {
                req["kernels"].push_back(kernel_entry(k));
            }
        }
        if (seed) req["seed"] = *seed;
        if (lambda) req["lambda"] = *lambda;
        if (learning_rate) req["qccnet"]["learning_rate"] = *learning_rate;
        if (max_outer_iters) req["qccnet"]["max_outer_iters"] = *max_outer_iters;
        return req;
    }
};

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Quantum-classical multiple kernel learning"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(qmkl_version()));

    // gen-data
    auto *gen = app.add_subcommand("gen-data", "generate a Gaussian-cluster dataset as CSV");
    std::size_t gen_d = 2, gen_n = 100, gen_clusters = 2;
    double gen_sep = 1.0, gen_ratio = 0.5;
    std::uint64_t gen_seed = 0;
    bool gen_train_only = false;
    std::string gen_out;
    gen->add_option("-d,--features", gen_d, "feature count")->capture_default_str();
    gen->add_option("-n,--samples", gen_n, "sample count")->capture_default_str();
    gen->add_option("--class-sep", gen_sep, "cluster separation")->capture_default_str();
    gen->add_option("--clusters", gen_clusters, "clusters per class")->capture_default_str();
    gen->add_option("--seed", gen_seed, "random seed")->capture_default_str();
    gen->add_option("--train-ratio", gen_ratio, "training fraction")->capture_default_str();
    gen->add_flag("--scale-on-train", gen_train_only, "fit the scaler on the training split only");
    gen->add_option("-o,--out", gen_out, "output CSV")->required();

    // gram
    auto *gram = app.add_subcommand("gram", "compute a Gram matrix for one kernel");
    std::string gram_data, gram_kind, gram_topology = "all_pairs", gram_part = "train", gram_out,
                gram_format = "csv";
    std::vector<double> gram_theta;
    std::uint64_t gram_seed = 0;
    bool gram_raw = false;
    gram->add_option("--data", gram_data, "dataset CSV")->required();
    gram->add_option("-k,--kernel", gram_kind, "kernel kind")->required();
    gram->add_option("--topology", gram_topology, "QAOA topology")->capture_default_str();
    gram->add_option("--theta", gram_theta, "kernel parameters");
    gram->add_option("--seed", gram_seed, "seed for default parameters")->capture_default_str();
    gram->add_option("--partition", gram_part, "train, test or all")->capture_default_str();
    gram->add_flag("--raw", gram_raw, "skip normalization of unbounded kernels");
    gram->add_option("--format", gram_format, "csv or binary")->capture_default_str();
    gram->add_option("-o,--out", gram_out, "output file")->required();

    // mkl-fit
    auto *fit = app.add_subcommand("mkl-fit", "solve EasyMKL for precomputed Gram matrices");
    std::vector<std::string> fit_grams;
    std::string fit_data, fit_part = "train", fit_out;
    double fit_lambda = 0.2;
    fit->add_option("-g,--gram", fit_grams, "Gram file (repeatable)")->required();
    fit->add_option("--data", fit_data, "dataset CSV providing labels")->required();
    fit->add_option("--partition", fit_part, "partition the Grams were built on")->capture_default_str();
    fit->add_option("--lambda", fit_lambda, "regularization")->capture_default_str();
    fit->add_option("-o,--out", fit_out, "output JSON (default stdout)");

    // train
    auto *tr = app.add_subcommand("train", "train kernel parameters with QCC-net");
    std::string tr_data, tr_out, tr_trace;
    RequestFlags tr_flags;
    tr->add_option("--data", tr_data, "dataset CSV")->required();
    tr_flags.add(tr);
    tr->add_option("-o,--out", tr_out, "result JSON (default stdout)");
    tr->add_option("--trace", tr_trace, "per-iteration JSON lines");

    // svm
    auto *svm = app.add_subcommand("svm", "fit an SVM on a precomputed Gram matrix");
    std::string svm_gram, svm_data, svm_part = "train", svm_out;
    double svm_C = 1.0;
    svm->add_option("-g,--gram", svm_gram, "Gram file")->required();
    svm->add_option("--data", svm_data, "dataset CSV providing labels")->required();
    svm->add_option("--partition", svm_part, "partition the Gram was built on")->capture_default_str();
    svm->add_option("-C,--svm-C", svm_C, "box constraint")->capture_default_str();
    svm->add_option("-o,--out", svm_out, "model JSON (default stdout)");

    // evaluate
    auto *ev = app.add_subcommand("evaluate", "evaluate one kernel combination on the test split");
    std::string ev_data, ev_type = "II", ev_out;
    std::optional<double> ev_C;
    RequestFlags ev_flags;
    ev->add_option("--data", ev_data, "dataset CSV")->required();
    ev_flags.add(ev);
    ev->add_option("--type", ev_type, "result type I, II or III")->capture_default_str();
    ev->add_option("-C,--svm-C", ev_C, "box constraint");
    ev->add_option("-o,--out", ev_out, "result JSON (default stdout)");

    // experiment
    auto *ex = app.add_subcommand("experiment", "run the experiment grid");
    std::string ex_config, ex_out = "results";
    bool ex_full = false, ex_quiet = false;
    unsigned ex_threads = 0;
    std::optional<int> ex_reps;
    std::optional<std::uint64_t> ex_seed;
    ex->add_option("--config", ex_config, "JSON config file");
    ex->add_flag("--full", ex_full, "use d = 2..13 instead of the desk-scale grid");
    ex->add_option("--threads", ex_threads, "worker threads (0 = hardware)");
    ex->add_option("--repetitions", ex_reps, "repetitions per d");
    ex->add_option("--base-seed", ex_seed, "base seed");
    ex->add_option("-o,--out", ex_out, "output directory")->capture_default_str();
    ex->add_flag("-q,--quiet", ex_quiet, "no progress output");

    // aggregate
    auto *ag = app.add_subcommand("aggregate", "medians, weight densities and differences");
    std::string ag_rows, ag_out = ".";
    ag->add_option("--rows", ag_rows, "rows.jsonl from an experiment")->required();
    ag->add_option("-o,--out", ag_out, "output directory")->capture_default_str();

    // decision-grid
    auto *dg = app.add_subcommand("decision-grid", "sample the SVM decision function on [0, 2pi]^2");
    std::string dg_data, dg_type = "II", dg_out;
    std::vector<double> dg_gamma;
    std::size_t dg_res = 100;
    RequestFlags dg_flags;
    dg->add_option("--data", dg_data, "dataset CSV with two features")->required();
    dg_flags.add(dg);
    dg->add_option("--type", dg_type, "result type when weights are not fixed")->capture_default_str();
    dg->add_option("--gamma", dg_gamma, "fixed kernel weights");
    dg->add_option("--resolution", dg_res, "points per axis")->capture_default_str();
    dg->add_option("-o,--out", dg_out, "output CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            qmkl_dataset *ds = nullptr;
            check(qmkl_dataset_generate(gen_d, gen_n, gen_sep, gen_clusters, gen_seed, gen_ratio,
                                        gen_train_only ? 1 : 0, &ds),
                  "generate");
            DatasetPtr holder(ds);
            check(qmkl_dataset_save_csv(ds, gen_out.c_str()), "save dataset");
        } else if (*gram) {
            auto ds = load_dataset(gram_data);
            size_t d = 0;
            check(qmkl_dataset_shape(ds.get(), nullptr, &d, nullptr, nullptr), "shape");
            qmkl_kernel *k = nullptr;
            if (gram_theta.empty()) {
                check(qmkl_kernel_create_default(gram_kind.c_str(), d, gram_seed, gram_topology.c_str(), &k),
                      "kernel");
            } else {
                check(qmkl_kernel_create(gram_kind.c_str(), d, gram_theta.data(), gram_theta.size(),
                                         gram_topology.c_str(), &k),
                      "kernel");
            }
            KernelPtr kernel(k);
            qmkl_gram *g = nullptr;
            check(qmkl_gram_compute(k, ds.get(), parse_partition(gram_part), gram_raw ? 0 : 1, &g), "gram");
            GramPtr holder(g);
            qmkl_gram_format fmt;
            if (gram_format == "csv") {
                fmt = QMKL_GRAM_CSV;
            } else if (gram_format == "binary" || gram_format == "bin") {
                fmt = QMKL_GRAM_BINARY;
            } else {
                throw Failure("unknown format '" + gram_format + "'");
            }
            check(qmkl_gram_save(g, gram_out.c_str(), fmt), "save gram");
        } else if (*fit) {
            auto ds = load_dataset(fit_data);
            const auto y = labels_of(ds.get(), parse_partition(fit_part));
            std::vector<GramPtr> grams;
            std::vector<const qmkl_gram *> raw;
            for (const auto &path : fit_grams) {
                qmkl_gram *g = nullptr;
                check(qmkl_gram_load(path.c_str(), &g), "load " + path);
                grams.emplace_back(g);
                raw.push_back(g);
            }
            char *out = nullptr;
            check(qmkl_mkl_fit(raw.data(), raw.size(), y.data(), y.size(), fit_lambda, &out), "mkl-fit");
            StringPtr text(out);
            emit(text.get(), fit_out);
        } else if (*tr) {
            auto ds = load_dataset(tr_data);
            const auto req = tr_flags.build().dump();
            char *out = nullptr;
            char *trace = nullptr;
            check(qmkl_train(ds.get(), req.c_str(), &out, &trace), "train");
            StringPtr text(out);
            StringPtr trace_text(trace);
            emit(text.get(), tr_out);
            if (!tr_trace.empty()) {
                emit(trace_text.get(), tr_trace);
            }
        } else if (*svm) {
            auto ds = load_dataset(svm_data);
            const auto y = labels_of(ds.get(), parse_partition(svm_part));
            qmkl_gram *g = nullptr;
            check(qmkl_gram_load(svm_gram.c_str(), &g), "load gram");
            GramPtr gram_holder(g);
            qmkl_svm *model = nullptr;
            check(qmkl_svm_train(g, y.data(), y.size(), svm_C, &model), "svm");
            SvmPtr model_holder(model);
            char *out = nullptr;
            check(qmkl_svm_to_json(model, &out), "svm json");
            StringPtr text(out);
            emit(text.get(), svm_out);
        } else if (*ev) {
            auto ds = load_dataset(ev_data);
            auto req = ev_flags.build();
            req["result_type"] = ev_type;
            if (ev_C) req["svm_C"] = *ev_C;
            const auto body = req.dump();
            char *out = nullptr;
            check(qmkl_evaluate(ds.get(), body.c_str(), &out), "evaluate");
            StringPtr text(out);
            emit(text.get(), ev_out);
        } else if (*ex) {
            json cfg = ex_config.empty() ? json::object() : json::parse(slurp(ex_config));
            if (ex_reps) cfg["repetitions"] = *ex_reps;
            if (ex_seed) cfg["base_seed"] = *ex_seed;
            const auto body = cfg.dump();
            char *summary = nullptr;
            check(qmkl_experiment_run(body.c_str(), ex_out.c_str(), ex_full ? 1 : 0, ex_threads,
                                      ex_quiet ? 0 : 1, &summary),
                  "experiment");
            StringPtr text(summary);
            const auto s = json::parse(text.get());
            std::cout << text.get() << '\n';
            if (s.at("errors").get<std::size_t>() > 0) {
                std::cerr << s.at("errors") << " instance(s) failed; see rows.jsonl\n";
                return 1;
            }
        } else if (*ag) {
            check(qmkl_aggregate(ag_rows.c_str(), ag_out.c_str()), "aggregate");
        } else if (*dg) {
            auto ds = load_dataset(dg_data);
            auto req = dg_flags.build();
            req["result_type"] = dg_type;
            if (!dg_gamma.empty()) req["gamma"] = dg_gamma;
            const auto body = req.dump();
            check(qmkl_decision_grid(ds.get(), body.c_str(), dg_res, dg_out.c_str()), "decision-grid");
        }
    } catch (const Failure &e) {
        std::cerr << "qmkl-cli: " << e.what() << '\n';
        return 1;
    } catch (const std::exception &e) {
        std::cerr << "qmkl-cli: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
