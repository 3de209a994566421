#include "groktopo/analysis.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <mutex>
#include <thread>

#include "groktopo/csv.hpp"
#include "groktopo/error.hpp"
#include "groktopo/fourier.hpp"
#include "groktopo/geometry.hpp"
#include "groktopo/rng.hpp"
#include "groktopo/trainer.hpp"

namespace groktopo {

namespace fs = std::filesystem;

std::vector<std::string> layer_labels(const ExperimentConfig& config) {
    std::vector<std::string> out{"embed"};
    const int hidden = config.arch == Arch::Transformer ? config.transformer.n_layers
                                                        : static_cast<int>(config.mlp.hidden_widths.size());
    for (int k = 1; k <= hidden; ++k) out.push_back("layer" + std::to_string(k));
    return out;
}

int worker_limit(int requested) {
    int n = requested > 0 ? requested : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("GROKTOPO_THREADS"); env && *env) {
        int cap = 0;
        try {
            cap = std::stoi(env);
        } catch (const std::exception&) {
            fail(ErrorKind::Config, std::string("GROKTOPO_THREADS must be a positive integer, got '") + env + "'");
        }
        if (cap < 1) fail(ErrorKind::Config, std::string("GROKTOPO_THREADS must be a positive integer, got '") + env + "'");
        n = std::min(n, cap);
    }
    return n;
}

namespace {

enum Purpose : std::uint64_t { kPhSample = 1, kLidSample = 2 };

std::uint64_t sample_seed(std::uint64_t seed, std::int64_t step, std::size_t layer, Purpose purpose) {
    const std::uint64_t key = (static_cast<std::uint64_t>(step) << 16) ^ (static_cast<std::uint64_t>(layer) << 4) ^ purpose;
    return Rng::mix64(seed ^ Rng::mix64(key));
}

bool wants(const AnalysisOptions& o, const std::string& metric) {
    return std::find(o.metrics.begin(), o.metrics.end(), metric) != o.metrics.end();
}

void validate_options(const AnalysisOptions& o, const std::vector<std::string>& labels) {
    for (const auto& m : o.metrics) {
        if (m != "ph" && m != "lid" && m != "fourier") {
            fail(ErrorKind::Config, "unknown metric '" + m + "' (expected ph, lid or fourier)");
        }
    }
    for (const auto& l : o.layers) {
        if (std::find(labels.begin(), labels.end(), l) == labels.end()) {
            std::string known;
            for (const auto& k : labels) known += (known.empty() ? "" : ", ") + k;
            fail(ErrorKind::Config, "unknown layer '" + l + "' (this run has " + known + ")");
        }
    }
    if (o.every < 1) fail(ErrorKind::Config, "--every must be >= 1");
    if (o.lid_neighbors < 3) fail(ErrorKind::Config, "LID neighborhood must be >= 3");
    if (o.lid_subsample < 1 || o.ph_subsample < 1) fail(ErrorKind::Config, "subsample sizes must be >= 1");
    if (o.fourier_k < 1) fail(ErrorKind::Config, "fourier k must be >= 1");
}

CloudSource hidden_source(const ExperimentConfig& cfg, int layer, bool both_positions) {
    if (cfg.arch == Arch::Transformer) return CloudSource::transformer(layer, both_positions ? -1 : 1);
    return CloudSource::mlp(layer);
}

struct Job {
    std::int64_t step;
    fs::path dir;
};

class Analyzer {
public:
    Analyzer(const fs::path& run_dir, const ExperimentConfig& cfg, const AnalyzeOptions& options)
        : run_dir_(run_dir), cfg_(cfg), model_(cfg.model()), opts_(options.analysis), labels_(layer_labels(cfg)) {
        selected_ = opts_.layers.empty() ? labels_ : opts_.layers;
        // keep the canonical layer order
        std::vector<std::string> ordered;
        for (const auto& l : labels_) {
            if (std::find(selected_.begin(), selected_.end(), l) != selected_.end()) ordered.push_back(l);
        }
        selected_ = ordered;
        run_id_ = run_dir.filename().string();
    }

    void freeze_key_freqs(const fs::path& final_dir) {
        const auto ck = read_checkpoint(final_dir, model_);
        frozen_ = key_frequencies(row_spectrum(ck.params.at("tok_emb")), opts_.fourier_k);
    }

    std::vector<AnalysisRow> run(const Job& job) {
        CheckpointRecord ck = read_checkpoint(job.dir, model_);
        const bool need_states = std::any_of(selected_.begin(), selected_.end(), [&](const std::string& l) {
            return l != "embed" && (wants(opts_, "ph") || wants(opts_, "lid"));
        });
        if (need_states && !ck.states) {
            // States were not captured at this step; recompute them from the parameters.
            CapturedStates states;
            predict(model_, ck.params, test_set(), &states);
            ck.states = std::move(states);
        }
        std::vector<AnalysisRow> rows;
        for (const auto& label : selected_) {
            const auto layer_index =
                static_cast<std::size_t>(std::find(labels_.begin(), labels_.end(), label) - labels_.begin());
            AnalysisRow row;
            row.step = job.step;
            row.layer = label;
            if (label == "embed") {
                embed_metrics(ck, row);
            } else {
                hidden_metrics(ck, static_cast<int>(layer_index), row);
            }
            rows.push_back(std::move(row));
        }
        return rows;
    }

private:
    const std::vector<ModPair>& test_set() {
        std::call_once(test_once_, [&] { test_ = make_dataset(cfg_).test; });
        return test_;
    }

    void ph_metrics(const PointCloud& cloud, AnalysisRow& row) {
        const auto dg = rips_diagram(distance_matrix(cloud));
        row.ph = diagram_stats(dg);
        if (opts_.write_diagrams) {
            const fs::path dir = run_dir_ / "diagrams";
            fs::create_directories(dir);
            write_diagram_csv(dir / (step_dir_name(row.step) + "_" + row.layer + ".csv"), dg);
        }
    }

    void embed_metrics(const CheckpointRecord& ck, AnalysisRow& row) {
        if (wants(opts_, "ph")) ph_metrics(normalize_cloud(extract_cloud(ck, CloudSource::embedding(), run_id_)), row);
        if (wants(opts_, "fourier")) {
            const auto freqs = frozen_ ? *frozen_
                                       : key_frequencies(row_spectrum(ck.params.at("tok_emb")), opts_.fourier_k);
            const auto report = restricted_excluded_accuracy(logit_table(model_, ck.params), freqs);
            row.key_freqs = report.key_freqs;
            row.restricted_acc = report.restricted_acc;
            row.excluded_acc = report.excluded_acc;
        }
    }

    void hidden_metrics(const CheckpointRecord& ck, int layer, AnalysisRow& row) {
        const auto idx = static_cast<std::size_t>(layer);
        if (wants(opts_, "ph")) {
            const auto cloud = normalize_cloud(extract_cloud(ck, hidden_source(cfg_, layer, false), run_id_));
            ph_metrics(subsample(cloud, static_cast<std::size_t>(opts_.ph_subsample),
                                 sample_seed(cfg_.seed, ck.step, idx, kPhSample)),
                       row);
        }
        if (wants(opts_, "lid")) {
            auto cloud = deduplicate(normalize_cloud(extract_cloud(ck, hidden_source(cfg_, layer, true), run_id_)));
            cloud = subsample(cloud, static_cast<std::size_t>(opts_.lid_subsample),
                              sample_seed(cfg_.seed, ck.step, idx, kLidSample));
            const auto lid = pointwise_lid(cloud, opts_.lid_neighbors);
            row.lid_mean = lid.mean;
            row.lid_std = lid.std;
        }
    }

    fs::path run_dir_;
    ExperimentConfig cfg_;
    ModelConfig model_;
    AnalysisOptions opts_;
    std::vector<std::string> labels_;
    std::vector<std::string> selected_;
    std::string run_id_;
    std::optional<std::vector<int>> frozen_;
    std::once_flag test_once_;
    std::vector<ModPair> test_;
};

std::string opt(const std::optional<double>& v) { return csv::format_optional(v); }

}  // namespace

void write_analysis_csv(const fs::path& path, const std::vector<AnalysisRow>& rows) {
    csv::Table t;
    t.header = kAnalysisColumns;
    for (const auto& r : rows) {
        std::vector<std::string> f{std::to_string(r.step), r.layer};
        if (r.ph) {
            for (double v : {r.ph->h0_max, r.ph->h0_total, r.ph->h1_max, r.ph->h1_total}) f.push_back(csv::format(v));
        } else {
            f.insert(f.end(), 4, "");
        }
        f.push_back(opt(r.lid_mean));
        f.push_back(opt(r.lid_std));
        f.push_back(opt(r.restricted_acc));
        f.push_back(opt(r.excluded_acc));
        f.push_back(r.key_freqs ? join_freqs(*r.key_freqs) : "");
        t.rows.push_back(std::move(f));
    }
    csv::write(path, t);
}

std::vector<AnalysisRow> read_analysis_csv(const fs::path& path) {
    const auto t = csv::read(path);
    std::vector<std::size_t> col;
    for (const auto& name : kAnalysisColumns) col.push_back(t.column(name));
    auto num = [](const std::string& s) { return s.empty() ? std::optional<double>{} : csv::parse(s); };
    std::vector<AnalysisRow> out;
    for (const auto& f : t.rows) {
        AnalysisRow r;
        r.step = std::stoll(f[col[0]]);
        r.layer = f[col[1]];
        if (!f[col[2]].empty()) {
            r.ph = DiagramStats{csv::parse(f[col[2]]), csv::parse(f[col[3]]), csv::parse(f[col[4]]),
                                csv::parse(f[col[5]])};
        }
        r.lid_mean = num(f[col[6]]);
        r.lid_std = num(f[col[7]]);
        r.restricted_acc = num(f[col[8]]);
        r.excluded_acc = num(f[col[9]]);
        // A run with fourier enabled always has key frequencies.
        if (r.restricted_acc) r.key_freqs = parse_freqs(f[col[10]]);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<AnalysisRow> analyze_run(const fs::path& run_dir, const AnalyzeOptions& options) {
    const auto manifest = read_manifest(run_dir);
    const std::string status = manifest.value("status", "");
    if (status != "complete") {
        fail(ErrorKind::Contract, "run " + run_dir.string() + " is not complete (status: " + status + ")");
    }
    const ExperimentConfig cfg = run_config(run_dir);
    const auto labels = layer_labels(cfg);
    validate_options(options.analysis, labels);

    std::vector<Job> available;
    std::vector<std::int64_t> missing;
    for (const auto& s : manifest.at("checkpoints")) {
        const auto step = s.get<std::int64_t>();
        const fs::path dir = run_dir / step_dir_name(step);
        if (fs::exists(dir / "tensors.json")) {
            available.push_back({step, dir});
        } else {
            missing.push_back(step);
        }
    }
    if (!missing.empty()) {
        std::cerr << "warning: " << run_dir.string() << ": " << missing.size() << " checkpoint(s) missing, skipped:";
        for (auto s : missing) std::cerr << ' ' << s;
        std::cerr << '\n';
    }
    if (available.empty()) fail(ErrorKind::Io, "no checkpoints found in " + run_dir.string());

    std::vector<Job> jobs;
    for (std::size_t i = 0; i < available.size(); i += static_cast<std::size_t>(options.analysis.every)) {
        jobs.push_back(available[i]);
    }

    Analyzer analyzer(run_dir, cfg, options);
    if (options.analysis.freeze_key_freqs) analyzer.freeze_key_freqs(available.back().dir);

    std::vector<std::vector<AnalysisRow>> results(jobs.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex mu;
    const int workers = std::min<int>(worker_limit(options.threads), static_cast<int>(jobs.size()));
    auto work = [&] {
        if (workers > 1) omp_set_num_threads(1);
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            {
                std::lock_guard lock(mu);
                if (error) return;
            }
            try {
                results[i] = analyzer.run(jobs[i]);
                if (!options.quiet) {
                    std::lock_guard lock(mu);
                    std::cerr << run_dir.filename().string() << ": analyzed step " << jobs[i].step << '\n';
                }
            } catch (...) {
                std::lock_guard lock(mu);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (error) std::rethrow_exception(error);

    std::vector<AnalysisRow> rows;
    for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
    write_analysis_csv(run_dir / "analysis.csv", rows);
    return rows;
}

}  // namespace groktopo
