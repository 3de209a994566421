#include "groktopo/trainer.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <numeric>

#include "groktopo/csv.hpp"
#include "groktopo/error.hpp"
#include "groktopo/fpenv.hpp"
#include "groktopo/rng.hpp"

namespace groktopo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_json_file(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

json split_json(const SplitDataset& split) {
    auto rows = [](const std::vector<ModPair>& v) {
        json arr = json::array();
        for (const auto& pr : v) arr.push_back({pr.a, pr.b, pr.label});
        return arr;
    };
    return {{"p", split.p},      {"alpha", split.alpha}, {"seed", split.seed},
            {"p_frac", split.p_frac}, {"train", rows(split.train)}, {"test", rows(split.test)}};
}

void prepare_run_dir(const fs::path& dir, bool force) {
    std::error_code ec;
    if (fs::exists(dir) && !fs::is_empty(dir)) {
        if (!force) fail(ErrorKind::Io, "run directory " + dir.string() + " is not empty (use --force to overwrite)");
        fs::remove_all(dir, ec);
        if (ec) fail(ErrorKind::Io, "cannot clear " + dir.string() + ": " + ec.message());
    }
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
}

std::string metrics_line(const MetricsRow& r) {
    return csv::join({std::to_string(r.step), csv::format(r.train_loss), csv::format(r.train_acc),
                      csv::format(r.test_loss), csv::format(r.test_acc)});
}

}  // namespace

std::vector<MetricsRow> read_metrics(const fs::path& csv_path) {
    const auto table = csv::read(csv_path);
    std::vector<std::size_t> cols;
    for (const auto& name : kMetricsColumns) cols.push_back(table.column(name));
    std::vector<MetricsRow> out;
    for (const auto& row : table.rows) {
        MetricsRow r;
        r.step = std::stoll(row[cols[0]]);
        r.train_loss = csv::parse(row[cols[1]]);
        r.train_acc = csv::parse(row[cols[2]]);
        r.test_loss = csv::parse(row[cols[3]]);
        r.test_acc = csv::parse(row[cols[4]]);
        out.push_back(r);
    }
    return out;
}

SplitDataset make_dataset(const ExperimentConfig& config) {
    auto split = split_train_test(build_pairs(config.p), config.alpha, config.seed);
    return permute_labels(split, config.p_frac, config.seed);
}

std::vector<std::int64_t> checkpoint_steps(const ExperimentConfig& config) {
    std::vector<std::int64_t> steps{0};
    const std::int64_t total = config.optim.total_steps;
    for (std::int64_t s = config.checkpoint_every; s < total; s += config.checkpoint_every) steps.push_back(s);
    if (total > 0) steps.push_back(total);
    return steps;
}

BatchSampler::BatchSampler(std::size_t train_count, std::size_t batch_size, std::uint64_t seed)
    : batch_size_(batch_size), order_(train_count), pos_(train_count), rng_(Rng::stream(seed, streams::kBatches)) {
    if (train_count == 0) fail(ErrorKind::Config, "cannot train on an empty training set");
    std::iota(order_.begin(), order_.end(), std::size_t{0});
}

std::vector<std::size_t> BatchSampler::next() {
    const std::size_t n = order_.size();
    if (pos_ >= n) {
        rng_.shuffle(std::span(order_));
        pos_ = 0;
    }
    std::vector<std::size_t> batch(batch_size_);
    for (std::size_t i = 0; i < batch_size_; ++i) batch[i] = order_[(pos_ + i) % n];
    pos_ += batch_size_;
    return batch;
}

StepResult loss_and_grads(const ModelConfig& model, const ModelParams& params, std::span<const ModPair> batch) {
    Graph<float> g;
    std::vector<Var<float>> vars;
    vars.reserve(params.tensors.size());
    for (const auto& t : params.tensors) vars.push_back(g.variable(t.value));
    const auto fwd = model_forward<float>(g, model, std::span<const Var<float>>(vars), batch, false);
    std::vector<int> labels;
    labels.reserve(batch.size());
    for (const auto& pr : batch) labels.push_back(pr.label);
    const auto loss = ops::cross_entropy(fwd.logits, std::span<const int>(labels));
    g.backward(loss);
    StepResult out;
    out.loss = loss.value()[0];
    out.grads.reserve(vars.size());
    for (const auto& v : vars) out.grads.push_back(g.grad(v));
    return out;
}

json read_manifest(const fs::path& run_dir) {
    std::ifstream in(run_dir / "manifest.json");
    if (!in) fail(ErrorKind::Io, "no manifest.json in " + run_dir.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorKind::Io, "malformed manifest in " + run_dir.string() + ": " + e.what());
    }
}

ExperimentConfig run_config(const fs::path& run_dir) {
    auto cfg = read_manifest(run_dir).at("config").get<ExperimentConfig>();
    cfg.validate();
    return cfg;
}

void train(const ExperimentConfig& config, const fs::path& run_dir, const TrainOptions& options) {
    config.validate();
    prepare_run_dir(run_dir, options.force);
    const FlushDenormals ftz;

    json manifest = {{"tool", "groktopo"},
                     {"version", kToolVersion},
                     {"config", config},
                     {"started_at", utc_now()},
                     {"finished_at", nullptr},
                     {"status", "running"},
                     {"checkpoints", json::array()}};
    write_json_file(run_dir / "manifest.json", manifest);

    try {
        const ModelConfig model = config.model();
        const SplitDataset data = make_dataset(config);
        write_json_file(run_dir / "split.json", split_json(data));
        manifest["split"] = {{"file", "split.json"},
                             {"train_size", data.train.size()},
                             {"test_size", data.test.size()},
                             {"permuted", permuted_count(config.p_frac, data.train.size())}};

        ModelParams params = init_params(model, config.seed);
        OptimState state = init_optim_state(params);
        BatchSampler sampler(data.train.size(), static_cast<std::size_t>(config.optim.batch_size), config.seed);

        std::ofstream metrics(run_dir / "metrics.csv", std::ios::binary | std::ios::trunc);
        if (!metrics) fail(ErrorKind::Io, "cannot write metrics.csv in " + run_dir.string());
        metrics << csv::join(kMetricsColumns) << '\n';

        const auto started = std::chrono::steady_clock::now();
        auto checkpoint = [&](std::int64_t step) {
            CheckpointRecord rec;
            rec.step = step;
            rec.train = evaluate(model, params, data.train);
            const bool capture = config.capture_every > 0 && step % config.capture_every == 0;
            CapturedStates states;
            rec.test = score_logits(predict(model, params, data.test, capture ? &states : nullptr), data.test);
            if (capture) rec.states = std::move(states);
            rec.params = params;
            rec.optim = state;
            write_checkpoint(run_dir / step_dir_name(step), rec);

            const MetricsRow row{step, rec.train.loss, rec.train.accuracy, rec.test.loss, rec.test.accuracy};
            metrics << metrics_line(row) << '\n';
            metrics.flush();
            if (!metrics) fail(ErrorKind::Io, "write failed for metrics.csv in " + run_dir.string());
            manifest["checkpoints"].push_back(step);
            write_json_file(run_dir / "manifest.json", manifest);
            if (!options.quiet) {
                const double secs =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
                std::cerr << config.name << " step " << step << "  train_acc " << rec.train.accuracy << "  test_acc "
                          << rec.test.accuracy << "  train_loss " << rec.train.loss << "  (" << secs << " s)\n";
            }
            if (options.on_checkpoint) options.on_checkpoint(rec);
        };

        checkpoint(0);
        std::vector<ModPair> batch(static_cast<std::size_t>(config.optim.batch_size));
        for (std::int64_t s = 0; s < config.optim.total_steps; ++s) {
            const auto idx = sampler.next();
            for (std::size_t i = 0; i < idx.size(); ++i) batch[i] = data.train[idx[i]];
            const auto step = loss_and_grads(model, params, batch);
            if (!std::isfinite(step.loss)) {
                fail(ErrorKind::Numerical, "non-finite training loss at update " + std::to_string(s));
            }
            adamw_step(params, step.grads, state, config.optim);
            const std::int64_t done = s + 1;
            if (done % config.checkpoint_every == 0 || done == config.optim.total_steps) checkpoint(done);
        }

        manifest["status"] = "complete";
        manifest["finished_at"] = utc_now();
        write_json_file(run_dir / "manifest.json", manifest);
    } catch (const std::exception& e) {
        manifest["status"] = "aborted";
        manifest["finished_at"] = utc_now();
        manifest["error"] = e.what();
        try {
            write_json_file(run_dir / "manifest.json", manifest);
        } catch (...) {
        }
        throw;
    }
}

}  // namespace groktopo
