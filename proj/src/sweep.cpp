#include "groktopo/sweep.hpp"

#include <omp.h>

#include <atomic>
#include <iostream>
#include <mutex>
#include <thread>

#include "groktopo/csv.hpp"
#include "groktopo/error.hpp"
#include "groktopo/trainer.hpp"

namespace groktopo {

namespace fs = std::filesystem;

std::string run_name(const ExperimentConfig& c) {
    return to_string(c.arch) + "-p" + std::to_string(c.p) + "-a" + csv::format(c.alpha) + "-pf" +
           csv::format(c.p_frac) + "-s" + std::to_string(c.seed);
}

namespace {

ExperimentConfig with(ExperimentConfig c, Arch arch, int p, double alpha, double p_frac, std::uint64_t seed) {
    c.arch = arch;
    c.p = p;
    c.alpha = alpha;
    c.p_frac = p_frac;
    c.seed = seed;
    c.name = run_name(c);
    return c;
}

}  // namespace

std::vector<ExperimentConfig> sweep_grid(const std::string& name) {
    std::vector<ExperimentConfig> out;
    if (name == "desk") {
        const auto base = preset("desk");
        for (double pf : {0.0, 1.0}) out.push_back(with(base, Arch::Mlp, base.p, base.alpha, pf, 46));
    } else if (name == "paper") {
        const auto base = preset("paper");
        for (Arch arch : {Arch::Transformer, Arch::Mlp}) {
            for (int p : {113, 149, 197}) {
                for (double alpha : {0.2, 0.25, 0.3}) {
                    for (std::uint64_t s = 46; s <= 50; ++s) out.push_back(with(base, arch, p, alpha, 0.0, s));
                }
            }
        }
    } else if (name == "paper-ablation") {
        const auto base = preset("paper");
        for (double pf : {0.0, 0.01, 0.02, 0.05, 0.1, 0.2}) {
            for (std::uint64_t s = 46; s <= 50; ++s) out.push_back(with(base, Arch::Transformer, 197, 0.3, pf, s));
        }
        for (double pf : {0.0, 0.1, 0.2, 0.5, 1.0}) {
            for (std::uint64_t s = 46; s <= 50; ++s) out.push_back(with(base, Arch::Mlp, 197, 0.2, pf, s));
        }
    } else {
        fail(ErrorKind::Config, "unknown sweep '" + name + "' (expected desk, paper or paper-ablation)");
    }
    return out;
}

namespace {

bool is_complete(const fs::path& dir) {
    if (!fs::exists(dir / "manifest.json")) return false;
    try {
        return read_manifest(dir).value("status", "") == "complete";
    } catch (const Error&) {
        return false;
    }
}

std::vector<ExperimentConfig> apply_overrides(std::vector<ExperimentConfig> configs, const SweepOptions& o) {
    if (o.steps) {
        for (auto& c : configs) c.optim.total_steps = *o.steps;
    }
    if (o.seeds) {
        std::vector<ExperimentConfig> out;
        for (auto c : configs) {
            c.seed = 0;
            c.name.clear();
            bool seen = false;
            for (const auto& prev : out) {
                auto key = prev;
                key.seed = 0;
                key.name.clear();
                seen = seen || key == c;
            }
            if (seen) continue;
            for (auto s : *o.seeds) {
                c.seed = s;
                c.name = run_name(c);
                out.push_back(c);
            }
        }
        configs = std::move(out);
    }
    for (auto& c : configs) {
        c.seeds = {c.seed};
        c.name = run_name(c);
        c.validate();
    }
    return configs;
}

}  // namespace

SweepResult run_sweep(std::vector<ExperimentConfig> configs, const SweepOptions& options) {
    configs = apply_overrides(std::move(configs), options);
    fs::create_directories(options.out_dir);
    SweepResult result;
    std::mutex mu;
    std::atomic<std::size_t> next{0};
    const int workers = std::max(1, std::min<int>(worker_limit(options.workers), static_cast<int>(configs.size())));

    auto work = [&] {
        if (workers > 1) omp_set_num_threads(1);
        for (std::size_t i = next++; i < configs.size(); i = next++) {
            const auto& cfg = configs[i];
            const fs::path dir = options.out_dir / cfg.name;
            try {
                if (options.force || !is_complete(dir)) {
                    TrainOptions t;
                    t.force = true;
                    t.quiet = options.quiet;
                    train(cfg, dir, t);
                }
                if (options.analyze && (options.force || !fs::exists(dir / "analysis.csv"))) {
                    AnalyzeOptions a;
                    a.analysis = cfg.analysis;
                    a.threads = 1;
                    a.quiet = options.quiet;
                    analyze_run(dir, a);
                }
                std::lock_guard lock(mu);
                result.completed.push_back(dir);
                if (!options.quiet) std::cerr << "sweep: finished " << cfg.name << '\n';
            } catch (const std::exception& e) {
                std::lock_guard lock(mu);
                result.failed.emplace_back(dir, e.what());
                std::cerr << "sweep: " << cfg.name << " failed: " << e.what() << '\n';
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    std::sort(result.completed.begin(), result.completed.end());
    std::sort(result.failed.begin(), result.failed.end());
    return result;
}

}  // namespace groktopo
