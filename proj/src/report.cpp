#include "groktopo/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <tuple>

#include "groktopo/csv.hpp"
#include "groktopo/error.hpp"

namespace groktopo {

namespace fs = std::filesystem;

RunData load_run(const fs::path& run_dir, bool require_analysis) {
    RunData run;
    run.dir = run_dir;
    run.config = run_config(run_dir);
    const fs::path metrics = run_dir / "metrics.csv";
    if (!fs::exists(metrics)) fail(ErrorKind::Io, "missing " + metrics.string());
    run.metrics = read_metrics(metrics);
    const fs::path analysis = run_dir / "analysis.csv";
    if (fs::exists(analysis)) {
        run.analysis = read_analysis_csv(analysis);
    } else if (require_analysis) {
        fail(ErrorKind::Io, "run " + run_dir.string() + " has no analysis.csv (run `groktopo analyze` first)");
    }
    return run;
}

std::optional<double> metric_value(const AnalysisRow& row, const std::string& metric) {
    if (metric == "h0_max") return row.ph ? std::optional(row.ph->h0_max) : std::nullopt;
    if (metric == "h0_total") return row.ph ? std::optional(row.ph->h0_total) : std::nullopt;
    if (metric == "h1_max") return row.ph ? std::optional(row.ph->h1_max) : std::nullopt;
    if (metric == "h1_total") return row.ph ? std::optional(row.ph->h1_total) : std::nullopt;
    if (metric == "lid_mean") return row.lid_mean;
    if (metric == "lid_std") return row.lid_std;
    if (metric == "restricted_acc") return row.restricted_acc;
    if (metric == "excluded_acc") return row.excluded_acc;
    fail(ErrorKind::Config, "unknown metric '" + metric + "'");
}

std::optional<AlignedSeries> aligned_series(const RunData& run, const std::string& metric, const std::string& layer) {
    std::map<std::int64_t, double> acc;
    for (const auto& m : run.metrics) acc[m.step] = m.test_acc;
    AlignedSeries out;
    out.metric.name = metric + "@" + layer;
    out.metric.run_id = run.id();
    out.test_acc.name = "test_acc";
    out.test_acc.run_id = run.id();
    for (const auto& row : run.analysis) {
        if (row.layer != layer) continue;
        const auto v = metric_value(row, metric);
        if (!v) continue;
        const auto it = acc.find(row.step);
        if (it == acc.end()) {
            fail(ErrorKind::Contract, "run " + run.id() + ": analyzed step " + std::to_string(row.step) +
                                          " has no metrics.csv row");
        }
        out.metric.steps.push_back(row.step);
        out.metric.values.push_back(*v);
        out.test_acc.steps.push_back(row.step);
        out.test_acc.values.push_back(it->second);
    }
    if (out.metric.steps.empty()) return std::nullopt;
    return out;
}

namespace {

// Longest leading stretch of uniformly spaced steps.
std::size_t uniform_prefix(const std::vector<std::int64_t>& steps) {
    if (steps.size() < 3) return steps.size();
    const auto spacing = steps[1] - steps[0];
    std::size_t n = 2;
    while (n < steps.size() && steps[n] - steps[n - 1] == spacing) ++n;
    return n;
}

MetricSeries head(const MetricSeries& s, std::size_t n) {
    MetricSeries out = s;
    out.steps.resize(n);
    out.values.resize(n);
    return out;
}

struct PerSeed {
    double rho = std::numeric_limits<double>::quiet_NaN();
    std::optional<std::int64_t> lag;
};

PerSeed correlate(const AlignedSeries& s) {
    PerSeed out;
    const std::size_t n = s.metric.values.size();
    if (n < 3) return out;
    try {
        out.rho = spearman(s.metric, s.test_acc).rho;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::Numerical) throw;
    }
    const std::size_t m = uniform_prefix(s.metric.steps);
    if (m >= 4) {
        const int maxlag = static_cast<int>(std::min<std::size_t>(20, m - 3));
        try {
            out.lag = ccf_first_diff(head(s.test_acc, m), head(s.metric, m), maxlag).best_lag_steps;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Numerical) throw;
        }
    }
    return out;
}

using GroupKey = std::tuple<std::string, int, double, double>;  // arch, p, alpha, p_frac

std::vector<std::int64_t> analyzed_steps(const RunData& run) {
    std::set<std::int64_t> s;
    for (const auto& r : run.analysis) s.insert(r.step);
    return {s.begin(), s.end()};
}

std::vector<std::string> layers_in_order(const std::vector<const RunData*>& runs) {
    std::vector<std::string> out;
    for (const auto* run : runs) {
        for (const auto& l : layer_labels(run->config)) {
            if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
        }
    }
    return out;
}

std::string join_doubles(const std::vector<double>& v) {
    std::vector<std::string> parts;
    for (double x : v) parts.push_back(csv::format(x));
    return csv::join(parts, ';');
}

}  // namespace

std::vector<ReportRow> build_report(const std::vector<RunData>& runs) {
    if (runs.empty()) fail(ErrorKind::Config, "stats: no runs given");
    std::map<GroupKey, std::vector<const RunData*>> groups;
    for (const auto& run : runs) {
        const auto& c = run.config;
        groups[{to_string(c.arch), c.p, c.alpha, c.p_frac}].push_back(&run);
    }

    std::vector<ReportRow> rows;
    for (auto& [key, members] : groups) {
        std::sort(members.begin(), members.end(),
                  [](const RunData* a, const RunData* b) { return a->config.seed < b->config.seed; });
        const auto grid = analyzed_steps(*members.front());
        std::vector<std::string> offenders;
        for (const auto* run : members) {
            if (analyzed_steps(*run) != grid) offenders.push_back(run->id());
        }
        if (!offenders.empty()) {
            std::string names = members.front()->id() + " vs";
            for (const auto& o : offenders) names += " " + o;
            fail(ErrorKind::Contract, "stats: checkpoint grids differ within a group: " + names);
        }

        for (const auto& metric : kReportMetrics) {
            for (const auto& layer : layers_in_order(members)) {
                ReportRow row;
                row.metric = metric;
                row.layer = layer;
                std::tie(row.arch, row.p, row.alpha, row.p_frac) = key;
                std::vector<double> defined;
                std::vector<std::int64_t> lags;
                for (const auto* run : members) {
                    const auto series = aligned_series(*run, metric, layer);
                    if (!series) continue;
                    row.runs.push_back(run->id());
                    row.n_checkpoints = series->metric.values.size();
                    const auto r = correlate(*series);
                    row.rho_per_seed.push_back(r.rho);
                    if (!std::isnan(r.rho)) defined.push_back(r.rho);
                    if (r.lag) lags.push_back(*r.lag);
                }
                if (row.runs.empty()) continue;
                if (defined.empty()) {
                    row.rho_mean = std::numeric_limits<double>::quiet_NaN();
                } else {
                    const auto a = aggregate(defined);
                    row.rho_mean = a.mean;
                    row.rho_sd = a.sd;
                    row.significant =
                        row.n_checkpoints >= 3 && correlation_p_value(row.rho_mean, row.n_checkpoints) < 0.05;
                }
                if (!lags.empty()) {
                    std::sort(lags.begin(), lags.end());
                    row.best_lag_steps = lags[(lags.size() - 1) / 2];
                }
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

void write_report_csv(const fs::path& path, const std::vector<ReportRow>& rows) {
    csv::Table t;
    t.header = kReportColumns;
    for (const auto& r : rows) {
        t.rows.push_back({r.metric, r.layer, csv::format(r.p_frac), csv::format(r.rho_mean), csv::format(r.rho_sd),
                          r.significant ? "true" : "false", r.best_lag_steps ? std::to_string(*r.best_lag_steps) : "",
                          r.arch, std::to_string(r.p), csv::format(r.alpha), std::to_string(r.n_checkpoints),
                          std::to_string(r.rho_per_seed.size()), join_doubles(r.rho_per_seed)});
    }
    csv::write(path, t);
}

std::vector<ReportRow> read_report_csv(const fs::path& path) {
    const auto t = csv::read(path);
    std::vector<std::size_t> c;
    for (const auto& name : kReportColumns) c.push_back(t.column(name));
    std::vector<ReportRow> out;
    for (const auto& f : t.rows) {
        ReportRow r;
        r.metric = f[c[0]];
        r.layer = f[c[1]];
        r.p_frac = csv::parse(f[c[2]]);
        r.rho_mean = csv::parse(f[c[3]]);
        r.rho_sd = csv::parse(f[c[4]]);
        r.significant = f[c[5]] == "true";
        if (!f[c[6]].empty()) r.best_lag_steps = std::stoll(f[c[6]]);
        r.arch = f[c[7]];
        r.p = std::stoi(f[c[8]]);
        r.alpha = csv::parse(f[c[9]]);
        r.n_checkpoints = std::stoul(f[c[10]]);
        if (!f[c[12]].empty()) {
            for (const auto& part : csv::split(f[c[12]], ';')) r.rho_per_seed.push_back(csv::parse(part));
        }
        out.push_back(std::move(r));
    }
    return out;
}

namespace {

bool wildcard_match(const std::string& pattern, const std::string& text) {
    std::size_t p = 0;
    std::size_t t = 0;
    std::size_t star = std::string::npos;
    std::size_t mark = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
            ++p;
            ++t;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = t;
        } else if (star != std::string::npos) {
            p = star + 1;
            t = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

}  // namespace

std::vector<fs::path> expand_run_pattern(const std::string& pattern) {
    const fs::path path(pattern);
    const std::string leaf = path.filename().string();
    if (leaf.find_first_of("*?") == std::string::npos) {
        if (!fs::is_directory(path)) fail(ErrorKind::Io, "not a run directory: " + pattern);
        return {path};
    }
    const fs::path parent = path.has_parent_path() ? path.parent_path() : fs::path(".");
    if (!fs::is_directory(parent)) fail(ErrorKind::Io, "no such directory: " + parent.string());
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(parent)) {
        if (entry.is_directory() && fs::exists(entry.path() / "manifest.json") &&
            wildcard_match(leaf, entry.path().filename().string())) {
            out.push_back(entry.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace groktopo
