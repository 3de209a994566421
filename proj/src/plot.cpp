#include "groktopo/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "groktopo/csv.hpp"
#include "groktopo/error.hpp"
#include "groktopo/stats.hpp"

namespace groktopo::plot {

namespace fs = std::filesystem;

namespace {

constexpr double kWidth = 760;
constexpr double kHeight = 480;
constexpr double kLeft = 70;
constexpr double kRight = 70;
constexpr double kTop = 44;
constexpr double kBottom = 56;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", std::abs(v) < 1e-12 ? 0.0 : v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

const char* color(int i) { return kPalette[static_cast<std::size_t>(i) % std::size(kPalette)]; }

struct Axis {
    double lo = 0;
    double hi = 1;
    double px_lo = 0;
    double px_hi = 1;

    double map(double v) const { return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo); }
};

std::pair<double, double> padded(double lo, double hi) {
    if (!(hi > lo)) {
        const double pad = std::max(std::abs(lo) * 0.05, 0.5);
        return {lo - pad, hi + pad};
    }
    const double pad = (hi - lo) * 0.04;
    return {lo - pad, hi + pad};
}

std::vector<double> ticks(double lo, double hi) {
    const double raw = (hi - lo) / 5;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    }
    std::vector<double> out;
    for (double v = std::ceil(lo / step) * step; v <= hi + step * 1e-9; v += step) out.push_back(v);
    return out;
}

class Svg {
public:
    Svg() {
        out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
             << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
             << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    }
    template <typename T>
    Svg& operator<<(const T& v) {
        out_ << v;
        return *this;
    }
    std::string finish() {
        out_ << "</svg>\n";
        return out_.str();
    }

    void text(double x, double y, const std::string& s, const char* anchor = "middle", const std::string& extra = {}) {
        out_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" text-anchor=\"" << anchor << '"' << extra << '>'
             << escape(s) << "</text>\n";
    }
    void line(double x1, double y1, double x2, double y2, const std::string& attrs) {
        out_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2) << "\" y2=\"" << num(y2)
             << "\" " << attrs << "/>\n";
    }

private:
    std::ostringstream out_;
};

void frame(Svg& svg, const Axis& x, const Axis& y, const std::optional<Axis>& y2, const Figure& f) {
    const double bottom = kHeight - kBottom;
    const double right = kWidth - kRight;
    svg << "<g class=\"axes\" stroke=\"#333\" stroke-width=\"1\">\n";
    svg.line(kLeft, bottom, right, bottom, "");
    svg.line(kLeft, kTop, kLeft, bottom, "");
    if (y2) svg.line(right, kTop, right, bottom, "");
    svg << "</g>\n<g class=\"ticks\" fill=\"#333\">\n";
    for (double t : ticks(x.lo, x.hi)) {
        const double px = x.map(t);
        svg.line(px, bottom, px, bottom + 5, "stroke=\"#333\"");
        svg.text(px, bottom + 18, tick_label(t));
    }
    for (double t : ticks(y.lo, y.hi)) {
        const double py = y.map(t);
        svg.line(kLeft - 5, py, kLeft, py, "stroke=\"#333\"");
        svg.line(kLeft, py, right, py, "stroke=\"#eee\"");
        svg.text(kLeft - 8, py + 4, tick_label(t), "end");
    }
    if (y2) {
        for (double t : ticks(y2->lo, y2->hi)) {
            const double py = y2->map(t);
            svg.line(right, py, right + 5, py, "stroke=\"#333\"");
            svg.text(right + 8, py + 4, tick_label(t), "start");
        }
    }
    svg << "</g>\n";
    svg.text(kWidth / 2, 24, f.title, "middle", " font-size=\"15\"");
    svg.text(kWidth / 2, kHeight - 14, f.x_label);
    svg.text(18, kHeight / 2, f.y_label, "middle", " transform=\"rotate(-90 18 " + num(kHeight / 2) + ")\"");
    if (y2) {
        const double x2 = kWidth - 16;
        svg.text(x2, kHeight / 2, f.y2_label, "middle",
                 " transform=\"rotate(90 " + num(x2) + ' ' + num(kHeight / 2) + ")\"");
    }
}

std::pair<double, double> data_range(const Figure& f, bool right) {
    double lo = INFINITY;
    double hi = -INFINITY;
    for (const auto& c : f.curves) {
        if (c.right_axis != right) continue;
        for (const auto* v : {&c.y, &c.lo, &c.hi}) {
            for (double y : *v) {
                if (std::isfinite(y)) {
                    lo = std::min(lo, y);
                    hi = std::max(hi, y);
                }
            }
        }
    }
    if (!std::isfinite(lo)) return {0, 1};
    return padded(lo, hi);
}

}  // namespace

std::string render(const Figure& f) {
    double xlo = INFINITY;
    double xhi = -INFINITY;
    for (const auto& c : f.curves) {
        for (double x : c.x) {
            xlo = std::min(xlo, x);
            xhi = std::max(xhi, x);
        }
    }
    if (!std::isfinite(xlo)) {
        xlo = 0;
        xhi = 1;
    }
    if (!(xhi > xlo)) xhi = xlo + 1;
    const Axis x{xlo, xhi, kLeft, kWidth - kRight};
    const auto yr = f.y_range ? *f.y_range : data_range(f, false);
    const Axis y{yr.first, yr.second, kHeight - kBottom, kTop};
    std::optional<Axis> y2;
    if (!f.y2_label.empty()) {
        const auto r = f.y2_range ? *f.y2_range : data_range(f, true);
        y2 = Axis{r.first, r.second, kHeight - kBottom, kTop};
    }

    Svg svg;
    frame(svg, x, y, y2, f);
    svg << "<g class=\"bands\">\n";
    for (const auto& c : f.curves) {
        if (c.lo.empty()) continue;
        const Axis& ya = c.right_axis ? *y2 : y;
        std::string d;
        for (std::size_t i = 0; i < c.x.size(); ++i) d += (i ? " L" : "M") + num(x.map(c.x[i])) + ',' + num(ya.map(c.hi[i]));
        for (std::size_t i = c.x.size(); i-- > 0;) d += " L" + num(x.map(c.x[i])) + ',' + num(ya.map(c.lo[i]));
        svg << "<path class=\"band " << c.kind << "\" d=\"" << d << " Z\" fill=\"" << color(c.color)
            << "\" fill-opacity=\"0.18\" stroke=\"none\"/>\n";
    }
    svg << "</g>\n<g class=\"curves\">\n";
    for (const auto& c : f.curves) {
        const Axis& ya = c.right_axis ? *y2 : y;
        std::string d;
        for (std::size_t i = 0; i < c.x.size(); ++i) d += (i ? " L" : "M") + num(x.map(c.x[i])) + ',' + num(ya.map(c.y[i]));
        svg << "<path class=\"curve " << c.kind << "\" d=\"" << d << "\" fill=\"none\" stroke=\"" << color(c.color)
            << "\" stroke-width=\"1.6\"" << (c.dashed ? " stroke-dasharray=\"5,3\"" : "") << "><title>"
            << escape(c.label) << "</title></path>\n";
    }
    svg << "</g>\n<g class=\"legend\">\n";
    double ly = kTop + 12;
    for (const auto& c : f.curves) {
        const double lx = kWidth - kRight - 190;
        svg.line(lx, ly - 4, lx + 22, ly - 4,
                 std::string("stroke=\"") + color(c.color) + "\" stroke-width=\"2\"" +
                     (c.dashed ? " stroke-dasharray=\"5,3\"" : ""));
        svg.text(lx + 28, ly, c.label, "start");
        ly += 16;
    }
    svg << "</g>\n";
    return svg.finish();
}

std::string diagram_svg(const PersistenceDiagram& dg, const std::string& title) {
    double hi = 0;
    for (const auto* bars : {&dg.h0_bars, &dg.h1_bars}) {
        for (const auto& b : *bars) hi = std::max(hi, b.death);
    }
    if (!(hi > 0)) hi = 1;
    hi *= 1.08;
    const Axis x{0, hi, kLeft, kWidth - kRight};
    const Axis y{0, hi, kHeight - kBottom, kTop};
    Figure f;
    f.title = title;
    f.x_label = "birth";
    f.y_label = "death";

    Svg svg;
    frame(svg, x, y, std::nullopt, f);
    svg.line(x.map(0), y.map(0), x.map(hi), y.map(hi), "class=\"diagonal\" stroke=\"#999\" stroke-dasharray=\"4,3\"");
    auto points = [&](const std::vector<Bar>& bars, const char* cls, int c) {
        svg << "<g class=\"" << cls << "\">\n";
        for (const auto& b : bars) {
            svg << "<circle class=\"" << cls << "\" cx=\"" << num(x.map(b.birth)) << "\" cy=\"" << num(y.map(b.death))
                << "\" r=\"3.5\" fill=\"" << color(c) << "\" fill-opacity=\"0.8\"><title>" << (cls[1] == '0' ? "H0" : "H1")
                << " (" << csv::format(b.birth) << ", " << csv::format(b.death) << ")</title></circle>\n";
        }
        svg << "</g>\n";
    };
    points(dg.h0_bars, "h0", 0);
    points(dg.h1_bars, "h1", 1);
    for (int i = 0; i < dg.h0_essential_count; ++i) {
        const double cx = x.map(0);
        const double cy = kTop;
        svg << "<path class=\"h0-essential\" d=\"M" << num(cx - 5) << ',' << num(cy + 8) << " L" << num(cx + 5) << ','
            << num(cy + 8) << " L" << num(cx) << ',' << num(cy) << " Z\" fill=\"" << color(0)
            << "\"><title>H0 (0, inf)</title></path>\n";
    }
    const double lx = kWidth - kRight - 60;
    const double ly = kHeight - kBottom - 36;
    svg << "<g class=\"legend\">\n";
    svg << "<circle cx=\"" << num(lx) << "\" cy=\"" << num(ly) << "\" r=\"3.5\" fill=\"" << color(0) << "\"/>\n";
    svg.text(lx + 10, ly + 4, "H0", "start");
    svg << "<circle cx=\"" << num(lx) << "\" cy=\"" << num(ly + 16) << "\" r=\"3.5\" fill=\"" << color(1) << "\"/>\n";
    svg.text(lx + 10, ly + 20, "H1", "start");
    svg << "</g>\n";
    return svg.finish();
}

Band seed_band(const std::vector<std::vector<double>>& per_seed, const std::vector<double>& x) {
    Band b;
    b.x = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::vector<double> v;
        for (const auto& s : per_seed) v.push_back(s.at(i));
        const auto a = aggregate(v);
        b.mean.push_back(a.mean);
        b.lo.push_back(a.mean - a.sd);
        b.hi.push_back(a.mean + a.sd);
    }
    return b;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    out << text;
    if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

std::string frac_label(double p_frac) { return "P_frac=" + csv::format(p_frac); }

using GroupKey = std::tuple<std::string, int, double>;

std::string group_name(const GroupKey& k) {
    return std::get<0>(k) + "_p" + std::to_string(std::get<1>(k)) + "_a" + csv::format(std::get<2>(k));
}

// Steps shared by every run, with one value vector per run.
struct Stacked {
    std::vector<double> x;
    std::vector<std::vector<double>> values;
};

Stacked stack(const std::vector<std::pair<std::vector<std::int64_t>, std::vector<double>>>& series,
              const std::string& what) {
    Stacked out;
    const auto& steps = series.front().first;
    for (const auto& s : series) {
        if (s.first != steps) fail(ErrorKind::Contract, "plot: runs disagree on the step grid of " + what);
        out.values.push_back(s.second);
    }
    for (auto s : steps) out.x.push_back(static_cast<double>(s));
    return out;
}

void add_band_curve(Figure& f, const Stacked& st, const std::string& label, const std::string& kind, int color,
                    bool dashed, bool right) {
    const auto band = seed_band(st.values, st.x);
    Curve c;
    c.label = label;
    c.kind = kind;
    c.x = band.x;
    c.y = band.mean;
    if (st.values.size() > 1) {
        c.lo = band.lo;
        c.hi = band.hi;
    }
    c.color = color;
    c.dashed = dashed;
    c.right_axis = right;
    f.curves.push_back(std::move(c));
}

}  // namespace

std::vector<fs::path> plot_runs(const std::vector<RunData>& runs, const fs::path& out_dir) {
    std::vector<fs::path> written;
    if (runs.empty()) return written;
    fs::create_directories(out_dir);

    std::map<GroupKey, std::map<double, std::vector<const RunData*>>> groups;
    for (const auto& r : runs) {
        groups[{to_string(r.config.arch), r.config.p, r.config.alpha}][r.config.p_frac].push_back(&r);
    }
    for (auto& [key, by_frac] : groups) {
        for (auto& [frac, members] : by_frac) {
            std::sort(members.begin(), members.end(),
                      [](const RunData* a, const RunData* b) { return a->config.seed < b->config.seed; });
        }
        const std::string name = group_name(key);

        Figure acc;
        acc.title = "accuracy, " + name;
        acc.x_label = "step";
        acc.y_label = "accuracy";
        acc.y_range = std::pair{0.0, 1.0};
        int ci = 0;
        for (const auto& [frac, members] : by_frac) {
            std::vector<std::pair<std::vector<std::int64_t>, std::vector<double>>> train;
            std::vector<std::pair<std::vector<std::int64_t>, std::vector<double>>> test;
            for (const auto* r : members) {
                std::vector<std::int64_t> steps;
                std::vector<double> tr;
                std::vector<double> te;
                for (const auto& m : r->metrics) {
                    steps.push_back(m.step);
                    tr.push_back(m.train_acc);
                    te.push_back(m.test_acc);
                }
                train.emplace_back(steps, tr);
                test.emplace_back(steps, te);
            }
            add_band_curve(acc, stack(train, "metrics.csv"), "train " + frac_label(frac), "train", ci, true, false);
            add_band_curve(acc, stack(test, "metrics.csv"), "test " + frac_label(frac), "test", ci, false, false);
            ++ci;
        }
        written.push_back(out_dir / ("accuracy_" + name + ".svg"));
        write_text(written.back(), render(acc));

        std::vector<std::string> layers;
        for (const auto& [frac, members] : by_frac) {
            for (const auto* r : members) {
                for (const auto& l : layer_labels(r->config)) {
                    if (std::find(layers.begin(), layers.end(), l) == layers.end()) layers.push_back(l);
                }
            }
        }
        for (const auto& metric : kReportMetrics) {
            for (const auto& layer : layers) {
                Figure fig;
                fig.title = metric + " at " + layer + ", " + name;
                fig.x_label = "step";
                fig.y_label = metric;
                fig.y2_label = "test accuracy";
                fig.y2_range = std::pair{0.0, 1.0};
                int color = 0;
                for (const auto& [frac, members] : by_frac) {
                    std::vector<std::pair<std::vector<std::int64_t>, std::vector<double>>> ms;
                    std::vector<std::pair<std::vector<std::int64_t>, std::vector<double>>> accs;
                    for (const auto* r : members) {
                        const auto s = aligned_series(*r, metric, layer);
                        if (!s) continue;
                        ms.emplace_back(s->metric.steps, s->metric.values);
                        accs.emplace_back(s->test_acc.steps, s->test_acc.values);
                    }
                    if (!ms.empty()) {
                        add_band_curve(fig, stack(ms, metric), metric + " " + frac_label(frac), "metric", color, false,
                                       false);
                        add_band_curve(fig, stack(accs, "test accuracy"), "test acc " + frac_label(frac), "test", color,
                                       true, true);
                    }
                    ++color;
                }
                if (fig.curves.empty()) continue;
                written.push_back(out_dir / (metric + "_" + layer + "_" + name + ".svg"));
                write_text(written.back(), render(fig));
            }
        }
    }
    return written;
}

fs::path plot_diagram(const fs::path& diagram_csv, const fs::path& out_dir) {
    const auto dg = read_diagram_csv(diagram_csv);
    fs::create_directories(out_dir);
    const fs::path out = out_dir / (diagram_csv.stem().string() + ".svg");
    write_text(out, diagram_svg(dg, diagram_csv.stem().string()));
    return out;
}

}  // namespace groktopo::plot
