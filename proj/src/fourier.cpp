#include "groktopo/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "groktopo/csv.hpp"
#include "groktopo/data.hpp"
#include "groktopo/error.hpp"

namespace groktopo {

FourierBasis fourier_basis(int p) {
    if (p < 2) fail(ErrorKind::Config, "fourier_basis: p must be >= 2");
    FourierBasis b;
    b.p = p;
    const auto n = static_cast<std::size_t>(p);
    b.rows.reserve(n * n);
    auto push = [&](int f, auto fn) {
        for (int a = 0; a < p; ++a) b.rows.push_back(fn(a));
        b.freq.push_back(f);
    };
    const double pd = static_cast<double>(p);
    push(0, [&](int) { return 1.0 / std::sqrt(pd); });
    for (int f = 1; 2 * f < p; ++f) {
        const double s = std::sqrt(2.0 / pd);
        // f*a is reduced mod p first so the angle stays in [0, 2 pi).
        auto angle = [&](int a) { return 2.0 * std::numbers::pi * static_cast<double>((static_cast<long>(f) * a) % p) / pd; };
        push(f, [&](int a) { return s * std::cos(angle(a)); });
        push(f, [&](int a) { return s * std::sin(angle(a)); });
    }
    if (p % 2 == 0) push(p / 2, [&](int a) { return (a % 2 ? -1.0 : 1.0) / std::sqrt(pd); });
    return b;
}

RowSpectrum row_spectrum(std::span<const double> m, int p, std::size_t cols, std::string source) {
    const auto n = static_cast<std::size_t>(p);
    if (m.size() != n * cols) {
        fail(ErrorKind::Shape, "row_spectrum: expected " + std::to_string(p) + " token rows");
    }
    const auto basis = fourier_basis(p);
    RowSpectrum out;
    out.source = std::move(source);
    out.energies.assign(n / 2 + 1, 0.0);
    std::vector<double> coef(cols);
    for (std::size_t v = 0; v < n; ++v) {
        std::fill(coef.begin(), coef.end(), 0.0);
        const double* bv = basis.rows.data() + v * n;
        for (std::size_t a = 0; a < n; ++a) {
            const double* row = m.data() + a * cols;
            for (std::size_t c = 0; c < cols; ++c) coef[c] += bv[a] * row[c];
        }
        double e = 0.0;
        for (double x : coef) e += x * x;
        out.energies[static_cast<std::size_t>(basis.freq[v])] += e;
    }
    return out;
}

RowSpectrum row_spectrum(const Tensor& m, std::string source) {
    if (m.rank() != 2) fail(ErrorKind::Shape, "row_spectrum: expected a matrix, got " + shape_str(m.shape()));
    const std::vector<double> x(m.values().begin(), m.values().end());
    return row_spectrum(x, m.dim(0), m.cols(), std::move(source));
}

std::vector<int> key_frequencies(const RowSpectrum& spectrum, int k) {
    if (k < 1) fail(ErrorKind::Config, "key_frequencies: k must be >= 1");
    std::vector<int> f(spectrum.energies.size() > 0 ? spectrum.energies.size() - 1 : 0);
    std::iota(f.begin(), f.end(), 1);
    std::stable_sort(f.begin(), f.end(), [&](int x, int y) {
        return spectrum.energies[static_cast<std::size_t>(x)] > spectrum.energies[static_cast<std::size_t>(y)];
    });
    f.resize(std::min(f.size(), static_cast<std::size_t>(k)));
    std::sort(f.begin(), f.end());
    return f;
}

std::vector<RowSpectrum> head_spectra(const ModelParams& params, const TransformerConfig& config, int block) {
    const Tensor& emb = params.at("tok_emb");
    const auto p = static_cast<std::size_t>(config.p);
    const auto d = static_cast<std::size_t>(config.d_model);
    const auto dh = static_cast<std::size_t>(config.d_head);
    std::vector<RowSpectrum> out;
    for (const char* which : {"q", "k", "v"}) {
        const std::string name = "blocks." + std::to_string(block) + ".attn.w" + which;
        const Tensor& w = params.at(name);
        for (int h = 0; h < config.n_heads; ++h) {
            std::vector<double> m(p * dh, 0.0);
            for (std::size_t a = 0; a < p; ++a) {
                for (std::size_t i = 0; i < d; ++i) {
                    const double e = emb[a * d + i];
                    for (std::size_t j = 0; j < dh; ++j) m[a * dh + j] += e * w[i * d + static_cast<std::size_t>(h) * dh + j];
                }
            }
            out.push_back(row_spectrum(m, config.p, dh, name + ".head" + std::to_string(h)));
        }
    }
    return out;
}

LogitTable logit_table(const ModelConfig& config, const ModelParams& params) {
    const int p = modulus(config);
    const auto pairs = build_pairs(p);
    const Tensor logits = predict(config, params, pairs);
    LogitTable t;
    t.p = p;
    t.values.assign(logits.values().begin(), logits.values().end());
    return t;
}

FourierSplit fourier_split(const LogitTable& table, const std::vector<int>& freqs) {
    const int p = table.p;
    const auto n = static_cast<std::size_t>(p);
    if (table.values.size() != n * n * n) fail(ErrorKind::Shape, "logit table must hold p^3 values");
    for (int f : freqs) {
        if (f < 1 || 2 * f > p) {
            fail(ErrorKind::Config, "key frequency " + std::to_string(f) + " outside 1.." + std::to_string(p / 2));
        }
    }
    const auto basis = fourier_basis(p);
    // Rows of the basis whose frequency is kept.
    std::vector<const double*> kept;
    for (std::size_t v = 0; v < n; ++v) {
        const int f = basis.freq[v];
        if (f == 0 || std::find(freqs.begin(), freqs.end(), f) != freqs.end()) kept.push_back(basis.rows.data() + v * n);
    }
    const std::size_t k = kept.size();

    FourierSplit out;
    out.restricted.p = p;
    out.restricted.values.assign(table.values.size(), 0.0);
    const auto classes = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel
    {
        std::vector<double> sb(n * k);   // S * B^T
        std::vector<double> core(k * k);  // B * S * B^T
        std::vector<double> tmp(n * k);  // B^T * core
#pragma omp for schedule(static)
        for (std::ptrdiff_t cc = 0; cc < classes; ++cc) {
            const auto c = static_cast<std::size_t>(cc);
            auto s = [&](std::size_t a, std::size_t b) { return table.values[(a * n + b) * n + c]; };
            for (std::size_t a = 0; a < n; ++a) {
                for (std::size_t j = 0; j < k; ++j) {
                    double acc = 0.0;
                    for (std::size_t b = 0; b < n; ++b) acc += s(a, b) * kept[j][b];
                    sb[a * k + j] = acc;
                }
            }
            for (std::size_t i = 0; i < k; ++i) {
                for (std::size_t j = 0; j < k; ++j) {
                    double acc = 0.0;
                    for (std::size_t a = 0; a < n; ++a) acc += kept[i][a] * sb[a * k + j];
                    core[i * k + j] = acc;
                }
            }
            for (std::size_t a = 0; a < n; ++a) {
                for (std::size_t j = 0; j < k; ++j) {
                    double acc = 0.0;
                    for (std::size_t i = 0; i < k; ++i) acc += kept[i][a] * core[i * k + j];
                    tmp[a * k + j] = acc;
                }
            }
            for (std::size_t a = 0; a < n; ++a) {
                for (std::size_t b = 0; b < n; ++b) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < k; ++j) acc += tmp[a * k + j] * kept[j][b];
                    out.restricted.values[(a * n + b) * n + c] = acc;
                }
            }
        }
    }
    out.excluded.p = p;
    out.excluded.values.resize(table.values.size());
    for (std::size_t i = 0; i < table.values.size(); ++i) out.excluded.values[i] = table.values[i] - out.restricted.values[i];
    return out;
}

double table_accuracy(const LogitTable& table) {
    const auto n = static_cast<std::size_t>(table.p);
    std::size_t correct = 0;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            const double* row = table.values.data() + (a * n + b) * n;
            const auto best = static_cast<std::size_t>(std::max_element(row, row + n) - row);
            correct += best == (a + b) % n ? 1 : 0;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(n * n);
}

FourierReport restricted_excluded_accuracy(const LogitTable& table, const std::vector<int>& freqs) {
    const auto split = fourier_split(table, freqs);
    FourierReport r;
    r.key_freqs = freqs;
    std::sort(r.key_freqs.begin(), r.key_freqs.end());
    r.full_acc = table_accuracy(table);
    r.restricted_acc = table_accuracy(split.restricted);
    r.excluded_acc = table_accuracy(split.excluded);
    return r;
}

std::string join_freqs(const std::vector<int>& freqs) {
    std::string s;
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        if (i) s += ';';
        s += std::to_string(freqs[i]);
    }
    return s;
}

std::vector<int> parse_freqs(const std::string& text) {
    std::vector<int> out;
    if (text.empty()) return out;
    for (const auto& part : csv::split(text, ';')) out.push_back(std::stoi(part));
    return out;
}

}  // namespace groktopo
