#pragma once

// Fourier diagnostics over Z_p using the real orthonormal basis
//   f = 0        : 1/sqrt(p)
//   0 < f < p/2  : sqrt(2/p) cos(2 pi f a / p), sqrt(2/p) sin(2 pi f a / p)
//   f = p/2      : (-1)^a / sqrt(p)   (even p only)
// Frequencies are folded to {0, ..., floor(p/2)}.

#include <string>
#include <vector>

#include "groktopo/models.hpp"

namespace groktopo {

struct RowSpectrum {
    std::vector<double> energies;  // indexed by frequency 0..floor(p/2)
    std::string source;
};

/// Basis vectors as rows of a p x p row-major matrix, paired with their
/// frequency labels.
struct FourierBasis {
    int p = 0;
    std::vector<double> rows;
    std::vector<int> freq;
};
FourierBasis fourier_basis(int p);

/// Energy per frequency of the columns of a p x D token-indexed matrix.
RowSpectrum row_spectrum(std::span<const double> m, int p, std::size_t cols, std::string source = {});
RowSpectrum row_spectrum(const Tensor& m, std::string source = {});

/// The k nonzero frequencies of largest energy (ties: lower frequency),
/// returned in ascending order.
std::vector<int> key_frequencies(const RowSpectrum& spectrum, int k = 5);

/// Spectra of tok_emb * W restricted to each head's columns, for W in
/// {wq, wk, wv} of one transformer block (0-based). Order: q heads, k heads,
/// v heads.
std::vector<RowSpectrum> head_spectra(const ModelParams& params, const TransformerConfig& config, int block);

/// L[a][b][c]: logit of class c on input (a, b), stored row-major.
struct LogitTable {
    int p = 0;
    std::vector<double> values;

    double at(int a, int b, int c) const {
        return values[(static_cast<std::size_t>(a) * static_cast<std::size_t>(p) + static_cast<std::size_t>(b)) *
                          static_cast<std::size_t>(p) +
                      static_cast<std::size_t>(c)];
    }
};

/// Full-table forward pass over all p^2 inputs.
LogitTable logit_table(const ModelConfig& config, const ModelParams& params);

/// Splits L into the part whose (row, column) frequencies both lie in
/// freqs plus {0} and the remainder.
struct FourierSplit {
    LogitTable restricted;
    LogitTable excluded;
};
FourierSplit fourier_split(const LogitTable& table, const std::vector<int>& freqs);

/// Fraction of the p^2 inputs whose argmax class is (a + b) mod p; ties go to
/// the lowest class.
double table_accuracy(const LogitTable& table);

struct FourierReport {
    std::vector<int> key_freqs;
    double restricted_acc = 0;
    double excluded_acc = 0;
    double full_acc = 0;
};

FourierReport restricted_excluded_accuracy(const LogitTable& table, const std::vector<int>& freqs);

/// "3;7;12" style rendering used in analysis CSVs.
std::string join_freqs(const std::vector<int>& freqs);
std::vector<int> parse_freqs(const std::string& text);

}  // namespace groktopo
