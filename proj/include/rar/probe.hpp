#pragma once

#include <array>
#include <string>
#include <vector>

#include "rar/lm.hpp"
#include "rar/types.hpp"

namespace rar::probe {

struct ProbeMatrix {
    std::vector<std::vector<double>> rows;  // n x d
    std::vector<Style> labels;              // n style tags
    int layer = 0;
    std::string source_digest;
    std::vector<size_t> skipped;  // untagged sample indices
};

// One row per style-tagged sample: the chosen layer's activation at the final
// position of the tokenized prompt + response. Untagged samples are skipped
// and reported.
ProbeMatrix collect(const lm::ToyLM& model, const std::vector<Sample>& samples, int layer);

enum class Projection { Pca, Tsne };

// n x 2 embedding of the rows.
//   pca: top-2 principal components; per-axis sign fixed by making the
//        largest-magnitude loading positive, so results are deterministic.
//   tsne: exact (quadratic) perplexity-based embedding, deterministic for a
//         given seed. Figure parity only; distances are distorted.
std::vector<std::array<double, 2>> project_2d(const ProbeMatrix& pm, Projection method,
                                              uint64_t seed);

// PCA internals exposed for verification: eigenvalues (descending) of the
// centered covariance, top-2 first.
struct PcaResult {
    std::vector<std::array<double, 2>> coords;
    double eigenvalue_1 = 0.0;
    double eigenvalue_2 = 0.0;
    double total_variance = 0.0;  // trace of the covariance
};
PcaResult pca_2d(const std::vector<std::vector<double>>& rows);

// Mean silhouette coefficient over Euclidean distance, in [-1, 1]; higher
// means better separated style clusters. Throws SingleLabelError when only
// one label is present and DegenerateInput when all points coincide.
double separation_score(const std::vector<std::vector<double>>& rows,
                        const std::vector<Style>& labels);
double separation_score(const std::vector<std::array<double, 2>>& coords,
                        const std::vector<Style>& labels);

// CSV with header x,y,label in input order; returns the row count.
size_t emit_plot_data(const std::vector<std::array<double, 2>>& coords,
                      const std::vector<Style>& labels, const std::string& path);

}  // namespace rar::probe
