#include "rar/probe.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <sstream>

#include "rar/trace.hpp"

namespace rar::probe {

ProbeMatrix collect(const lm::ToyLM& model, const std::vector<Sample>& samples, int layer) {
    if (layer < 0 || layer >= model.dims().n_layers)
        throw std::out_of_range("layer index out of range: " + std::to_string(layer));

    ProbeMatrix pm;
    pm.layer = layer;
    std::string digest_input;
    for (size_t i = 0; i < samples.size(); ++i) {
        const Sample& s = samples[i];
        if (!s.style) {
            pm.skipped.push_back(i);
            continue;
        }
        std::string text = s.query + "\n" + trace::assemble(s.reasoning, s.answer);
        std::vector<lm::TokenId> tokens = {lm::Vocab::kBos};
        auto ids = model.vocab().encode(text, /*strict=*/false);
        tokens.insert(tokens.end(), ids.begin(), ids.end());
        size_t max_len = size_t(model.dims().max_seq_len);
        if (tokens.size() > max_len)  // keep the tail: the final position is the summary
            tokens = std::vector<lm::TokenId>(tokens.end() - long(max_len), tokens.end());
        pm.rows.push_back(model.hidden_states(tokens, layer));
        pm.labels.push_back(*s.style);
        digest_input += text;
        digest_input += '\x1e';
    }
    pm.source_digest = sha256_hex(digest_input);
    return pm;
}

namespace {

// Jacobi eigensolver for a symmetric matrix; returns eigenvalues descending
// with matching eigenvectors as columns of v.
void jacobi_eigen(std::vector<double>& a, size_t d, std::vector<double>& eigenvalues,
                  std::vector<double>& v) {
    v.assign(d * d, 0.0);
    for (size_t i = 0; i < d; ++i) v[i * d + i] = 1.0;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (size_t p = 0; p < d; ++p)
            for (size_t q = p + 1; q < d; ++q) off += a[p * d + q] * a[p * d + q];
        if (off < 1e-24) break;
        for (size_t p = 0; p < d; ++p) {
            for (size_t q = p + 1; q < d; ++q) {
                double apq = a[p * d + q];
                if (std::abs(apq) < 1e-300) continue;
                double app = a[p * d + p], aqq = a[q * d + q];
                double theta = (aqq - app) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (size_t k = 0; k < d; ++k) {
                    double akp = a[k * d + p], akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for (size_t k = 0; k < d; ++k) {
                    double apk = a[p * d + k], aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
                for (size_t k = 0; k < d; ++k) {
                    double vkp = v[k * d + p], vkq = v[k * d + q];
                    v[k * d + p] = c * vkp - s * vkq;
                    v[k * d + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    eigenvalues.resize(d);
    for (size_t i = 0; i < d; ++i) eigenvalues[i] = a[i * d + i];
}

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double total = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double diff = a[i] - b[i];
        total += diff * diff;
    }
    return total;
}

bool all_rows_equal(const std::vector<std::vector<double>>& rows) {
    for (size_t i = 1; i < rows.size(); ++i) {
        if (rows[i] != rows[0]) return false;
    }
    return true;
}

std::vector<std::array<double, 2>> tsne_2d(const std::vector<std::vector<double>>& rows,
                                           uint64_t seed) {
    const size_t n = rows.size();
    const double perplexity = std::min(30.0, double(n - 1) / 3.0);

    std::vector<double> d2(n * n, 0.0);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) d2[i * n + j] = d2[j * n + i] = sq_dist(rows[i], rows[j]);

    // per-point bandwidth via bisection on the conditional entropy
    std::vector<double> p(n * n, 0.0);
    const double log_perp = std::log(perplexity);
    for (size_t i = 0; i < n; ++i) {
        double beta = 1.0, beta_lo = 0.0, beta_hi = std::numeric_limits<double>::infinity();
        for (int it = 0; it < 64; ++it) {
            double sum = 0.0, dot = 0.0;
            for (size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                double pij = std::exp(-beta * d2[i * n + j]);
                sum += pij;
                dot += beta * d2[i * n + j] * pij;
            }
            double entropy = sum > 0 ? std::log(sum) + dot / sum : 0.0;
            double diff = entropy - log_perp;
            if (std::abs(diff) < 1e-7) break;
            if (diff > 0) {
                beta_lo = beta;
                beta = std::isinf(beta_hi) ? beta * 2 : (beta + beta_hi) / 2;
            } else {
                beta_hi = beta;
                beta = (beta + beta_lo) / 2;
            }
        }
        double sum = 0.0;
        for (size_t j = 0; j < n; ++j)
            if (j != i) sum += std::exp(-beta * d2[i * n + j]);
        for (size_t j = 0; j < n; ++j)
            if (j != i && sum > 0) p[i * n + j] = std::exp(-beta * d2[i * n + j]) / sum;
    }
    // symmetrize
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            double v = (p[i * n + j] + p[j * n + i]) / (2.0 * double(n));
            p[i * n + j] = std::max(v, 1e-12);
        }

    // deterministic start: a scaled principal-component layout plus seeded
    // jitter; keeps runs reproducible and far from the runaway regime
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> jitter(0.0, 1e-3);
    std::vector<std::array<double, 2>> y(n), dy(n, {0.0, 0.0}), gains(n, {1.0, 1.0});
    {
        PcaResult pca = pca_2d(rows);
        double max_abs = 1e-12;
        for (const auto& c : pca.coords)
            max_abs = std::max({max_abs, std::abs(c[0]), std::abs(c[1])});
        for (size_t i = 0; i < n; ++i) {
            y[i][0] = pca.coords[i][0] / max_abs * 1e-2 + jitter(rng);
            y[i][1] = pca.coords[i][1] / max_abs * 1e-2 + jitter(rng);
        }
    }

    const int iters = 500;
    const double eta = 100.0;
    for (int it = 0; it < iters; ++it) {
        double exaggeration = it < 100 ? 4.0 : 1.0;
        double momentum = it < 200 ? 0.5 : 0.8;

        std::vector<double> q(n * n, 0.0);
        double q_sum = 0.0;
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i + 1; j < n; ++j) {
                double dx = y[i][0] - y[j][0], dyv = y[i][1] - y[j][1];
                double num = 1.0 / (1.0 + dx * dx + dyv * dyv);
                q[i * n + j] = q[j * n + i] = num;
                q_sum += 2.0 * num;
            }

        for (size_t i = 0; i < n; ++i) {
            double gx = 0.0, gy = 0.0;
            for (size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                double num = q[i * n + j];
                double qij = std::max(num / q_sum, 1e-12);
                double mult = (exaggeration * p[i * n + j] - qij) * num;
                gx += 4.0 * mult * (y[i][0] - y[j][0]);
                gy += 4.0 * mult * (y[i][1] - y[j][1]);
            }
            for (int k = 0; k < 2; ++k) {
                double g = k == 0 ? gx : gy;
                gains[i][k] = (g > 0) == (dy[i][k] > 0) ? gains[i][k] * 0.8 : gains[i][k] + 0.2;
                gains[i][k] = std::clamp(gains[i][k], 0.01, 5.0);
                dy[i][k] = momentum * dy[i][k] - eta * gains[i][k] * g;
                // cap the step; tiny datasets otherwise feed a velocity runaway
                dy[i][k] = std::clamp(dy[i][k], -10.0, 10.0);
                y[i][k] += dy[i][k];
            }
        }
        // recentre
        double mx = 0.0, my = 0.0;
        for (const auto& pt : y) {
            mx += pt[0];
            my += pt[1];
        }
        mx /= double(n);
        my /= double(n);
        for (auto& pt : y) {
            pt[0] -= mx;
            pt[1] -= my;
        }
    }
    return y;
}

}  // namespace

PcaResult pca_2d(const std::vector<std::vector<double>>& rows) {
    const size_t n = rows.size();
    if (n < 3) throw InvalidInput("pca needs at least 3 rows");
    if (all_rows_equal(rows)) throw DegenerateInput("all rows identical");
    const size_t d = rows[0].size();
    if (d < 2) throw InvalidInput("pca needs at least 2 feature dimensions");

    std::vector<double> mean(d, 0.0);
    for (const auto& row : rows)
        for (size_t j = 0; j < d; ++j) mean[j] += row[j];
    for (double& m : mean) m /= double(n);

    // sample covariance, 1/(n-1)
    std::vector<double> cov(d * d, 0.0);
    for (const auto& row : rows) {
        for (size_t a = 0; a < d; ++a) {
            double da = row[a] - mean[a];
            for (size_t b = a; b < d; ++b) cov[a * d + b] += da * (row[b] - mean[b]);
        }
    }
    for (size_t a = 0; a < d; ++a)
        for (size_t b = a; b < d; ++b) {
            cov[a * d + b] /= double(n - 1);
            cov[b * d + a] = cov[a * d + b];
        }

    PcaResult result;
    for (size_t j = 0; j < d; ++j) result.total_variance += cov[j * d + j];

    std::vector<double> eigenvalues, vectors;
    jacobi_eigen(cov, d, eigenvalues, vectors);

    std::vector<size_t> index(d);
    for (size_t i = 0; i < d; ++i) index[i] = i;
    std::sort(index.begin(), index.end(),
              [&](size_t a, size_t b) { return eigenvalues[a] > eigenvalues[b]; });

    std::array<std::vector<double>, 2> axes;
    for (int k = 0; k < 2; ++k) {
        axes[size_t(k)].resize(d);
        for (size_t j = 0; j < d; ++j) axes[size_t(k)][j] = vectors[j * d + index[size_t(k)]];
        // sign convention: the largest-magnitude loading is positive
        size_t arg = 0;
        for (size_t j = 1; j < d; ++j)
            if (std::abs(axes[size_t(k)][j]) > std::abs(axes[size_t(k)][arg])) arg = j;
        if (axes[size_t(k)][arg] < 0)
            for (double& x : axes[size_t(k)]) x = -x;
    }
    result.eigenvalue_1 = eigenvalues[index[0]];
    result.eigenvalue_2 = eigenvalues[index[1]];

    result.coords.resize(n);
    for (size_t i = 0; i < n; ++i) {
        for (int k = 0; k < 2; ++k) {
            double dot = 0.0;
            for (size_t j = 0; j < d; ++j) dot += (rows[i][j] - mean[j]) * axes[size_t(k)][j];
            result.coords[i][size_t(k)] = dot;
        }
    }
    return result;
}

std::vector<std::array<double, 2>> project_2d(const ProbeMatrix& pm, Projection method,
                                              uint64_t seed) {
    if (pm.rows.size() < 3) throw InvalidInput("projection needs at least 3 rows");
    if (all_rows_equal(pm.rows)) throw DegenerateInput("all rows identical");
    if (method == Projection::Pca) return pca_2d(pm.rows).coords;
    return tsne_2d(pm.rows, seed);
}

namespace {

template <typename Row>
double silhouette(const std::vector<Row>& points, const std::vector<Style>& labels) {
    const size_t n = points.size();
    if (n != labels.size()) throw InvalidInput("points/labels size mismatch");
    if (n < 2) throw InvalidInput("need at least 2 points");

    size_t n_fact = 0;
    for (Style s : labels) n_fact += s == Style::Fact ? 1 : 0;
    if (n_fact == 0 || n_fact == n) throw SingleLabelError("both style labels must be present");

    auto dist = [&](size_t i, size_t j) {
        double total = 0.0;
        for (size_t k = 0; k < points[i].size(); ++k) {
            double diff = points[i][k] - points[j][k];
            total += diff * diff;
        }
        return std::sqrt(total);
    };

    double max_dist = 0.0;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) max_dist = std::max(max_dist, dist(i, j));
    if (max_dist == 0.0) throw DegenerateInput("all points identical; no cluster structure");

    double total = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double same_sum = 0.0, other_sum = 0.0;
        size_t same_count = 0, other_count = 0;
        for (size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            if (labels[j] == labels[i]) {
                same_sum += dist(i, j);
                ++same_count;
            } else {
                other_sum += dist(i, j);
                ++other_count;
            }
        }
        if (same_count == 0) continue;  // singleton cluster scores 0
        double a = same_sum / double(same_count);
        double b = other_sum / double(other_count);
        double denom = std::max(a, b);
        if (denom > 0) total += (b - a) / denom;
    }
    return total / double(n);
}

}  // namespace

double separation_score(const std::vector<std::vector<double>>& rows,
                        const std::vector<Style>& labels) {
    return silhouette(rows, labels);
}

double separation_score(const std::vector<std::array<double, 2>>& coords,
                        const std::vector<Style>& labels) {
    return silhouette(coords, labels);
}

size_t emit_plot_data(const std::vector<std::array<double, 2>>& coords,
                      const std::vector<Style>& labels, const std::string& path) {
    if (coords.size() != labels.size()) throw InvalidInput("coords/labels size mismatch");
    std::ostringstream out;
    out.precision(17);
    out << "x,y,label\n";
    for (size_t i = 0; i < coords.size(); ++i)
        out << coords[i][0] << ',' << coords[i][1] << ',' << to_string(labels[i]) << '\n';
    write_file(path, out.str());
    return coords.size();
}

}  // namespace rar::probe
