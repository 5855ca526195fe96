#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "rar/probe.hpp"

using namespace rar;
using namespace rar::probe;

namespace {

std::vector<std::vector<double>> gaussian_blobs(std::mt19937_64& rng, size_t per_side, size_t dim,
                                                double distance, double sigma,
                                                std::vector<Style>* labels) {
    std::normal_distribution<double> noise(0.0, sigma);
    std::vector<std::vector<double>> rows;
    for (size_t i = 0; i < 2 * per_side; ++i) {
        bool fact = i < per_side;
        std::vector<double> row(dim);
        for (size_t j = 0; j < dim; ++j) row[j] = noise(rng);
        row[0] += fact ? 0.0 : distance;
        rows.push_back(std::move(row));
        labels->push_back(fact ? Style::Fact : Style::Know);
    }
    return rows;
}

}  // namespace

TEST_CASE("collect: one row per tagged sample, untagged skipped, deterministic") {
    lm::ToyLM model = lm::ToyLM::randomized(lm::Vocab::ascii(), {2, 8, 128}, 5, 0.3);
    std::vector<Sample> samples;
    for (int i = 0; i < 4; ++i) {
        Sample s;
        s.id = "s" + std::to_string(i);
        s.role_id = "r";
        s.query = "q" + std::to_string(i);
        s.reasoning = "think";
        s.answer = "answer " + std::to_string(i);
        if (i != 2) s.style = i % 2 == 0 ? Style::Fact : Style::Know;
        samples.push_back(std::move(s));
    }
    ProbeMatrix pm = collect(model, samples, 1);
    CHECK(pm.rows.size() == 3);
    CHECK(pm.labels.size() == 3);
    REQUIRE(pm.skipped.size() == 1);
    CHECK(pm.skipped[0] == 2);

    // identical sample twice -> identical rows
    std::vector<Sample> twice = {samples[0], samples[0]};
    ProbeMatrix pm2 = collect(model, twice, 1);
    CHECK(pm2.rows[0] == pm2.rows[1]);

    CHECK_THROWS_AS(collect(model, samples, 9), std::out_of_range);
}

TEST_CASE("pca on exactly planar data preserves pairwise distances") {
    // points on a tilted 2d plane embedded in 6d
    std::mt19937_64 rng(11);
    std::normal_distribution<double> coef(0.0, 1.0);
    std::vector<double> u(6), v(6);
    for (size_t j = 0; j < 6; ++j) {
        u[j] = coef(rng);
        v[j] = coef(rng);
    }
    std::vector<std::vector<double>> rows;
    std::vector<std::pair<double, double>> plane;
    for (int i = 0; i < 40; ++i) {
        double a = coef(rng), b = coef(rng);
        plane.emplace_back(a, b);
        std::vector<double> row(6);
        for (size_t j = 0; j < 6; ++j) row[j] = a * u[j] + b * v[j];
        rows.push_back(std::move(row));
    }
    PcaResult pca = pca_2d(rows);
    for (size_t i = 0; i < rows.size(); ++i) {
        for (size_t j = i + 1; j < rows.size(); ++j) {
            double original = 0.0;
            for (size_t k = 0; k < 6; ++k) {
                double diff = rows[i][k] - rows[j][k];
                original += diff * diff;
            }
            double dx = pca.coords[i][0] - pca.coords[j][0];
            double dy = pca.coords[i][1] - pca.coords[j][1];
            CHECK(std::sqrt(dx * dx + dy * dy) ==
                  doctest::Approx(std::sqrt(original)).epsilon(1e-8));
        }
    }
}

TEST_CASE("pca eigenvalues match an independent eigen decomposition") {
    // helix-like 3d fixture
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 60; ++i) {
        double t = double(i) * 0.3;
        rows.push_back({std::cos(t) * 3.0, std::sin(t) * 3.0, t * 0.25});
    }
    PcaResult pca = pca_2d(rows);

    // oracle: Eigen's self-adjoint solver over the same centered covariance
    Eigen::MatrixXd m(rows.size(), 3);
    for (size_t i = 0; i < rows.size(); ++i)
        for (int j = 0; j < 3; ++j) m(long(i), j) = rows[i][size_t(j)];
    Eigen::RowVector3d mean = m.colwise().mean();
    Eigen::MatrixXd centered = m.rowwise() - mean;
    Eigen::Matrix3d cov = centered.transpose() * centered / double(rows.size() - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    Eigen::Vector3d ev = solver.eigenvalues();  // ascending

    CHECK(pca.eigenvalue_1 == doctest::Approx(ev(2)).epsilon(1e-8));
    CHECK(pca.eigenvalue_2 == doctest::Approx(ev(1)).epsilon(1e-8));
    CHECK(pca.total_variance == doctest::Approx(cov.trace()).epsilon(1e-10));

    // captured variance equals the per-axis variance of the projection
    double var1 = 0.0, var2 = 0.0;
    double m1 = 0.0, m2 = 0.0;
    for (const auto& c : pca.coords) {
        m1 += c[0];
        m2 += c[1];
    }
    m1 /= double(pca.coords.size());
    m2 /= double(pca.coords.size());
    for (const auto& c : pca.coords) {
        var1 += (c[0] - m1) * (c[0] - m1);
        var2 += (c[1] - m2) * (c[1] - m2);
    }
    var1 /= double(pca.coords.size() - 1);
    var2 /= double(pca.coords.size() - 1);
    CHECK(var1 == doctest::Approx(pca.eigenvalue_1).epsilon(1e-8));
    CHECK(var2 == doctest::Approx(pca.eigenvalue_2).epsilon(1e-8));
}

TEST_CASE("projection rejects degenerate input") {
    ProbeMatrix pm;
    pm.rows = {{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}};
    pm.labels = {Style::Fact, Style::Know, Style::Fact};
    CHECK_THROWS_AS(project_2d(pm, Projection::Pca, 1), DegenerateInput);
    pm.rows.resize(2);
    pm.labels.resize(2);
    CHECK_THROWS_AS(project_2d(pm, Projection::Pca, 1), InvalidInput);

    // one-dimensional rows cannot carry two principal axes
    CHECK_THROWS_AS(pca_2d({{1.0}, {2.0}, {3.0}}), InvalidInput);
}

TEST_CASE("tsne is deterministic for a fixed seed") {
    std::mt19937_64 rng(21);
    std::vector<Style> labels;
    auto rows = gaussian_blobs(rng, 15, 2, 8.0, 1.0, &labels);
    ProbeMatrix pm;
    pm.rows = rows;
    pm.labels = labels;
    auto a = project_2d(pm, Projection::Tsne, 33);
    auto b = project_2d(pm, Projection::Tsne, 33);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i][0] == b[i][0]);
        CHECK(a[i][1] == b[i][1]);
    }
    // t-SNE distorts distances (the reason it is barred from scoring), so
    // only a loose separation sanity bound applies to its output
    CHECK(separation_score(a, labels) > 0.25);
}

TEST_CASE("two distant gaussian blobs score at least 0.8") {
    std::mt19937_64 rng(7);
    std::vector<Style> labels;
    auto rows = gaussian_blobs(rng, 200, 2, 10.0, 1.0, &labels);
    CHECK(separation_score(rows, labels) >= 0.8);
}

TEST_CASE("shuffled labels on the same blobs score near zero") {
    std::mt19937_64 rng(9);
    std::vector<Style> labels;
    auto rows = gaussian_blobs(rng, 500, 2, 10.0, 1.0, &labels);
    std::shuffle(labels.begin(), labels.end(), rng);
    CHECK(std::abs(separation_score(rows, labels)) <= 0.1);
}

TEST_CASE("silhouette error contracts") {
    std::vector<std::vector<double>> rows = {{0, 0}, {1, 1}};
    CHECK_THROWS_AS(separation_score(rows, {Style::Fact, Style::Fact}), SingleLabelError);

    std::vector<std::vector<double>> identical = {{2, 2}, {2, 2}, {2, 2}, {2, 2}};
    CHECK_THROWS_AS(
        separation_score(identical, {Style::Fact, Style::Know, Style::Fact, Style::Know}),
        DegenerateInput);
}

TEST_CASE("separation score is invariant under rotation, translation and label swap") {
    std::mt19937_64 rng(13);
    std::vector<Style> labels;
    auto rows = gaussian_blobs(rng, 40, 2, 6.0, 1.0, &labels);
    double base = separation_score(rows, labels);

    double angle = 0.7;
    std::vector<std::vector<double>> moved;
    for (const auto& row : rows) {
        double x = row[0] * std::cos(angle) - row[1] * std::sin(angle) + 42.0;
        double y = row[0] * std::sin(angle) + row[1] * std::cos(angle) - 17.0;
        moved.push_back({x, y});
    }
    CHECK(separation_score(moved, labels) == doctest::Approx(base).epsilon(1e-9));

    std::vector<Style> swapped;
    for (Style s : labels) swapped.push_back(s == Style::Fact ? Style::Know : Style::Fact);
    CHECK(separation_score(rows, swapped) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("plot data csv: header plus one row per point, re-parseable") {
    std::string dir = testutil::scratch_dir("plot");
    std::vector<std::array<double, 2>> coords = {{1.5, -2.25}, {0.0, 3.0}, {-1.0, 0.5}};
    std::vector<Style> labels = {Style::Fact, Style::Know, Style::Fact};
    CHECK(emit_plot_data(coords, labels, dir + "/plot.csv") == 3);

    auto lines = split_lines(read_file(dir + "/plot.csv"));
    REQUIRE(lines.size() == 5);  // header + 3 rows + trailing empty
    CHECK(lines[0] == "x,y,label");
    CHECK(lines[4].empty());

    for (size_t i = 0; i < 3; ++i) {
        std::istringstream ss(lines[i + 1]);
        std::string x, y, label;
        std::getline(ss, x, ',');
        std::getline(ss, y, ',');
        std::getline(ss, label, ',');
        CHECK(std::stod(x) == doctest::Approx(coords[i][0]).epsilon(1e-15));
        CHECK(std::stod(y) == doctest::Approx(coords[i][1]).epsilon(1e-15));
        CHECK(label == to_string(labels[i]));
    }

    // empty input -> header-only file
    CHECK(emit_plot_data({}, {}, dir + "/empty.csv") == 0);
    CHECK(read_file(dir + "/empty.csv") == "x,y,label\n");
}
