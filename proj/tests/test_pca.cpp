// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "steerguard/error.hpp"
#include "steerguard/pca.hpp"
#include "support.hpp"

using namespace steerguard;

namespace {

std::vector<EmbeddingVector> to_vectors(const std::vector<std::vector<double>>& rows) {
    std::vector<EmbeddingVector> out;
    for (const auto& r : rows) {
        out.emplace_back(r);
    }
    return out;
}

double dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    return std::sqrt(s);
}

}  // namespace

TEST(Pca, CollinearPointsHaveUnitRatio) {
    const auto v = to_vectors({{1, 2, 3}, {2, 4, 6}, {-1, -2, -3}, {0.5, 1, 1.5}});
    const auto p = pca_project(v, 1);
    ASSERT_EQ(p.explained_variance_ratio.size(), 1u);
    EXPECT_NEAR(p.explained_variance_ratio[0], 1.0, 1e-9);
}

TEST(Pca, FullRankRatiosSumToOne) {
    std::mt19937_64 gen(9);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 30; ++i) {
        rows.push_back(sgtest::random_vector(gen, 5));
    }
    const auto p = pca_project(to_vectors(rows), 5);
    double total = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
        total += p.explained_variance_ratio[i];
        if (i > 0) {
            EXPECT_LE(p.explained_variance_ratio[i], p.explained_variance_ratio[i - 1]);
        }
        EXPECT_LE(p.explained_variance_ratio[i], 1.0);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Pca, MatchesJacobiOracle) {
    std::mt19937_64 gen(21);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<std::vector<double>> rows;
        const std::size_t d = 3 + trial % 5;
        for (int i = 0; i < 40; ++i) {
            auto r = sgtest::random_vector(gen, d);
            r[0] *= 4.0;  // distinct leading eigenvalue
            if (d > 1) {
                r[1] *= 2.0;
            }
            rows.push_back(r);
        }
        const auto lib = pca_project(to_vectors(rows), 2);
        const auto ref = sgtest::oracle_pca(rows, 2);
        for (std::size_t c = 0; c < 2; ++c) {
            EXPECT_NEAR(lib.explained_variance_ratio[c], ref.ratios[c], 1e-9);
        }
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (std::size_t c = 0; c < 2; ++c) {
                EXPECT_NEAR(lib.points[i][c], ref.points[i][c], 1e-8);
            }
        }
    }
}

TEST(Pca, SignConventionLargestLoadingPositive) {
    std::mt19937_64 gen(2);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 25; ++i) {
        rows.push_back(sgtest::random_vector(gen, 4));
    }
    const auto p = pca_project(to_vectors(rows), 3);
    for (const auto& comp : p.components) {
        double big = 0.0;
        for (const auto x : comp) {
            if (std::abs(x) > std::abs(big)) {
                big = x;
            }
        }
        EXPECT_GT(big, 0.0);
    }
}

TEST(Pca, ProjectionNeverExpandsDistances) {
    std::mt19937_64 gen(17);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 40; ++i) {
        rows.push_back(sgtest::random_vector(gen, 6));
    }
    const auto p = pca_project(to_vectors(rows), 2);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = i + 1; j < rows.size(); ++j) {
            EXPECT_LE(dist(p.points[i], p.points[j]), dist(rows[i], rows[j]) + 1e-6);
        }
    }
}

TEST(Pca, SeparatedClustersStayApartInProjection) {
    // Reference values come from the Jacobi oracle; the library must agree.
    const auto t = synth_cluster_table(7, 200, 16, 10.0);
    std::vector<std::vector<double>> rows;
    for (const auto& r : t.records()) {
        rows.push_back(sgtest::to_std(r.embedding));
    }
    const auto ref = sgtest::oracle_pca(rows, 2);
    std::vector<EmbeddingVector> vecs;
    for (const auto& r : t.records()) {
        vecs.push_back(r.embedding);
    }
    const auto lib = pca_project(vecs, 2);
    for (const auto* proj : {&ref.points, &lib.points}) {
        std::vector<double> cs(2, 0.0);
        std::vector<double> cu(2, 0.0);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            auto& c = t[i].label == Label::kSafe ? cs : cu;
            for (int k = 0; k < 2; ++k) {
                c[k] += (*proj)[i][k] / 200.0;
            }
        }
        double radius = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            radius += dist((*proj)[i], t[i].label == Label::kSafe ? cs : cu) / static_cast<double>(rows.size());
        }
        EXPECT_GE(dist(cs, cu), 5.0 * radius);
    }
}

TEST(Pca, Errors) {
    const auto v = to_vectors({{1, 2}, {3, 4}});
    EXPECT_THROW(pca_project(v, 0), Error);
    EXPECT_THROW(pca_project(v, 2), Error);  // needs k+1 vectors
    EXPECT_THROW(pca_project(to_vectors({{1, 1}, {1, 1}, {1, 1}}), 1), Error);
}
