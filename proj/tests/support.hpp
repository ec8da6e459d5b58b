// Copyright (C) 2026 The steerguard Authors
// SPDX-License-Identifier: Apache-2.0

// Test helpers and reference implementations. The reference code below deliberately
// avoids the library's numerical paths (and Eigen) so it can serve as an oracle.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "steerguard/bundle.hpp"
#include "steerguard/embedding.hpp"
#include "steerguard/mlp.hpp"
#include "steerguard/steering.hpp"

namespace sgtest {

using Matrix = std::vector<std::vector<double>>;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("steerguard-test-" + std::to_string(rd()) + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::filesystem::path data_dir() {
    return STEERGUARD_TEST_DATA_DIR;
}

// ---- random helpers (std distributions are fine in tests) ----

inline std::vector<double> random_vector(std::mt19937_64& gen, std::size_t n, double scale = 1.0) {
    std::normal_distribution<double> dist(0.0, scale);
    std::vector<double> v(n);
    for (auto& x : v) {
        x = dist(gen);
    }
    return v;
}

inline std::vector<double> float_vector(std::mt19937_64& gen, std::size_t n, double scale = 1.0) {
    auto v = random_vector(gen, n, scale);
    for (auto& x : v) {
        x = static_cast<float>(x);
    }
    return v;
}

inline steerguard::EmbeddingSequence random_sequence(std::mt19937_64& gen, std::size_t tokens, std::size_t dim,
                                                     std::vector<bool> special = {}) {
    std::vector<std::string> toks;
    std::vector<steerguard::EmbeddingVector> vecs;
    for (std::size_t t = 0; t < tokens; ++t) {
        toks.push_back("t" + std::to_string(t));
        vecs.emplace_back(float_vector(gen, dim));
    }
    return {std::move(toks), std::move(vecs), std::move(special)};
}

/// Single linear layer D -> 1 with the given weights and bias.
inline steerguard::MlpParams linear_mlp(std::vector<double> w, double b) {
    steerguard::DenseLayer layer;
    layer.in = w.size();
    layer.out = 1;
    layer.weights = std::move(w);
    layer.bias = {b};
    layer.activation = steerguard::Activation::kIdentity;
    return steerguard::MlpParams({layer});
}

/// Identifier whose logit is the constant `logit` for every input.
inline steerguard::MlpParams constant_mlp(std::size_t dim, double logit) {
    return linear_mlp(std::vector<double>(dim, 0.0), logit);
}

// ---- oracles ----

inline double oracle_logistic(double z) {
    return 1.0 / (1.0 + std::exp(-z));
}

/// Dense forward pass written directly from the layer definitions.
inline double oracle_forward(const steerguard::MlpParams& params, const std::vector<double>& x) {
    std::vector<double> a = x;
    for (const auto& layer : params.layers()) {
        std::vector<double> z(layer.out);
        for (std::size_t r = 0; r < layer.out; ++r) {
            long double acc = layer.bias[r];
            for (std::size_t c = 0; c < layer.in; ++c) {
                acc += static_cast<long double>(layer.weights[r * layer.in + c]) * a[c];
            }
            z[r] = static_cast<double>(acc);
            if (layer.activation == steerguard::Activation::kRelu && z[r] < 0.0) {
                z[r] = 0.0;
            }
        }
        a = std::move(z);
    }
    return oracle_logistic(a[0]);
}

inline double oracle_bce(const std::vector<double>& p, const std::vector<int>& y) {
    long double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double q = std::clamp(p[i], 1e-7, 1.0 - 1e-7);
        sum += y[i] == 1 ? std::log(static_cast<long double>(q)) : std::log1p(-static_cast<long double>(q));
    }
    return static_cast<double>(-sum / static_cast<long double>(p.size()));
}

inline std::size_t oracle_window_count(std::size_t n, const std::vector<std::size_t>& sizes) {
    std::size_t total = 0;
    for (const auto w : sizes) {
        if (w <= n) {
            total += n - w + 1;
        }
    }
    return total;
}

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix. Returns eigenvalues in
/// descending order with matching unit eigenvectors (columns of the result pair).
inline std::pair<std::vector<double>, Matrix> jacobi_eigen(Matrix a) {
    const std::size_t n = a.size();
    Matrix v(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        v[i][i] = 1.0;
    }
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                off += a[p][q] * a[p][q];
            }
        }
        if (off < 1e-26) {
            break;
        }
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) {
                    continue;
                }
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p];
                    const double akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k];
                    const double aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v[k][p];
                    const double vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });
    std::vector<double> values;
    Matrix vectors;
    for (const auto i : order) {
        values.push_back(a[i][i]);
        std::vector<double> col(n);
        for (std::size_t k = 0; k < n; ++k) {
            col[k] = v[k][i];
        }
        vectors.push_back(std::move(col));
    }
    return {values, vectors};
}

struct OraclePca {
    std::vector<std::vector<double>> points;
    std::vector<double> ratios;
};

/// PCA via the Jacobi oracle, same sign rule as the library (largest |loading| positive).
inline OraclePca oracle_pca(const std::vector<std::vector<double>>& x, std::size_t k) {
    const std::size_t n = x.size();
    const std::size_t d = x[0].size();
    std::vector<double> mean(d, 0.0);
    for (const auto& r : x) {
        for (std::size_t j = 0; j < d; ++j) {
            mean[j] += r[j] / static_cast<double>(n);
        }
    }
    Matrix cov(d, std::vector<double>(d, 0.0));
    for (const auto& r : x) {
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                cov[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]) / static_cast<double>(n - 1);
            }
        }
    }
    auto [values, vectors] = jacobi_eigen(cov);
    double total = 0.0;
    for (const auto v : values) {
        total += std::max(v, 0.0);
    }
    OraclePca out;
    for (std::size_t c = 0; c < k; ++c) {
        auto& vec = vectors[c];
        const auto big = std::max_element(vec.begin(), vec.end(),
                                          [](double p, double q) { return std::abs(p) < std::abs(q); });
        if (*big < 0) {
            for (auto& e : vec) {
                e = -e;
            }
        }
        out.ratios.push_back(std::max(values[c], 0.0) / total);
    }
    for (const auto& r : x) {
        std::vector<double> p(k, 0.0);
        for (std::size_t c = 0; c < k; ++c) {
            for (std::size_t j = 0; j < d; ++j) {
                p[c] += (r[j] - mean[j]) * vectors[c][j];
            }
        }
        out.points.push_back(std::move(p));
    }
    return out;
}

/// Solves A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> gauss_solve(Matrix a, std::vector<double> b) {
    const std::size_t n = a.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) {
                piv = r;
            }
        }
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) {
            s -= a[i][c] * x[c];
        }
        x[i] = s / a[i][i];
    }
    return x;
}

/// Ridge normal-equation solution W = S_su (S_uu + lambda I)^-1, row by row.
/// unsafe/safe are lists of M vectors of length D.
inline Matrix oracle_ridge(const std::vector<std::vector<double>>& unsafe,
                           const std::vector<std::vector<double>>& safe, double lambda) {
    const std::size_t d = unsafe[0].size();
    Matrix suu(d, std::vector<double>(d, 0.0));
    Matrix ssu(d, std::vector<double>(d, 0.0));
    for (std::size_t m = 0; m < unsafe.size(); ++m) {
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                suu[i][j] += unsafe[m][i] * unsafe[m][j];
                ssu[i][j] += safe[m][i] * unsafe[m][j];
            }
        }
    }
    for (std::size_t i = 0; i < d; ++i) {
        suu[i][i] += lambda;
    }
    // W (S_uu + lambda I) = S_su and the system matrix is symmetric, so each row of W
    // solves (S_uu + lambda I) w_i = s_i.
    Matrix w(d);
    for (std::size_t i = 0; i < d; ++i) {
        w[i] = gauss_solve(suu, ssu[i]);
    }
    return w;
}

inline double oracle_steer_loss(const Matrix& w, const std::vector<std::vector<double>>& unsafe,
                                const std::vector<std::vector<double>>& safe) {
    double total = 0.0;
    for (std::size_t m = 0; m < unsafe.size(); ++m) {
        for (std::size_t i = 0; i < w.size(); ++i) {
            double we = 0.0;
            for (std::size_t j = 0; j < w.size(); ++j) {
                we += w[i][j] * unsafe[m][j];
            }
            const double r = safe[m][i] - we;
            total += r * r;
        }
    }
    return total / static_cast<double>(unsafe.size());
}

struct OracleLogReg {
    std::vector<double> w;
    double b = 0.0;
    double predict(const std::vector<double>& x) const {
        double z = b;
        for (std::size_t i = 0; i < w.size(); ++i) {
            z += w[i] * x[i];
        }
        return oracle_logistic(z);
    }
};

/// Full-batch gradient-descent logistic regression.
inline OracleLogReg oracle_logreg(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                                  std::size_t iterations = 500, double lr = 0.1) {
    OracleLogReg model;
    model.w.assign(x[0].size(), 0.0);
    const double n = static_cast<double>(x.size());
    for (std::size_t it = 0; it < iterations; ++it) {
        std::vector<double> gw(model.w.size(), 0.0);
        double gb = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double err = model.predict(x[i]) - y[i];
            for (std::size_t j = 0; j < gw.size(); ++j) {
                gw[j] += err * x[i][j] / n;
            }
            gb += err / n;
        }
        for (std::size_t j = 0; j < gw.size(); ++j) {
            model.w[j] -= lr * gw[j];
        }
        model.b -= lr * gb;
    }
    return model;
}

inline std::vector<double> to_std(const steerguard::EmbeddingVector& v) {
    return {v.values().begin(), v.values().end()};
}

inline steerguard::PairSet make_pairs(const std::vector<std::vector<double>>& unsafe,
                                      const std::vector<std::vector<double>>& safe) {
    const auto d = static_cast<Eigen::Index>(unsafe[0].size());
    const auto m = static_cast<Eigen::Index>(unsafe.size());
    Eigen::MatrixXd u(d, m);
    Eigen::MatrixXd s(d, m);
    for (Eigen::Index c = 0; c < m; ++c) {
        for (Eigen::Index r = 0; r < d; ++r) {
            u(r, c) = unsafe[static_cast<std::size_t>(c)][static_cast<std::size_t>(r)];
            s(r, c) = safe[static_cast<std::size_t>(c)][static_cast<std::size_t>(r)];
        }
    }
    return {u, s};
}

inline Matrix to_matrix(const Eigen::MatrixXd& w) {
    Matrix out(static_cast<std::size_t>(w.rows()), std::vector<double>(static_cast<std::size_t>(w.cols())));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
        for (Eigen::Index c = 0; c < w.cols(); ++c) {
            out[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = w(r, c);
        }
    }
    return out;
}

/// Small bundle with float-exact random weights; identifier D -> 8 -> 1.
inline steerguard::ModelBundle make_bundle(std::size_t dim, std::uint64_t seed) {
    steerguard::ModelBundle b;
    const std::size_t hidden[] = {8};
    b.identifier = steerguard::init_mlp(dim, hidden, seed);
    steerguard::quantize_to_float(b.identifier);
    std::mt19937_64 gen(seed);
    const auto w = float_vector(gen, dim * dim, 0.3);
    Eigen::MatrixXd m(dim, dim);
    for (std::size_t i = 0; i < dim * dim; ++i) {
        m(static_cast<Eigen::Index>(i / dim), static_cast<Eigen::Index>(i % dim)) = w[i];
    }
    b.steer = steerguard::SteerMatrix(m);
    return b;
}

}  // namespace sgtest
