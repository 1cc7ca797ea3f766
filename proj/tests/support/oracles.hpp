#pragma once

// Direct term-by-term transcriptions used to check the library. Deliberately
// naive: no max shifts, no shared kernels.

#include <cmath>
#include <span>
#include <vector>

#include "sacl/matrix.hpp"

namespace sacl::test {

inline double naive_dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline Matrix unit_rows(const Matrix& m) {
  Matrix out = m;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    const double s = std::sqrt(naive_dot(out.row(r), out.row(r)));
    for (double& v : out.row(r)) v /= s;
  }
  return out;
}

// sum_i -sum_{j != i} (w_ij / sum_k w_ik) log(exp(<e_i,e_j>/tau) / sum_k exp(<e_i,e_k>/tau))
inline double oracle_loss(const Matrix& e, const Matrix& raw_w, double tau) {
  const std::size_t n = e.rows();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double denom = 0.0, wsum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      denom += std::exp(naive_dot(e.row(i), e.row(j)) / tau);
      wsum += raw_w(i, j);
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double lij = std::log(std::exp(naive_dot(e.row(i), e.row(j)) / tau) / denom);
      total -= raw_w(i, j) / wsum * lij;
    }
  }
  return total;
}

// Mean of the support rows of each class.
inline Matrix oracle_prototypes(const Matrix& support, std::span<const int> labels, std::size_t classes) {
  Matrix p(classes, support.cols());
  std::vector<double> count(classes, 0.0);
  for (std::size_t i = 0; i < support.rows(); ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    count[c] += 1.0;
    for (std::size_t d = 0; d < support.cols(); ++d) p(c, d) += support(i, d);
  }
  for (std::size_t c = 0; c < classes; ++c)
    for (std::size_t d = 0; d < support.cols(); ++d) p(c, d) /= count[c];
  return p;
}

inline double cosine(std::span<const double> a, std::span<const double> b) {
  return naive_dot(a, b) / std::sqrt(naive_dot(a, a) * naive_dot(b, b));
}

// exp(cos(q, p_c)) / sum_j exp(cos(q, p_j))
inline std::vector<double> oracle_posterior(std::span<const double> q, const Matrix& protos) {
  std::vector<double> p(protos.rows());
  double z = 0.0;
  for (std::size_t c = 0; c < protos.rows(); ++c) z += p[c] = std::exp(cosine(q, protos.row(c)));
  for (double& v : p) v /= z;
  return p;
}

// (K p_c + sum_x p(c|x) x) / (K + sum_x p(c|x)) with posteriors from oracle_posterior.
inline Matrix oracle_rectified(const Matrix& protos, const Matrix& queries, double shot) {
  Matrix num(protos.rows(), protos.cols());
  std::vector<double> den(protos.rows(), shot);
  for (std::size_t c = 0; c < protos.rows(); ++c)
    for (std::size_t d = 0; d < protos.cols(); ++d) num(c, d) = shot * protos(c, d);
  for (std::size_t q = 0; q < queries.rows(); ++q) {
    const auto post = oracle_posterior(queries.row(q), protos);
    for (std::size_t c = 0; c < protos.rows(); ++c) {
      den[c] += post[c];
      for (std::size_t d = 0; d < protos.cols(); ++d) num(c, d) += post[c] * queries(q, d);
    }
  }
  for (std::size_t c = 0; c < protos.rows(); ++c)
    for (std::size_t d = 0; d < protos.cols(); ++d) num(c, d) /= den[c];
  return num;
}

}  // namespace sacl::test
