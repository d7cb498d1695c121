// dsu/cca.hpp

// Copyright 2026  The DSU Toolkit Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dsu/errors.hpp"
#include "dsu/feature_matrix.hpp"

namespace dsu {

/// Paired observation matrices for canonical correlation analysis: one row
/// per aligned sample. reg_eps both regularizes the auto-covariances and
/// floors their eigenvalues, keeping rank-deficient inputs (one-hot labels)
/// well conditioned.
struct CcaInput {
  Eigen::MatrixXd X;
  Eigen::MatrixXd Y;
  double reg_eps = 1e-6;
};

namespace detail {

/// (C + reg I)^(-1/2) through a symmetric eigendecomposition with the
/// eigenvalues floored at reg.
inline Eigen::MatrixXd inverse_sqrt(const Eigen::MatrixXd& c, double reg) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c);
  if (eig.info() != Eigen::Success)
    throw ValueError("covariance eigendecomposition failed");
  Eigen::VectorXd inv_sqrt = eig.eigenvalues();
  for (Eigen::Index i = 0; i < inv_sqrt.size(); ++i)
    inv_sqrt[i] = 1.0 / std::sqrt(std::max(inv_sqrt[i], reg));
  return eig.eigenvectors() * inv_sqrt.asDiagonal() *
         eig.eigenvectors().transpose();
}

}  // namespace detail

/// Mean canonical correlation between the column spaces of X and Y: whiten
/// both covariances, take the singular values of the whitened cross
/// covariance, and average the top min(Dx, Dy, N-1) of them, each clipped
/// to [0, 1].
inline double cca_score(const CcaInput& inp) {
  const Eigen::Index n = inp.X.rows();
  if (n != inp.Y.rows())
    throw ValueError("X and Y must pair the same number of rows");
  if (n < 2) throw ValueError("CCA needs at least 2 paired rows");
  if (inp.X.cols() < 1 || inp.Y.cols() < 1)
    throw ValueError("CCA needs at least one column per side");
  if (!inp.X.allFinite() || !inp.Y.allFinite())
    throw ValueError("non-finite CCA input");
  if (!(inp.reg_eps > 0)) throw ValueError("reg_eps must be positive");

  Eigen::MatrixXd xc = inp.X.rowwise() - inp.X.colwise().mean();
  Eigen::MatrixXd yc = inp.Y.rowwise() - inp.Y.colwise().mean();
  const double denom = static_cast<double>(n - 1);
  Eigen::MatrixXd cxx = (xc.transpose() * xc) / denom;
  Eigen::MatrixXd cyy = (yc.transpose() * yc) / denom;
  Eigen::MatrixXd cxy = (xc.transpose() * yc) / denom;
  cxx.diagonal().array() += inp.reg_eps;
  cyy.diagonal().array() += inp.reg_eps;

  Eigen::MatrixXd w = detail::inverse_sqrt(cxx, inp.reg_eps) * cxy *
                      detail::inverse_sqrt(cyy, inp.reg_eps);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(w);
  Eigen::VectorXd sv = svd.singularValues();  // descending

  const Eigen::Index r =
      std::min({inp.X.cols(), inp.Y.cols(), static_cast<Eigen::Index>(n - 1)});
  double sum = 0.0;
  for (Eigen::Index i = 0; i < r; ++i)
    sum += std::clamp(sv[i], 0.0, 1.0);
  return sum / static_cast<double>(r);
}

namespace detail {

inline Eigen::MatrixXd to_eigen(const FeatureMatrix& m) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(m.n_frames),
                      static_cast<Eigen::Index>(m.n_dims));
  for (std::size_t i = 0; i < m.n_frames; ++i)
    for (std::size_t j = 0; j < m.n_dims; ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          m.at(i, j);
  return out;
}

}  // namespace detail

inline double cca_score(const FeatureMatrix& x, const FeatureMatrix& y,
                        double reg_eps = 1e-6) {
  return cca_score(CcaInput{detail::to_eigen(x), detail::to_eigen(y), reg_eps});
}

/// Picks the layer with the highest score; ties go to the lowest layer ID.
inline std::int64_t select_layer(
    const std::vector<std::pair<std::int64_t, double>>& scores) {
  if (scores.empty()) throw ValueError("no layer scores given");
  std::int64_t best_id = scores.front().first;
  double best = scores.front().second;
  for (const auto& [id, score] : scores) {
    if (score > best || (score == best && id < best_id)) {
      best = score;
      best_id = id;
    }
  }
  return best_id;
}

}  // namespace dsu
