// Copyright 2025 The PEPForge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PEPFORGE_SVEC_HPP_
#define PEPFORGE_SVEC_HPP_

#include <Eigen/Dense>
#include <cmath>

namespace pepforge::conic {

// Scaled vectorization of symmetric matrices: lower triangle packed
// column-major, off-diagonal entries multiplied by sqrt(2) so that
// svec(A).dot(svec(B)) == Tr(A*B).

inline int svec_len(int n) { return n * (n + 1) / 2; }

// Side length n from a packed length, -1 if not triangular.
inline int svec_side(int len) {
  int n = static_cast<int>((std::sqrt(8.0 * len + 1.0) - 1.0) / 2.0 + 0.5);
  return svec_len(n) == len ? n : -1;
}

// Packed index of entry (i,j), requires i >= j.
inline int svec_index(int n, int i, int j) {
  return j * n - j * (j - 1) / 2 + (i - j);
}

inline Eigen::VectorXd svec(const Eigen::MatrixXd& A) {
  const int n = static_cast<int>(A.rows());
  const double s = std::sqrt(2.0);
  Eigen::VectorXd v(svec_len(n));
  int k = 0;
  for (int j = 0; j < n; ++j) {
    v[k++] = A(j, j);
    for (int i = j + 1; i < n; ++i) v[k++] = s * A(i, j);
  }
  return v;
}

inline Eigen::MatrixXd smat(const Eigen::VectorXd& v) {
  const int n = svec_side(static_cast<int>(v.size()));
  const double s = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXd A(n, n);
  int k = 0;
  for (int j = 0; j < n; ++j) {
    A(j, j) = v[k++];
    for (int i = j + 1; i < n; ++i) {
      A(i, j) = A(j, i) = s * v[k++];
    }
  }
  return A;
}

}  // namespace pepforge::conic

#endif  // PEPFORGE_SVEC_HPP_
