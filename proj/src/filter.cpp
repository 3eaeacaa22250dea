#include "respotopt/filter.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "respotopt/kernels/kernels.hpp"

namespace respotopt {

FilterOperator build_filter(const Grid& grid, double R_f) {
  if (!(R_f > 0.0))
    throw std::invalid_argument("build_filter: radius must be positive");

  FilterOperator F;
  F.radius = R_f;
  F.n = grid.num_elems();
  const double hx = grid.elem_width(), hy = grid.elem_height();
  const double area = grid.elem_area();
  const int di_max = static_cast<int>(std::ceil(R_f / hx));
  const int dj_max = static_cast<int>(std::ceil(R_f / hy));

  F.row_ptr.assign(F.n + 1, 0);
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const int k = grid.elem_index(i, j);
      const auto& ck = grid.elem_centers[k];
      double row_sum = 0.0;
      const std::size_t row_begin = F.cols.size();
      for (int dj = -dj_max; dj <= dj_max; ++dj) {
        const int jj = j + dj;
        if (jj < 0 || jj >= grid.ny) continue;
        for (int di = -di_max; di <= di_max; ++di) {
          const int ii = i + di;
          if (ii < 0 || ii >= grid.nx) continue;
          const int e = grid.elem_index(ii, jj);
          const auto& ce = grid.elem_centers[e];
          const double dist = std::hypot(ce[0] - ck[0], ce[1] - ck[1]);
          if (dist >= R_f) continue;
          const double w = (1.0 - dist / R_f) * area;
          if (w <= 0.0) continue;
          F.cols.push_back(e);
          F.vals.push_back(w);
          row_sum += w;
        }
      }
      for (std::size_t s = row_begin; s < F.cols.size(); ++s) F.vals[s] /= row_sum;
      F.row_ptr[k + 1] = static_cast<int>(F.cols.size());
    }
  }

  // Transpose in CSR form for apply_transpose.
  F.t_row_ptr.assign(F.n + 1, 0);
  for (int c : F.cols) F.t_row_ptr[c + 1]++;
  for (int r = 0; r < F.n; ++r) F.t_row_ptr[r + 1] += F.t_row_ptr[r];
  F.t_cols.resize(F.cols.size());
  F.t_vals.resize(F.vals.size());
  std::vector<int> cursor(F.t_row_ptr.begin(), F.t_row_ptr.end() - 1);
  for (int r = 0; r < F.n; ++r) {
    for (int s = F.row_ptr[r]; s < F.row_ptr[r + 1]; ++s) {
      const int pos = cursor[F.cols[s]]++;
      F.t_cols[pos] = r;
      F.t_vals[pos] = F.vals[s];
    }
  }
  return F;
}

Eigen::VectorXd FilterOperator::apply(const Eigen::VectorXd& field) const {
  if (field.size() != n)
    throw std::invalid_argument("FilterOperator::apply: field length mismatch");
  Eigen::VectorXd out(n);
  kernels::csr_matvec(n, row_ptr.data(), cols.data(), vals.data(), field.data(),
                      out.data());
  if (n > 0) {
    const double lo = field.minCoeff(), hi = field.maxCoeff();
    for (int k = 0; k < n; ++k) out[k] = std::min(std::max(out[k], lo), hi);
  }
  return out;
}

Eigen::VectorXd FilterOperator::apply_transpose(const Eigen::VectorXd& field) const {
  if (field.size() != n)
    throw std::invalid_argument("FilterOperator::apply_transpose: field length mismatch");
  Eigen::VectorXd out(n);
  kernels::csr_matvec(n, t_row_ptr.data(), t_cols.data(), t_vals.data(),
                      field.data(), out.data());
  return out;
}

}  // namespace respotopt
