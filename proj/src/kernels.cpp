// Copyright 2026 The posaug Authors.
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

#include "posaug/kernels.hpp"

#include <cassert>
#include <cmath>

#include <omp.h>

namespace posaug::kernels {
namespace {

using Index = std::ptrdiff_t;

// Inner loops shared by the serial and parallel paths so both accumulate in
// exactly the same order.
inline void affine_row(const double* x, ConstMatrixView w, const double* b,
                       double* y) {
  const std::size_t n = w.cols;
  for (std::size_t j = 0; j < n; ++j) y[j] = b[j];
  for (std::size_t k = 0; k < w.rows; ++k) {
    const double xk = x[k];
    const double* wk = w.row(k);
    for (std::size_t j = 0; j < n; ++j) y[j] += xk * wk[j];
  }
}

inline void backward_input_row(const double* g, ConstMatrixView w, double* out) {
  for (std::size_t k = 0; k < w.rows; ++k) {
    const double* wk = w.row(k);
    double acc = 0.0;
    for (std::size_t j = 0; j < w.cols; ++j) acc += g[j] * wk[j];
    out[k] = acc;
  }
}

inline void weight_grad_row(ConstMatrixView in, ConstMatrixView grad_out,
                            std::size_t k, double* gw) {
  for (std::size_t r = 0; r < in.rows; ++r) {
    const double xk = in(r, k);
    if (xk == 0.0) continue;
    const double* g = grad_out.row(r);
    for (std::size_t j = 0; j < grad_out.cols; ++j) gw[j] += xk * g[j];
  }
}

inline void bias_grad_col(ConstMatrixView grad_out, std::size_t j, double* gb) {
  double acc = 0.0;
  for (std::size_t r = 0; r < grad_out.rows; ++r) acc += grad_out(r, j);
  *gb += acc;
}

inline void adam_element(double& p, double g, double& m, double& v, double c1,
                         double c2, const AdamConfig& cfg) {
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
  v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
  const double m_hat = m / c1;
  const double v_hat = v / c2;
  p -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
}

inline double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) acc += a[j] * b[j];
  return acc;
}

void check_affine(ConstMatrixView in, ConstMatrixView w,
                  std::span<const double> bias, MatrixView out) {
  if (in.cols != w.rows || out.cols != w.cols || out.rows != in.rows ||
      bias.size() != w.cols) {
    throw DimensionMismatch("affine: shape mismatch");
  }
}

}  // namespace

void affine(ConstMatrixView in, ConstMatrixView w, std::span<const double> bias,
            MatrixView out) {
  check_affine(in, w, bias, out);
#pragma omp parallel for schedule(static)
  for (Index r = 0; r < static_cast<Index>(in.rows); ++r) {
    affine_row(in.row(r), w, bias.data(), out.row(r));
  }
}

void relu(ConstMatrixView in, MatrixView out) {
  const Index n = static_cast<Index>(in.size());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) out.data[i] = in.data[i] > 0.0 ? in.data[i] : 0.0;
}

void affine_backward_input(ConstMatrixView grad_out, ConstMatrixView w,
                           MatrixView grad_in) {
#pragma omp parallel for schedule(static)
  for (Index r = 0; r < static_cast<Index>(grad_out.rows); ++r) {
    backward_input_row(grad_out.row(r), w, grad_in.row(r));
  }
}

void relu_backward(ConstMatrixView pre, MatrixView grad) {
  const Index n = static_cast<Index>(pre.size());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) {
    if (!(pre.data[i] > 0.0)) grad.data[i] = 0.0;
  }
}

void affine_backward_params(ConstMatrixView in, ConstMatrixView grad_out,
                            MatrixView grad_w, std::span<double> grad_b) {
#pragma omp parallel
  {
#pragma omp for schedule(static) nowait
    for (Index k = 0; k < static_cast<Index>(in.cols); ++k) {
      weight_grad_row(in, grad_out, static_cast<std::size_t>(k), grad_w.row(k));
    }
#pragma omp for schedule(static)
    for (Index j = 0; j < static_cast<Index>(grad_out.cols); ++j) {
      bias_grad_col(grad_out, static_cast<std::size_t>(j), &grad_b[j]);
    }
  }
}

void adam_update(std::span<double> params, std::span<const double> grads,
                 std::span<double> m, std::span<double> v, std::uint64_t step,
                 const AdamConfig& cfg) {
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  const Index n = static_cast<Index>(params.size());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) adam_element(params[i], grads[i], m[i], v[i], c1, c2, cfg);
}

void dot_scores(ConstMatrixView queries, ConstMatrixView rows, MatrixView scores) {
  if (queries.cols != rows.cols || scores.rows != queries.rows ||
      scores.cols != rows.rows) {
    throw DimensionMismatch("dot_scores: shape mismatch");
  }
#pragma omp parallel for schedule(static)
  for (Index q = 0; q < static_cast<Index>(queries.rows); ++q) {
    double* out = scores.row(q);
    for (std::size_t r = 0; r < rows.rows; ++r) {
      out[r] = dot(queries.row(q), rows.row(r), rows.cols);
    }
  }
}

namespace serial {

void affine(ConstMatrixView in, ConstMatrixView w, std::span<const double> bias,
            MatrixView out) {
  check_affine(in, w, bias, out);
  for (std::size_t r = 0; r < in.rows; ++r) {
    affine_row(in.row(r), w, bias.data(), out.row(r));
  }
}

void relu(ConstMatrixView in, MatrixView out) {
  for (std::size_t i = 0; i < in.size(); ++i) {
    out.data[i] = in.data[i] > 0.0 ? in.data[i] : 0.0;
  }
}

void affine_backward_input(ConstMatrixView grad_out, ConstMatrixView w,
                           MatrixView grad_in) {
  for (std::size_t r = 0; r < grad_out.rows; ++r) {
    backward_input_row(grad_out.row(r), w, grad_in.row(r));
  }
}

void relu_backward(ConstMatrixView pre, MatrixView grad) {
  for (std::size_t i = 0; i < pre.size(); ++i) {
    if (!(pre.data[i] > 0.0)) grad.data[i] = 0.0;
  }
}

void affine_backward_params(ConstMatrixView in, ConstMatrixView grad_out,
                            MatrixView grad_w, std::span<double> grad_b) {
  for (std::size_t k = 0; k < in.cols; ++k) {
    weight_grad_row(in, grad_out, k, grad_w.row(k));
  }
  for (std::size_t j = 0; j < grad_out.cols; ++j) {
    bias_grad_col(grad_out, j, &grad_b[j]);
  }
}

void adam_update(std::span<double> params, std::span<const double> grads,
                 std::span<double> m, std::span<double> v, std::uint64_t step,
                 const AdamConfig& cfg) {
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    adam_element(params[i], grads[i], m[i], v[i], c1, c2, cfg);
  }
}

void dot_scores(ConstMatrixView queries, ConstMatrixView rows, MatrixView scores) {
  for (std::size_t q = 0; q < queries.rows; ++q) {
    for (std::size_t r = 0; r < rows.rows; ++r) {
      scores(q, r) = dot(queries.row(q), rows.row(r), rows.cols);
    }
  }
}

}  // namespace serial

void set_num_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

int num_threads() { return omp_get_max_threads(); }

}  // namespace posaug::kernels
