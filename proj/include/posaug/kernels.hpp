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

#ifndef POSAUG_KERNELS_HPP_
#define POSAUG_KERNELS_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "posaug/common.hpp"

// Dense data-parallel kernels. Every kernel in posaug::kernels is OpenMP
// parallel over independent output rows (or elements) and keeps a fixed
// per-element accumulation order, so its result is bitwise identical to the
// matching reference in posaug::kernels::serial for any thread count.
namespace posaug::kernels {

// out = in * w + bias, with w stored (in.cols x out.cols).
void affine(ConstMatrixView in, ConstMatrixView w, std::span<const double> bias,
            MatrixView out);

// out = max(in, 0) elementwise.
void relu(ConstMatrixView in, MatrixView out);

// grad_in = grad_out * w^T.
void affine_backward_input(ConstMatrixView grad_out, ConstMatrixView w,
                           MatrixView grad_in);
// grad = 0 where pre <= 0.
void relu_backward(ConstMatrixView pre, MatrixView grad);

// grad_w += in^T * grad_out; grad_b += column sums of grad_out.
void affine_backward_params(ConstMatrixView in, ConstMatrixView grad_out,
                            MatrixView grad_w, std::span<double> grad_b);

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One bias-corrected Adam step; `step` is the 1-based step count after this
// update.
void adam_update(std::span<double> params, std::span<const double> grads,
                 std::span<double> m, std::span<double> v, std::uint64_t step,
                 const AdamConfig& cfg);

// scores(q, r) = queries.row(q) . rows.row(r)
void dot_scores(ConstMatrixView queries, ConstMatrixView rows, MatrixView scores);

namespace serial {

void affine(ConstMatrixView in, ConstMatrixView w, std::span<const double> bias,
            MatrixView out);
void relu(ConstMatrixView in, MatrixView out);
void affine_backward_input(ConstMatrixView grad_out, ConstMatrixView w,
                           MatrixView grad_in);
void relu_backward(ConstMatrixView pre, MatrixView grad);
void affine_backward_params(ConstMatrixView in, ConstMatrixView grad_out,
                            MatrixView grad_w, std::span<double> grad_b);
void adam_update(std::span<double> params, std::span<const double> grads,
                 std::span<double> m, std::span<double> v, std::uint64_t step,
                 const AdamConfig& cfg);
void dot_scores(ConstMatrixView queries, ConstMatrixView rows, MatrixView scores);

}  // namespace serial

// Worker count used by all parallel regions; 0 leaves the OpenMP default.
void set_num_threads(int n);
int num_threads();

}  // namespace posaug::kernels

#endif  // POSAUG_KERNELS_HPP_
