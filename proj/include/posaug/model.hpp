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

#ifndef POSAUG_MODEL_HPP_
#define POSAUG_MODEL_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "posaug/common.hpp"
#include "posaug/kernels.hpp"

namespace posaug {

struct HyperParams {
  std::size_t dim = 32;
  std::size_t hidden = 0;  // tower hidden width; 0 means 2 * dim
  std::size_t negatives = 20;
  double lr = 0.001;
  std::size_t batch_size = 256;
  std::size_t epochs = 10;
  std::size_t k = 50;    // candidate pool per augmentation strategy
  std::size_t k_u = 10;  // similar users for u2u2i
  std::size_t m = 3;     // sampled positives per strategy
  double alpha = 0.5;    // beta-sampler shape
  double beta_mix = 0.1;
  std::size_t max_history = 50;
  std::uint64_t seed = 42;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  std::size_t hidden_width() const { return hidden == 0 ? 2 * dim : hidden; }
  kernels::AdamConfig adam() const { return {lr, adam_beta1, adam_beta2, adam_eps}; }
  // Throws ConfigError on a violated invariant.
  void validate() const;

  bool operator==(const HyperParams&) const = default;
};

using Representation = std::vector<double>;

enum class Tensor : int {
  kItemEmb = 0,
  kUserEmb,
  kUserW1,
  kUserB1,
  kUserW2,
  kUserB2,
  kItemW1,
  kItemB1,
  kItemW2,
  kItemB2,
};
inline constexpr int kNumTensors = 10;
const char* tensor_name(Tensor t);

struct TensorShape {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t offset = 0;

  bool operator==(const TensorShape&) const = default;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;

  bool operator==(const AdamState&) const = default;
};

// All learnable tensors of the two-tower encoder in one flat buffer, plus
// the optimizer moments. The user tower maps [user_emb || mean history
// item_emb] (2d) -> hidden -> d; the item tower maps item_emb (d) -> hidden
// -> d. Both hidden layers use ReLU; outputs are not normalized.
class ModelParams {
 public:
  ModelParams() = default;
  // Zero-initialized parameters.
  ModelParams(std::size_t num_users, std::size_t num_items, std::size_t dim,
              std::size_t hidden);

  // Uniform(-0.05, 0.05) embeddings, Glorot-uniform tower weights, zero
  // biases.
  static ModelParams initialize(std::size_t num_users, std::size_t num_items,
                                const HyperParams& hp, Rng& rng);

  std::size_t num_users() const { return num_users_; }
  std::size_t num_items() const { return num_items_; }
  std::size_t dim() const { return dim_; }
  std::size_t hidden() const { return hidden_; }

  const TensorShape& shape(Tensor t) const { return shapes_[static_cast<int>(t)]; }
  MatrixView tensor(Tensor t) { return view_of(std::span<double>(values_), t); }
  ConstMatrixView tensor(Tensor t) const {
    return view_of(std::span<const double>(values_), t);
  }
  // Views a gradient (or any buffer laid out like values()).
  MatrixView view_of(std::span<double> buffer, Tensor t) const;
  ConstMatrixView view_of(std::span<const double> buffer, Tensor t) const;

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  AdamState& adam() { return adam_; }
  const AdamState& adam() const { return adam_; }

  bool all_finite() const;
  bool operator==(const ModelParams&) const = default;

 private:
  std::size_t num_users_ = 0;
  std::size_t num_items_ = 0;
  std::size_t dim_ = 0;
  std::size_t hidden_ = 0;
  std::array<TensorShape, kNumTensors> shapes_{};
  std::vector<double> values_;
  AdamState adam_;
};

Representation encode_user(const ModelParams& params, UserIndex user,
                           std::span<const ItemIndex> history);
Representation encode_item(const ModelParams& params, ItemIndex item);

// Batched encoders (OpenMP kernels). Row i of the result is bitwise equal to
// encode_user / encode_item for the same input.
Matrix encode_users(const ModelParams& params, std::span<const UserIndex> users,
                    std::span<const std::span<const ItemIndex>> histories);
Matrix encode_all_items(const ModelParams& params);

// a.b / (|a||b|); 0 when either norm is below 1e-12.
double cosine(std::span<const double> a, std::span<const double> b);

// -log softmax of the positive logit among {pos} U negs. Max-shifted with a
// log1p tail so tiny losses keep their magnitude.
double softmax_loss_from_logits(double pos_logit, std::span<const double> neg_logits);

double sampled_softmax_loss(std::span<const double> u, std::span<const double> v_pos,
                            std::span<const Representation> v_negs);

enum class MixupMode { kOutputSpace, kRepresentationSpace };

struct LossSpec {
  double beta_mix = 0.0;
  MixupMode mode = MixupMode::kOutputSpace;
};

struct WeightedItem {
  ItemIndex item = 0;
  double weight = 0.0;
};

// One positive pair prepared for a gradient step.
struct TrainExample {
  UserIndex user = 0;
  ItemIndex pos_item = 0;
  std::span<const ItemIndex> history;
  std::vector<ItemIndex> negatives;
  // Augmented positives of all sources; weights already normalized per
  // source.
  std::vector<WeightedItem> aug;
};

struct SlotWeight {
  std::uint32_t slot = 0;
  double weight = 0.0;
};

// Loss of one example given its user vector and a table of item vectors
// addressed by slot. With beta_mix == 0 or no aug this is the plain sampled
// softmax loss. When grad_u / item_coefs are non-null, writes scale * dL/du
// and appends (slot, c) pairs with dL/dv_slot = c * u (already scaled).
double example_loss(std::span<const double> u, ConstMatrixView item_vecs,
                    std::uint32_t pos_slot, std::span<const std::uint32_t> neg_slots,
                    std::span<const SlotWeight> aug, const LossSpec& spec,
                    double scale, double* grad_u,
                    std::vector<std::pair<std::uint32_t, double>>* item_coefs);

// Mean loss over the batch and, when grad is non-null, its exact gradient
// with respect to params.values() (resized and overwritten). Negatives must
// already be filled in. `parallel` selects the OpenMP or serial kernels; the
// results are bitwise identical.
double batch_loss_and_grad(const ModelParams& params,
                           std::span<const TrainExample> batch, const LossSpec& spec,
                           std::vector<double>* grad, bool parallel = true);

// Draws fresh negatives for every example (in batch order, excluding only
// its positive), computes the gradient and applies one Adam update.
// Returns the mean batch loss.
double train_step(ModelParams& params, std::span<TrainExample> batch,
                  const HyperParams& hp, const LossSpec& spec, Rng& rng);

// Applies one Adam step for an already computed gradient.
void apply_adam(ModelParams& params, std::span<const double> grad,
                const kernels::AdamConfig& cfg);

}  // namespace posaug

#endif  // POSAUG_MODEL_HPP_
