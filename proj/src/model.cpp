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

#include "posaug/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <omp.h>

#include "posaug/data.hpp"

namespace posaug {
namespace {

struct KernelSet {
  decltype(&kernels::affine) affine;
  decltype(&kernels::relu) relu;
  decltype(&kernels::affine_backward_input) backward_input;
  decltype(&kernels::relu_backward) relu_backward;
  decltype(&kernels::affine_backward_params) backward_params;
};

constexpr KernelSet kParallel{kernels::affine, kernels::relu,
                              kernels::affine_backward_input,
                              kernels::relu_backward,
                              kernels::affine_backward_params};
constexpr KernelSet kSerial{kernels::serial::affine, kernels::serial::relu,
                            kernels::serial::affine_backward_input,
                            kernels::serial::relu_backward,
                            kernels::serial::affine_backward_params};

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) acc += a[j] * b[j];
  return acc;
}

std::span<const double> bias_of(const ModelParams& p, Tensor t) {
  const ConstMatrixView v = p.tensor(t);
  return {v.data, v.cols};
}

// Activations of a 2-layer tower for a block of rows.
struct TowerPass {
  Matrix pre;     // rows x hidden
  Matrix hidden;  // rows x hidden
  Matrix out;     // rows x dim
};

TowerPass tower_forward(const ModelParams& p, const Matrix& in, Tensor w1,
                        Tensor b1, Tensor w2, Tensor b2, const KernelSet& ks) {
  TowerPass t{Matrix(in.rows(), p.hidden()), Matrix(in.rows(), p.hidden()),
              Matrix(in.rows(), p.dim())};
  ks.affine(in.view(), p.tensor(w1), bias_of(p, b1), t.pre.view());
  ks.relu(t.pre.view(), t.hidden.view());
  ks.affine(t.hidden.view(), p.tensor(w2), bias_of(p, b2), t.out.view());
  return t;
}

// Backpropagates grad_out through the tower; accumulates parameter grads and
// returns the gradient with respect to the tower input.
Matrix tower_backward(const ModelParams& p, std::span<double> grad,
                      const Matrix& in, const TowerPass& t, const Matrix& grad_out,
                      Tensor w1, Tensor b1, Tensor w2, Tensor b2,
                      const KernelSet& ks) {
  const auto bias_grad = [&](Tensor b) {
    const MatrixView v = p.view_of(grad, b);
    return std::span<double>(v.data, v.cols);
  };
  ks.backward_params(t.hidden.view(), grad_out.view(), p.view_of(grad, w2),
                     bias_grad(b2));
  Matrix grad_hidden(in.rows(), p.hidden());
  ks.backward_input(grad_out.view(), p.tensor(w2), grad_hidden.view());
  ks.relu_backward(t.pre.view(), grad_hidden.view());
  ks.backward_params(in.view(), grad_hidden.view(), p.view_of(grad, w1),
                     bias_grad(b1));
  Matrix grad_in(in.rows(), in.cols());
  ks.backward_input(grad_hidden.view(), p.tensor(w1), grad_in.view());
  return grad_in;
}

Matrix user_inputs(const ModelParams& p, std::span<const UserIndex> users,
                   std::span<const std::span<const ItemIndex>> histories) {
  const std::size_t d = p.dim();
  const ConstMatrixView user_emb = p.tensor(Tensor::kUserEmb);
  const ConstMatrixView item_emb = p.tensor(Tensor::kItemEmb);
  Matrix x(users.size(), 2 * d);
  for (std::size_t r = 0; r < users.size(); ++r) {
    if (users[r] >= p.num_users()) {
      throw IndexOutOfRange("user index " + std::to_string(users[r]) +
                            " out of range");
    }
    std::span<double> row = x.row(r);
    std::copy_n(user_emb.row(users[r]), d, row.begin());
    const auto& hist = histories[r];
    if (hist.empty()) continue;
    for (ItemIndex it : hist) {
      if (it >= p.num_items()) {
        throw IndexOutOfRange("history item " + std::to_string(it) + " out of range");
      }
      const double* e = item_emb.row(it);
      for (std::size_t j = 0; j < d; ++j) row[d + j] += e[j];
    }
    const double inv = 1.0 / static_cast<double>(hist.size());
    for (std::size_t j = 0; j < d; ++j) row[d + j] *= inv;
  }
  return x;
}

Matrix item_inputs(const ModelParams& p, std::span<const ItemIndex> items) {
  const std::size_t d = p.dim();
  const ConstMatrixView item_emb = p.tensor(Tensor::kItemEmb);
  Matrix x(items.size(), d);
  for (std::size_t r = 0; r < items.size(); ++r) {
    if (items[r] >= p.num_items()) {
      throw IndexOutOfRange("item index " + std::to_string(items[r]) + " out of range");
    }
    std::copy_n(item_emb.row(items[r]), d, x.row(r).begin());
  }
  return x;
}

TowerPass user_tower(const ModelParams& p, const Matrix& x, const KernelSet& ks) {
  return tower_forward(p, x, Tensor::kUserW1, Tensor::kUserB1, Tensor::kUserW2,
                       Tensor::kUserB2, ks);
}

TowerPass item_tower(const ModelParams& p, const Matrix& x, const KernelSet& ks) {
  return tower_forward(p, x, Tensor::kItemW1, Tensor::kItemB1, Tensor::kItemW2,
                       Tensor::kItemB2, ks);
}

}  // namespace

void HyperParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid hyper-parameter: ") + what);
  };
  require(dim >= 1, "dim >= 1");
  require(negatives >= 1, "negatives >= 1");
  require(batch_size >= 1, "batch_size >= 1");
  require(k >= 1, "k >= 1");
  require(k_u >= 1, "k_u >= 1");
  require(m >= 1, "m >= 1");
  require(max_history >= 1, "max_history >= 1");
  require(lr > 0.0, "lr > 0");
  require(alpha > 0.0, "alpha > 0");
  require(beta_mix >= 0.0, "beta_mix >= 0");
  require(adam_beta1 >= 0.0 && adam_beta1 < 1.0, "adam_beta1 in [0,1)");
  require(adam_beta2 >= 0.0 && adam_beta2 < 1.0, "adam_beta2 in [0,1)");
  require(adam_eps > 0.0, "adam_eps > 0");
}

const char* tensor_name(Tensor t) {
  static constexpr const char* kNames[kNumTensors] = {
      "item_emb", "user_emb", "user_w1", "user_b1", "user_w2",
      "user_b2",  "item_w1",  "item_b1", "item_w2", "item_b2"};
  return kNames[static_cast<int>(t)];
}

ModelParams::ModelParams(std::size_t num_users, std::size_t num_items,
                         std::size_t dim, std::size_t hidden)
    : num_users_(num_users), num_items_(num_items), dim_(dim), hidden_(hidden) {
  const std::pair<std::size_t, std::size_t> dims[kNumTensors] = {
      {num_items, dim}, {num_users, dim}, {2 * dim, hidden}, {1, hidden},
      {hidden, dim},    {1, dim},         {dim, hidden},     {1, hidden},
      {hidden, dim},    {1, dim}};
  std::size_t offset = 0;
  for (int t = 0; t < kNumTensors; ++t) {
    shapes_[t] = {dims[t].first, dims[t].second, offset};
    offset += dims[t].first * dims[t].second;
  }
  values_.assign(offset, 0.0);
  adam_.m.assign(offset, 0.0);
  adam_.v.assign(offset, 0.0);
}

ModelParams ModelParams::initialize(std::size_t num_users, std::size_t num_items,
                                    const HyperParams& hp, Rng& rng) {
  ModelParams p(num_users, num_items, hp.dim, hp.hidden_width());
  const auto fill = [&](Tensor t, double limit) {
    std::uniform_real_distribution<double> dist(-limit, limit);
    const MatrixView v = p.tensor(t);
    for (std::size_t i = 0; i < v.size(); ++i) v.data[i] = dist(rng);
  };
  const auto glorot = [&](Tensor t) {
    const TensorShape& s = p.shape(t);
    fill(t, std::sqrt(6.0 / static_cast<double>(s.rows + s.cols)));
  };
  fill(Tensor::kItemEmb, 0.05);
  fill(Tensor::kUserEmb, 0.05);
  glorot(Tensor::kUserW1);
  glorot(Tensor::kUserW2);
  glorot(Tensor::kItemW1);
  glorot(Tensor::kItemW2);
  return p;
}

MatrixView ModelParams::view_of(std::span<double> buffer, Tensor t) const {
  const TensorShape& s = shape(t);
  return {buffer.data() + s.offset, s.rows, s.cols};
}

ConstMatrixView ModelParams::view_of(std::span<const double> buffer, Tensor t) const {
  const TensorShape& s = shape(t);
  return {buffer.data() + s.offset, s.rows, s.cols};
}

bool ModelParams::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double x) { return std::isfinite(x); });
}

Representation encode_user(const ModelParams& params, UserIndex user,
                           std::span<const ItemIndex> history) {
  const UserIndex users[1] = {user};
  const std::span<const ItemIndex> hists[1] = {history};
  const Matrix x = user_inputs(params, users, hists);
  const TowerPass t = user_tower(params, x, kSerial);
  return t.out.values();
}

Representation encode_item(const ModelParams& params, ItemIndex item) {
  const ItemIndex items[1] = {item};
  const TowerPass t = item_tower(params, item_inputs(params, items), kSerial);
  return t.out.values();
}

Matrix encode_users(const ModelParams& params, std::span<const UserIndex> users,
                    std::span<const std::span<const ItemIndex>> histories) {
  if (users.size() != histories.size()) {
    throw DimensionMismatch("encode_users: users/histories size mismatch");
  }
  return user_tower(params, user_inputs(params, users, histories), kParallel).out;
}

Matrix encode_all_items(const ModelParams& params) {
  std::vector<ItemIndex> items(params.num_items());
  for (std::size_t i = 0; i < items.size(); ++i) items[i] = static_cast<ItemIndex>(i);
  return item_tower(params, item_inputs(params, items), kParallel).out;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch("cosine: dimension mismatch");
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na < 1e-12 || nb < 1e-12) return 0.0;
  return dot(a, b) / (na * nb);
}

double softmax_loss_from_logits(double pos_logit, std::span<const double> neg_logits) {
  double mx = pos_logit;
  for (double z : neg_logits) mx = std::max(mx, z);
  if (mx == pos_logit) {
    double tail = 0.0;
    for (double z : neg_logits) tail += std::exp(z - pos_logit);
    return std::log1p(tail);
  }
  double total = std::exp(pos_logit - mx);
  for (double z : neg_logits) total += std::exp(z - mx);
  return (mx - pos_logit) + std::log(total);
}

double sampled_softmax_loss(std::span<const double> u, std::span<const double> v_pos,
                            std::span<const Representation> v_negs) {
  std::vector<double> negs;
  negs.reserve(v_negs.size());
  for (const auto& v : v_negs) {
    if (v.size() != u.size()) throw DimensionMismatch("negative dimension mismatch");
    negs.push_back(dot(u, v));
  }
  if (v_pos.size() != u.size()) throw DimensionMismatch("positive dimension mismatch");
  return softmax_loss_from_logits(dot(u, v_pos), negs);
}

namespace {

// Softmax statistics for one target logit against the shared negatives.
struct SoftmaxTerm {
  double loss = 0.0;
  double target_coef = 0.0;  // dL/d(target logit) = p_target - 1
  double norm = 0.0;         // sum of exp(z - shift) over all logits
  double shift = 0.0;
};

SoftmaxTerm softmax_term(double target, std::span<const double> negs) {
  SoftmaxTerm t;
  t.loss = softmax_loss_from_logits(target, negs);
  double mx = target;
  for (double z : negs) mx = std::max(mx, z);
  double neg_sum = 0.0;
  for (double z : negs) neg_sum += std::exp(z - mx);
  t.shift = mx;
  t.norm = std::exp(target - mx) + neg_sum;
  t.target_coef = -neg_sum / t.norm;
  return t;
}

}  // namespace

double example_loss(std::span<const double> u, ConstMatrixView item_vecs,
                    std::uint32_t pos_slot, std::span<const std::uint32_t> neg_slots,
                    std::span<const SlotWeight> aug, const LossSpec& spec,
                    double scale, double* grad_u,
                    std::vector<std::pair<std::uint32_t, double>>* item_coefs) {
  const std::size_t d = u.size();
  const auto vec = [&](std::uint32_t slot) {
    return std::span<const double>(item_vecs.row(slot), d);
  };
  std::vector<double> neg_logits(neg_slots.size());
  for (std::size_t j = 0; j < neg_slots.size(); ++j) {
    neg_logits[j] = dot(u, vec(neg_slots[j]));
  }
  const bool mix = spec.beta_mix != 0.0 && !aug.empty();
  if (grad_u) std::fill_n(grad_u, d, 0.0);

  // Adds c * (softmax gradient of a term) to the outputs.
  const auto add_negative_grads = [&](const SoftmaxTerm& t, double c) {
    for (std::size_t j = 0; j < neg_slots.size(); ++j) {
      const double p = std::exp(neg_logits[j] - t.shift) / t.norm;
      const double coef = scale * c * p;
      if (item_coefs) item_coefs->emplace_back(neg_slots[j], coef);
      if (grad_u) {
        const auto v = vec(neg_slots[j]);
        for (std::size_t i = 0; i < d; ++i) grad_u[i] += coef * v[i];
      }
    }
  };

  if (spec.mode == MixupMode::kRepresentationSpace && mix) {
    std::vector<double> mixed(vec(pos_slot).begin(), vec(pos_slot).end());
    for (const SlotWeight& a : aug) {
      const auto v = vec(a.slot);
      const double c = spec.beta_mix * a.weight;
      for (std::size_t i = 0; i < d; ++i) mixed[i] += c * v[i];
    }
    const SoftmaxTerm t = softmax_term(dot(u, mixed), neg_logits);
    if (grad_u || item_coefs) {
      const double g = scale * t.target_coef;
      if (item_coefs) {
        item_coefs->emplace_back(pos_slot, g);
        for (const SlotWeight& a : aug) {
          item_coefs->emplace_back(a.slot, g * spec.beta_mix * a.weight);
        }
      }
      if (grad_u) {
        for (std::size_t i = 0; i < d; ++i) grad_u[i] += g * mixed[i];
      }
      add_negative_grads(t, 1.0);
    }
    return t.loss;
  }

  double total = 0.0;
  const auto add_term = [&](std::uint32_t slot, double c) {
    const SoftmaxTerm t = softmax_term(dot(u, vec(slot)), neg_logits);
    total += c * t.loss;
    if (!grad_u && !item_coefs) return;
    const double g = scale * c * t.target_coef;
    if (item_coefs) item_coefs->emplace_back(slot, g);
    if (grad_u) {
      const auto v = vec(slot);
      for (std::size_t i = 0; i < d; ++i) grad_u[i] += g * v[i];
    }
    add_negative_grads(t, c);
  };
  add_term(pos_slot, 1.0);
  if (mix) {
    for (const SlotWeight& a : aug) add_term(a.slot, spec.beta_mix * a.weight);
  }
  return total;
}

double batch_loss_and_grad(const ModelParams& params,
                           std::span<const TrainExample> batch, const LossSpec& spec,
                           std::vector<double>* grad, bool parallel) {
  const KernelSet& ks = parallel ? kParallel : kSerial;
  const std::size_t n = batch.size();
  if (n == 0) throw Error("empty batch");
  const std::size_t d = params.dim();
  const bool mix = spec.beta_mix != 0.0;

  // Every item touched by the batch gets one slot; the item tower runs once
  // per slot.
  std::vector<ItemIndex> slot_items;
  for (const TrainExample& ex : batch) {
    slot_items.push_back(ex.pos_item);
    slot_items.insert(slot_items.end(), ex.negatives.begin(), ex.negatives.end());
    if (mix) {
      for (const WeightedItem& a : ex.aug) slot_items.push_back(a.item);
    }
  }
  std::sort(slot_items.begin(), slot_items.end());
  slot_items.erase(std::unique(slot_items.begin(), slot_items.end()), slot_items.end());
  const auto slot_of = [&](ItemIndex item) {
    return static_cast<std::uint32_t>(
        std::lower_bound(slot_items.begin(), slot_items.end(), item) -
        slot_items.begin());
  };

  const Matrix item_x = item_inputs(params, slot_items);
  const TowerPass items = item_tower(params, item_x, ks);

  std::vector<UserIndex> users(n);
  std::vector<std::span<const ItemIndex>> hists(n);
  for (std::size_t b = 0; b < n; ++b) {
    users[b] = batch[b].user;
    hists[b] = batch[b].history;
  }
  const Matrix user_x = user_inputs(params, users, hists);
  const TowerPass user_pass = user_tower(params, user_x, ks);

  std::vector<double> losses(n);
  Matrix grad_users(n, d);
  std::vector<std::vector<std::pair<std::uint32_t, double>>> coefs(n);
  const double scale = 1.0 / static_cast<double>(n);
  const bool want_grad = grad != nullptr;

  const auto run_example = [&](std::size_t b) {
    const TrainExample& ex = batch[b];
    std::vector<std::uint32_t> negs(ex.negatives.size());
    for (std::size_t j = 0; j < negs.size(); ++j) negs[j] = slot_of(ex.negatives[j]);
    std::vector<SlotWeight> aug;
    if (mix) {
      aug.reserve(ex.aug.size());
      for (const WeightedItem& a : ex.aug) aug.push_back({slot_of(a.item), a.weight});
    }
    losses[b] = example_loss(user_pass.out.row(b), items.out.view(),
                             slot_of(ex.pos_item), negs, aug, spec, scale,
                             want_grad ? grad_users.row(b).data() : nullptr,
                             want_grad ? &coefs[b] : nullptr);
  };
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(n); ++b) {
      run_example(static_cast<std::size_t>(b));
    }
  } else {
    for (std::size_t b = 0; b < n; ++b) run_example(b);
  }

  double loss = 0.0;
  for (double l : losses) loss += l;
  loss *= scale;
  if (!want_grad) return loss;

  grad->assign(params.values().size(), 0.0);
  std::span<double> g(*grad);

  // Reduce item-vector gradients in example order.
  Matrix grad_items(slot_items.size(), d);
  for (std::size_t b = 0; b < n; ++b) {
    const auto u = user_pass.out.row(b);
    for (const auto& [slot, c] : coefs[b]) {
      auto row = grad_items.row(slot);
      for (std::size_t i = 0; i < d; ++i) row[i] += c * u[i];
    }
  }

  const Matrix grad_item_x =
      tower_backward(params, g, item_x, items, grad_items, Tensor::kItemW1,
                     Tensor::kItemB1, Tensor::kItemW2, Tensor::kItemB2, ks);
  const Matrix grad_user_x =
      tower_backward(params, g, user_x, user_pass, grad_users, Tensor::kUserW1,
                     Tensor::kUserB1, Tensor::kUserW2, Tensor::kUserB2, ks);

  const MatrixView item_emb_grad = params.view_of(g, Tensor::kItemEmb);
  const MatrixView user_emb_grad = params.view_of(g, Tensor::kUserEmb);
  for (std::size_t s = 0; s < slot_items.size(); ++s) {
    double* row = item_emb_grad.row(slot_items[s]);
    const auto gx = grad_item_x.row(s);
    for (std::size_t i = 0; i < d; ++i) row[i] += gx[i];
  }
  for (std::size_t b = 0; b < n; ++b) {
    const auto gx = grad_user_x.row(b);
    double* urow = user_emb_grad.row(batch[b].user);
    for (std::size_t i = 0; i < d; ++i) urow[i] += gx[i];
    const auto& hist = batch[b].history;
    if (hist.empty()) continue;
    const double inv = 1.0 / static_cast<double>(hist.size());
    for (ItemIndex it : hist) {
      double* row = item_emb_grad.row(it);
      for (std::size_t i = 0; i < d; ++i) row[i] += gx[d + i] * inv;
    }
  }
  return loss;
}

double train_step(ModelParams& params, std::span<TrainExample> batch,
                  const HyperParams& hp, const LossSpec& spec, Rng& rng) {
  if (batch.empty()) throw Error("train_step: empty batch");
  for (TrainExample& ex : batch) {
    const ItemIndex exclude[1] = {ex.pos_item};
    ex.negatives = sample_negatives(rng, static_cast<std::uint32_t>(params.num_items()),
                                    exclude, hp.negatives);
  }
  std::vector<double> grad;
  const double loss = batch_loss_and_grad(params, batch, spec, &grad);
  apply_adam(params, grad, hp.adam());
  return loss;
}

void apply_adam(ModelParams& params, std::span<const double> grad,
                const kernels::AdamConfig& cfg) {
  AdamState& st = params.adam();
  ++st.step;
  kernels::adam_update(params.values(), grad, st.m, st.v, st.step, cfg);
}

}  // namespace posaug
