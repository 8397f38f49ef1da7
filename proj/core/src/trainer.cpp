#include "gridssa/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gridssa/errors.hpp"
#include "gridssa/rng.hpp"

namespace gridssa {

SplitIndices split_dataset(int count, const std::array<double, 3>& fractions,
                           std::uint64_t seed) {
  double sum = 0.0;
  for (double f : fractions) {
    if (f < 0.0) throw ValidationError("split fractions must be >= 0");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ValidationError("split fractions must sum to 1");

  std::vector<int> order(count);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  const int n_val = static_cast<int>(std::floor(fractions[1] * count));
  const int n_test = static_cast<int>(std::floor(fractions[2] * count));
  const int n_train = count - n_val - n_test;

  SplitIndices s;
  s.train.assign(order.begin(), order.begin() + n_train);
  s.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  s.test.assign(order.begin() + n_train + n_val, order.end());
  return s;
}

double accuracy(const ModelParams& params, const FeatureDataset& data,
                const std::vector<int>& indices, double threshold) {
  if (indices.empty()) return 0.0;
  int hits = 0;
  for (int i : indices) {
    const int pred = predict(params, data.samples[i].z) >= threshold ? 1 : 0;
    hits += pred == data.samples[i].label;
  }
  return static_cast<double>(hits) / static_cast<double>(indices.size());
}

double dataset_loss(const ModelParams& params, const FeatureDataset& data,
                    const std::vector<int>& indices) {
  if (indices.empty()) return 0.0;
  std::vector<double> probs;
  std::vector<int> labels;
  probs.reserve(indices.size());
  for (int i : indices) {
    probs.push_back(predict(params, data.samples[i].z));
    labels.push_back(data.samples[i].label);
  }
  return bce_loss(probs, labels);
}

namespace {

// Per-position mean/std over the training split; near-constant positions
// get a floored scale to keep the division well-defined.
void fit_standardization(const FeatureDataset& data,
                         const std::vector<int>& train, ModelParams& params) {
  const auto& first = data.samples[train.front()].z;
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(first.rows(), first.cols());
  for (int i : train) mean += data.samples[i].z;
  mean /= static_cast<double>(train.size());
  Eigen::MatrixXd var = Eigen::MatrixXd::Zero(first.rows(), first.cols());
  for (int i : train) {
    const Eigen::MatrixXd d = data.samples[i].z - mean;
    var += d.cwiseProduct(d);
  }
  var /= static_cast<double>(train.size());
  params.input_shift = mean;
  params.input_scale = var.cwiseSqrt().cwiseMax(1e-9);
}

}  // namespace

TrainResult train(const FeatureDataset& data, const ModelSpec& spec,
                  const TrainConfig& config) {
  spec.validate();
  if (data.samples.empty()) throw ValidationError("empty dataset");
  if (!(config.lr >= 0.0)) throw ValidationError("learning rate must be >= 0");

  TrainResult result;
  result.split = split_dataset(static_cast<int>(data.samples.size()),
                               config.split, config.seed);
  const auto& train_idx = result.split.train;
  if (train_idx.empty()) throw ValidationError("empty training split");

  int positives = 0;
  for (int i : train_idx) positives += data.samples[i].label;
  if (positives == 0 || positives == static_cast<int>(train_idx.size()))
    throw ValidationError(
        "degenerate dataset: training split contains a single class (" +
        std::to_string(positives) + "/" + std::to_string(train_idx.size()) +
        " positive)");

  ModelParams params = init_model(spec, config.seed);
  if (config.standardize) fit_standardization(data, train_idx, params);

  const long n_params = static_cast<long>(params.theta.size());
  std::vector<double> m(n_params, 0.0), v(n_params, 0.0);
  double beta1_t = 1.0, beta2_t = 1.0;

  ModelParams best = params;
  double best_val_acc = -1.0;
  int best_epoch = -1;
  Rng shuffle_rng(config.seed ^ 0x5bf03635u);

  std::vector<int> order = train_idx;
  std::vector<const Eigen::MatrixXd*> batch;
  std::vector<int> labels;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size) {
      const std::size_t stop =
          std::min(order.size(), start + config.batch_size);
      batch.clear();
      labels.clear();
      for (std::size_t i = start; i < stop; ++i) {
        batch.push_back(&data.samples[order[i]].z);
        labels.push_back(data.samples[order[i]].label);
      }
      const std::vector<double> grad = gradients(params, batch, labels);

      beta1_t *= config.adam_beta1;
      beta2_t *= config.adam_beta2;
      for (long j = 0; j < n_params; ++j) {
        m[j] = config.adam_beta1 * m[j] + (1.0 - config.adam_beta1) * grad[j];
        v[j] = config.adam_beta2 * v[j] +
               (1.0 - config.adam_beta2) * grad[j] * grad[j];
        const double mhat = m[j] / (1.0 - beta1_t);
        const double vhat = v[j] / (1.0 - beta2_t);
        params.theta[j] -=
            config.lr * mhat / (std::sqrt(vhat) + config.adam_eps);
      }
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = dataset_loss(params, data, train_idx);
    stats.train_acc =
        accuracy(params, data, train_idx, config.decision_threshold);
    stats.val_loss = dataset_loss(params, data, result.split.val);
    stats.val_acc =
        accuracy(params, data, result.split.val, config.decision_threshold);
    result.history.push_back(stats);

    if (!result.split.val.empty() && stats.val_acc > best_val_acc) {
      best_val_acc = stats.val_acc;
      best = params;
      best_epoch = epoch;
    }
  }

  if (best_epoch < 0) {  // no validation split: keep the final parameters
    best = params;
    best_epoch = config.epochs - 1;
  }
  result.params = std::move(best);
  result.best_epoch = best_epoch;
  return result;
}

}  // namespace gridssa
