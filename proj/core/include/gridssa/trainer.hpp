#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <vector>

#include "gridssa/model.hpp"

namespace gridssa {

/// One featurized training sample: (rows x channels) input and binary label.
struct TrainSample {
  Eigen::MatrixXd z;
  int label = 0;
};

struct FeatureDataset {
  std::vector<TrainSample> samples;
  std::uint64_t provenance = 0;
};

struct TrainConfig {
  double lr = 1e-4;
  int batch_size = 128;
  int epochs = 2500;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::array<double, 3> split = {0.75, 0.15, 0.10};
  bool standardize = true;       // frozen input scaling from the train split
  double decision_threshold = 0.5;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
};

struct SplitIndices {
  std::vector<int> train, val, test;
};

/// Deterministic shuffled partition with sizes floor(f*M) for val and test
/// and the remainder in train.
SplitIndices split_dataset(int count, const std::array<double, 3>& fractions,
                           std::uint64_t seed);

struct TrainResult {
  ModelParams params;  // best-validation-accuracy snapshot
  std::vector<EpochStats> history;
  int best_epoch = 0;
  SplitIndices split;
};

/// Mini-batch Adam for config.epochs; single-threaded and bit-reproducible
/// per seed. Refuses a training split containing a single class.
TrainResult train(const FeatureDataset& data, const ModelSpec& spec,
                  const TrainConfig& config);

/// Fraction of samples whose thresholded prediction matches the label.
double accuracy(const ModelParams& params, const FeatureDataset& data,
                const std::vector<int>& indices, double threshold = 0.5);

/// Mean BCE over the given indices.
double dataset_loss(const ModelParams& params, const FeatureDataset& data,
                    const std::vector<int>& indices);

}  // namespace gridssa
