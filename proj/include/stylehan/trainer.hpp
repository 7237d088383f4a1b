#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "stylehan/model.hpp"

namespace stylehan {

struct TrainConfig {
  std::size_t batch_size = 32;
  std::size_t epochs = 50;
  double learning_rate = 0.002;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double l2 = 1e-4;  // λ
  int l2_power = 2;  // 2: λ·Σ‖θ‖²; 1: λ·‖θ‖ over all trainable coordinates
  std::uint64_t seed = 1;
  std::size_t runs = 10;
  double val_fraction = 0.1;

  void validate() const;  // throws std::invalid_argument
  bool operator==(const TrainConfig&) const = default;
};

// Full-size gradient buffers, one per parameter in enumeration order.
using GradientBuffers = std::vector<std::vector<float>>;

struct OptimizerState {
  GradientBuffers m, v;
  std::uint64_t t = 0;

  static OptimizerState for_params(const ParamSet& params);
};

// Regularizer value over trainable parameters (PAD rows are zero and add nothing).
double l2_penalty(const ParamSet& params, double lambda, int power);
// Adds the regularizer gradient (2λθ, or λθ/‖θ‖ for power 1) into `grads`.
void add_l2_gradient(const ParamSet& params, double lambda, int power, GradientBuffers& grads);

// Mean −log max(p_label, 1e-12) over the batch plus l2_penalty.
double compute_loss(const std::vector<std::vector<float>>& probs, const std::vector<std::size_t>& labels,
                    const ParamSet& params, double lambda, int power = 2);

// One Nadam update with bias correction. Frozen parameters and PAD rows are
// left alone. A non-finite gradient aborts before anything is written,
// naming the parameter.
void nadam_step(ParamSet& params, const GradientBuffers& grads, OptimizerState& state, const TrainConfig& cfg);

struct BatchResult {
  double data_loss = 0.0;  // mean NLL over the batch
  GradientBuffers grads;   // of the mean NLL only
};

// Forward/backward over a batch. Documents are processed in parallel, each
// into its own sink, and the sinks are summed in document order, so the
// result does not depend on the worker count.
BatchResult batch_gradient(const ModelParams& model, const std::vector<const TensorizedDocument*>& batch);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;  // NaN without validation data
  double val_acc = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;

  // epoch,train_loss,val_loss,val_acc
  void write_csv(std::ostream& out) const;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Mini-batch training in place. Each epoch visits a seeded shuffle of the
// training set; the last batch may be short. train_loss is the mean batch
// objective (data loss plus regularizer).
TrainHistory train(ModelParams& model, const std::vector<TensorizedDocument>& train_docs,
                   const std::vector<TensorizedDocument>& val_docs, const TrainConfig& cfg,
                   const EpochCallback& on_epoch = {});

struct EvalResult {
  double accuracy = 0.0;
  double loss = 0.0;  // mean NLL
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  std::size_t total = 0;
};

// Argmax predictions, ties to the lowest class id.
EvalResult evaluate(const ModelParams& model, const std::vector<TensorizedDocument>& docs);

struct Split {
  std::vector<std::size_t> train, validation;  // indices into the input
  bool stratified = true;
};

// Seeded split with validation size ⌊f·n⌋ (at least one document on each
// side). Stratified by label when every label has at least two documents and
// the training side can hold one of each; otherwise falls back to a plain
// shuffle with a warning on stderr.
Split split_data(const std::vector<std::size_t>& labels, double val_fraction, std::uint64_t seed);

struct RunOutcome {
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  Split split;
  TrainHistory history;
};

struct ProtocolResult {
  std::vector<RunOutcome> runs;
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
  double median = 0.0;
};

using ModelFactory = std::function<ModelParams(std::uint64_t seed)>;
// Called after each run with the trained model and the documents it was scored on.
using RunCallback =
    std::function<void(const RunOutcome&, const ModelParams&, const std::vector<TensorizedDocument>& scored)>;

// Runs split + train + evaluate with seeds seed .. seed+runs−1. Accuracy is
// measured on the validation part of each split, or on `test_docs` when
// given. Splits depend only on the labels and seeds, so every model trained
// with the same cfg sees the same partitions.
ProtocolResult run_protocol(const std::vector<TensorizedDocument>& docs, const ModelFactory& make_model,
                            const TrainConfig& cfg, const std::vector<TensorizedDocument>* test_docs = nullptr,
                            const RunCallback& on_run = {});

double median(std::vector<double> values);

}  // namespace stylehan
