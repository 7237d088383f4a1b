#include "stylehan/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

#include "stylehan/parallel.hpp"

namespace stylehan {

void TrainConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("train config: " + m); };
  if (batch_size < 1) fail("batch_size must be at least 1");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) fail("val_fraction must lie strictly between 0 and 1");
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) fail("betas must lie in [0, 1)");
  if (!(epsilon > 0.0)) fail("epsilon must be positive");
  if (l2 < 0.0) fail("l2 must be non-negative");
  if (l2_power != 1 && l2_power != 2) fail("l2_power must be 1 or 2");
  if (runs < 1) fail("runs must be at least 1");
}

OptimizerState OptimizerState::for_params(const ParamSet& params) {
  OptimizerState s;
  for (const auto& v : params.values) {
    s.m.emplace_back(v.size(), 0.0f);
    s.v.emplace_back(v.size(), 0.0f);
  }
  return s;
}

namespace {

double squared_norm(const ParamSet& params) {
  double total = 0.0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (!params.specs[p].trainable) continue;
    for (float x : params.values[p].storage()) total += static_cast<double>(x) * x;
  }
  return total;
}

// First coordinate an update may touch: tables keep their PAD row frozen.
std::size_t first_updatable(const ParamSpec& spec) { return spec.table ? spec.shape.back() : 0; }

}  // namespace

double l2_penalty(const ParamSet& params, double lambda, int power) {
  if (lambda == 0.0) return 0.0;
  const double sq = squared_norm(params);
  return power == 1 ? lambda * std::sqrt(sq) : lambda * sq;
}

void add_l2_gradient(const ParamSet& params, double lambda, int power, GradientBuffers& grads) {
  if (lambda == 0.0) return;
  double scale = 2.0 * lambda;
  if (power == 1) {
    const double norm = std::sqrt(squared_norm(params));
    if (norm == 0.0) return;  // subgradient 0 at the origin
    scale = lambda / norm;
  }
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (!params.specs[p].trainable) continue;
    const auto& x = params.values[p].storage();
    auto& g = grads[p];
    if (g.size() != x.size()) g.assign(x.size(), 0.0f);
    for (std::size_t i = 0; i < x.size(); ++i) g[i] += static_cast<float>(scale * x[i]);
  }
}

double compute_loss(const std::vector<std::vector<float>>& probs, const std::vector<std::size_t>& labels,
                    const ParamSet& params, double lambda, int power) {
  if (probs.size() != labels.size()) throw std::invalid_argument("compute_loss: probs and labels differ in length");
  if (probs.empty()) throw std::invalid_argument("compute_loss: empty batch");
  double nll = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (labels[i] >= probs[i].size())
      throw std::out_of_range("compute_loss: label " + std::to_string(labels[i]) + " outside [0, " +
                              std::to_string(probs[i].size()) + ")");
    nll -= std::log(std::max(static_cast<double>(probs[i][labels[i]]), ops::kProbabilityFloor));
  }
  return nll / static_cast<double>(probs.size()) + l2_penalty(params, lambda, power);
}

void nadam_step(ParamSet& params, const GradientBuffers& grads, OptimizerState& state, const TrainConfig& cfg) {
  if (grads.size() != params.size() || state.m.size() != params.size())
    throw DimensionError("nadam_step: gradient/state count does not match the parameters");
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (!params.specs[p].trainable || grads[p].empty()) continue;
    if (grads[p].size() != params.values[p].size())
      throw DimensionError("nadam_step: gradient for '" + params.specs[p].name + "' has the wrong size");
    for (float g : grads[p])
      if (!std::isfinite(g)) throw NonFiniteError("non-finite gradient in parameter '" + params.specs[p].name + "'");
  }

  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double b1 = cfg.beta1, b2 = cfg.beta2;
  const double c1 = 1.0 - std::pow(b1, t), c2 = 1.0 - std::pow(b2, t);
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (!params.specs[p].trainable || grads[p].empty()) continue;
    auto& theta = params.values[p].storage();
    auto& m = state.m[p];
    auto& v = state.v[p];
    const auto& g = grads[p];
    for (std::size_t i = first_updatable(params.specs[p]); i < theta.size(); ++i) {
      const double gi = g[i];
      const double mi = b1 * m[i] + (1.0 - b1) * gi;
      const double vi = b2 * v[i] + (1.0 - b2) * gi * gi;
      m[i] = static_cast<float>(mi);
      v[i] = static_cast<float>(vi);
      const double m_hat = mi / c1, v_hat = vi / c2;
      const double step = cfg.learning_rate * (b1 * m_hat + (1.0 - b1) * gi / c1) / (std::sqrt(v_hat) + cfg.epsilon);
      theta[i] = static_cast<float>(theta[i] - step);
    }
  }
}

BatchResult batch_gradient(const ModelParams& model, const std::vector<const TensorizedDocument*>& batch) {
  if (batch.empty()) throw std::invalid_argument("batch_gradient: empty batch");
  const std::size_t n = batch.size();
  const float weight = 1.0f / static_cast<float>(n);
  std::vector<Gradients<float>> sinks(n, Gradients<float>(model.params.size()));
  std::vector<double> losses(n, 0.0);
  std::vector<std::exception_ptr> errors(n);

#pragma omp parallel for schedule(dynamic, 1) num_threads(parallel::worker_count())
  for (std::size_t i = 0; i < n; ++i) {
    try {
      losses[i] = document_gradient(model, *batch[i], weight, sinks[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  BatchResult out;
  out.grads.resize(model.params.size());
  for (std::size_t p = 0; p < model.params.size(); ++p) out.grads[p].assign(model.params.values[p].size(), 0.0f);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sinks[i].add_to(out.grads, model.params);
    total += losses[i];
  }
  out.data_loss = total / static_cast<double>(n);
  return out;
}

void TrainHistory::write_csv(std::ostream& out) const {
  out << "epoch,train_loss,val_loss,val_acc\n";
  for (const auto& e : epochs) out << e.epoch << ',' << e.train_loss << ',' << e.val_loss << ',' << e.val_acc << '\n';
}

TrainHistory train(ModelParams& model, const std::vector<TensorizedDocument>& train_docs,
                   const std::vector<TensorizedDocument>& val_docs, const TrainConfig& cfg,
                   const EpochCallback& on_epoch) {
  cfg.validate();
  if (train_docs.empty()) throw std::invalid_argument("train: empty training set");
  for (const auto& d : train_docs) {
    check_document(model.config, d);
    if (d.label >= model.config.num_classes)
      throw std::out_of_range("train: label " + std::to_string(d.label) + " outside the " +
                              std::to_string(model.config.num_classes) + " classes");
  }

  TrainHistory history;
  OptimizerState state = OptimizerState::for_params(model.params);
  std::vector<std::size_t> order(train_docs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(cfg.seed);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double objective_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<const TensorizedDocument*> batch;
      for (std::size_t k = start; k < end; ++k) batch.push_back(&train_docs[order[k]]);
      BatchResult r = batch_gradient(model, batch);
      objective_sum += r.data_loss + l2_penalty(model.params, cfg.l2, cfg.l2_power);
      add_l2_gradient(model.params, cfg.l2, cfg.l2_power, r.grads);
      nadam_step(model.params, r.grads, state, cfg);
      ++batches;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = objective_sum / static_cast<double>(batches);
    if (val_docs.empty()) {
      rec.val_loss = std::numeric_limits<double>::quiet_NaN();
      rec.val_acc = std::numeric_limits<double>::quiet_NaN();
    } else {
      const EvalResult ev = evaluate(model, val_docs);
      rec.val_loss = ev.loss;
      rec.val_acc = ev.accuracy;
    }
    history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return history;
}

EvalResult evaluate(const ModelParams& model, const std::vector<TensorizedDocument>& docs) {
  if (docs.empty()) throw std::invalid_argument("evaluate: no documents");
  const std::size_t n = docs.size(), classes = model.config.num_classes;
  std::vector<std::size_t> predicted(n);
  std::vector<double> nll(n);
  std::vector<std::exception_ptr> errors(n);

#pragma omp parallel for schedule(dynamic, 1) num_threads(parallel::worker_count())
  for (std::size_t i = 0; i < n; ++i) {
    try {
      const Prediction p = predict(model, docs[i]);
      predicted[i] = p.label;
      if (docs[i].label >= classes) throw std::out_of_range("evaluate: label outside the model's classes");
      nll[i] = -std::log(std::max(static_cast<double>(p.probs[docs[i].label]), ops::kProbabilityFloor));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  EvalResult out;
  out.total = n;
  out.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
  std::size_t correct = 0;
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ++out.confusion[docs[i].label][predicted[i]];
    correct += predicted[i] == docs[i].label;
    loss += nll[i];
  }
  out.accuracy = static_cast<double>(correct) / static_cast<double>(n);
  out.loss = loss / static_cast<double>(n);
  return out;
}

Split split_data(const std::vector<std::size_t>& labels, double val_fraction, std::uint64_t seed) {
  const std::size_t n = labels.size();
  if (n < 2) throw std::invalid_argument("split_data: need at least two documents");
  if (!(val_fraction > 0.0 && val_fraction < 1.0))
    throw std::invalid_argument("split_data: val_fraction must lie strictly between 0 and 1");
  // ⌈(1−f)·n⌉ training documents, i.e. ⌊f·n⌋ for validation; the small slack
  // absorbs representation error in f·n.
  std::size_t n_val = static_cast<std::size_t>(std::floor(val_fraction * static_cast<double>(n) + 1e-9));
  n_val = std::clamp<std::size_t>(n_val, 1, n - 1);

  std::mt19937_64 rng(seed);
  std::map<std::size_t, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < n; ++i) by_label[labels[i]].push_back(i);
  bool stratify = true;
  for (const auto& [label, members] : by_label) stratify = stratify && members.size() >= 2;

  Split out;
  if (!stratify || n - n_val < by_label.size()) {
    // Stratification keeps one training document per author, which is
    // impossible with a single-document author or too small a training side.
    std::cerr << (stratify ? "warning: fewer training documents than authors; using an unstratified split\n"
                           : "warning: an author has a single document; using an unstratified split\n");
    out.stratified = false;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    out.train.assign(order.begin(), order.end() - static_cast<std::ptrdiff_t>(n_val));
    out.validation.assign(order.end() - static_cast<std::ptrdiff_t>(n_val), order.end());
    return out;
  }

  // Largest-remainder allocation of the validation size across labels, each
  // label keeping at least one training document.
  struct Quota {
    std::size_t label, count, cap;
    double remainder;
  };
  std::vector<Quota> quotas;
  std::size_t assigned = 0;
  for (const auto& [label, members] : by_label) {
    const double exact = static_cast<double>(n_val) * static_cast<double>(members.size()) / static_cast<double>(n);
    const std::size_t cap = members.size() - 1;
    const std::size_t base = std::min(cap, static_cast<std::size_t>(std::floor(exact + 1e-9)));
    quotas.push_back({label, base, cap, exact - static_cast<double>(base)});
    assigned += base;
  }
  std::vector<std::size_t> rank(quotas.size());
  std::iota(rank.begin(), rank.end(), std::size_t{0});
  std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) { return quotas[a].remainder > quotas[b].remainder; });
  while (assigned < n_val) {
    bool progressed = false;
    for (std::size_t r : rank) {
      if (assigned == n_val) break;
      if (quotas[r].count < quotas[r].cap) {
        ++quotas[r].count;
        ++assigned;
        progressed = true;
      }
    }
    if (!progressed) break;
  }

  for (const auto& q : quotas) {
    auto members = by_label[q.label];
    std::shuffle(members.begin(), members.end(), rng);
    out.validation.insert(out.validation.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(q.count));
    out.train.insert(out.train.end(), members.begin() + static_cast<std::ptrdiff_t>(q.count), members.end());
  }
  std::shuffle(out.train.begin(), out.train.end(), rng);
  std::shuffle(out.validation.begin(), out.validation.end(), rng);
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

ProtocolResult run_protocol(const std::vector<TensorizedDocument>& docs, const ModelFactory& make_model,
                            const TrainConfig& cfg, const std::vector<TensorizedDocument>* test_docs,
                            const RunCallback& on_run) {
  cfg.validate();
  std::vector<std::size_t> labels;
  for (const auto& d : docs) labels.push_back(d.label);

  ProtocolResult result;
  std::vector<double> accs;
  for (std::size_t run = 0; run < cfg.runs; ++run) {
    RunOutcome outcome;
    outcome.seed = cfg.seed + run;
    outcome.split = split_data(labels, cfg.val_fraction, outcome.seed);
    std::vector<TensorizedDocument> train_set, val_set;
    for (std::size_t i : outcome.split.train) train_set.push_back(docs[i]);
    for (std::size_t i : outcome.split.validation) val_set.push_back(docs[i]);

    TrainConfig run_cfg = cfg;
    run_cfg.seed = outcome.seed;
    ModelParams model = make_model(outcome.seed);
    outcome.history = train(model, train_set, val_set, run_cfg);
    const auto& scored = test_docs ? *test_docs : val_set;
    outcome.accuracy = evaluate(model, scored).accuracy;
    accs.push_back(outcome.accuracy);
    if (on_run) on_run(outcome, model, scored);
    result.runs.push_back(std::move(outcome));
  }
  const double n = static_cast<double>(accs.size());
  result.mean = std::accumulate(accs.begin(), accs.end(), 0.0) / n;
  double var = 0.0;
  for (double a : accs) var += (a - result.mean) * (a - result.mean);
  result.stddev = std::sqrt(var / n);
  result.median = median(accs);
  return result;
}

}  // namespace stylehan
