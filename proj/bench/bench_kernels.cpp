// Serial reference kernels against their OpenMP versions, plus one
// end-to-end batch gradient. Thread count follows OMP_NUM_THREADS /
// STYLEHAN_THREADS.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "stylehan/kernels.hpp"
#include "stylehan/model.hpp"
#include "stylehan/trainer.hpp"

using namespace stylehan;

namespace {

std::vector<float> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<float> v(n);
  for (float& x : v) x = u(rng);
  return v;
}

template <bool Parallel>
void BM_Gemm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_vector(n * n, 1), b = random_vector(n * n, 2);
  std::vector<float> c(n * n);
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::omp::gemm<float>({a.data(), n, n}, {b.data(), n, n}, c.data(), false);
    else
      kernels::serial::gemm<float>({a.data(), n, n}, {b.data(), n, n}, c.data(), false);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n * n * n));
}

// One sentence of n words, d = 100, 100 filters of width 5.
template <bool Parallel>
void BM_ConvForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  constexpr std::size_t d = 100, filters = 100, r = 5;
  const auto s = random_vector(n * d, 3), w = random_vector(filters * r * d, 4), bias = random_vector(filters, 5);
  std::vector<float> out(filters * (n - r + 1));
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::omp::conv_bank_forward(s.data(), n, d, w.data(), bias.data(), filters, r, out.data());
    else
      kernels::serial::conv_bank_forward(s.data(), n, d, w.data(), bias.data(), filters, r, out.data());
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(filters * (n - r + 1) * r * d));
}

template <bool Parallel>
void BM_ConvBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  constexpr std::size_t d = 100, filters = 100, r = 5;
  const std::size_t len = n - r + 1;
  const auto s = random_vector(n * d, 3), w = random_vector(filters * r * d, 4), g = random_vector(filters * len, 6);
  std::vector<float> ds(n * d), dw(filters * r * d), db(filters);
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::omp::conv_bank_backward(g.data(), s.data(), n, d, w.data(), filters, r, ds.data(), dw.data(), db.data());
    else
      kernels::serial::conv_bank_backward(g.data(), s.data(), n, d, w.data(), filters, r, ds.data(), dw.data(),
                                          db.data());
    benchmark::DoNotOptimize(ds.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(2 * filters * len * r * d));
}

// Forward + backward of a 32-document batch at the desk-scale model size.
void BM_BatchGradient(benchmark::State& state) {
  ModelConfig cfg;
  cfg.sentences_per_doc = 16;
  cfg.words_per_sentence = 12;
  cfg.d_w = cfg.d_p = cfg.filters_per_size = cfg.lstm_hidden = 16;
  cfg.attention_dim = 32;
  cfg.num_classes = 4;
  constexpr std::size_t vocab = 500;
  ModelParams model = create_model(cfg, vocab);
  initialize_model(model, 1);
  std::mt19937_64 rng(7);
  std::vector<TensorizedDocument> docs(32);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    auto& doc = docs[i];
    doc.grid = cfg.grid();
    doc.label = i % cfg.num_classes;
    doc.word_ids.assign(cfg.sentences_per_doc * cfg.words_per_sentence, 0);
    doc.tag_ids.assign(doc.word_ids.size(), 0);
    doc.sentence_mask.assign(cfg.sentences_per_doc, 1);
    for (std::size_t k = 0; k < doc.word_ids.size(); ++k) {
      doc.word_ids[k] = 1 + rng() % (vocab - 1);
      doc.tag_ids[k] = 1 + rng() % TagSet::kTagCount;
    }
  }
  std::vector<const TensorizedDocument*> batch;
  for (const auto& d : docs) batch.push_back(&d);
  for (auto _ : state) benchmark::DoNotOptimize(batch_gradient(model, batch).data_loss);
  state.SetItemsProcessed(state.iterations() * static_cast<long>(batch.size()));
}

}  // namespace

BENCHMARK(BM_Gemm<false>)->Name("gemm/serial")->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_Gemm<true>)->Name("gemm/omp")->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_ConvForward<false>)->Name("conv_forward/serial")->Arg(30)->Arg(120);
BENCHMARK(BM_ConvForward<true>)->Name("conv_forward/omp")->Arg(30)->Arg(120);
BENCHMARK(BM_ConvBackward<false>)->Name("conv_backward/serial")->Arg(30)->Arg(120);
BENCHMARK(BM_ConvBackward<true>)->Name("conv_backward/omp")->Arg(30)->Arg(120);
BENCHMARK(BM_BatchGradient)->Name("batch_gradient/32docs")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
