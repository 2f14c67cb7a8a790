#include "alignlab/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "alignlab/error.hpp"
#include "alignlab/parallel.hpp"

namespace alignlab {

namespace {

void require_positive_n(int n) {
  if (n < 1) throw DomainError("number of candidates n must be at least 1");
}

BlockModel single_symbol_model(const FiniteDistribution& p, const RewardFunction& r) {
  return BlockModel(p, r, 1);
}

}  // namespace

CategoricalTable::CategoricalTable(std::span<const double> probs) {
  if (probs.empty()) throw DomainError("categorical over an empty alphabet");
  cumulative_.resize(probs.size());
  double running = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    running += probs[i];
    cumulative_[i] = running;
  }
  // Pin the total so u in [0, 1) always lands; trailing zero-mass symbols
  // share the previous cumulative value and are never selected.
  std::size_t last = probs.size() - 1;
  while (last > 0 && probs[last] == 0.0) --last;
  for (std::size_t i = last; i < cumulative_.size(); ++i) cumulative_[i] = 1.0;
}

std::size_t CategoricalTable::draw(CounterRng& rng) const {
  const double u = rng.uniform();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return static_cast<std::size_t>(it - cumulative_.begin());
}

const char* to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::BestOfN: return "bon";
    case SamplerKind::SoftBestOfN: return "soft_bon";
    case SamplerKind::BlockwiseSoftBestOfN: return "blockwise";
    case SamplerKind::BlockwiseBestOfN: return "blockwise_bon";
    case SamplerKind::SymbolwiseBestOfN: return "symbolwise_bon";
  }
  return "unknown";
}

bool SamplerConfig::draws_sequences() const noexcept {
  return kind == SamplerKind::BlockwiseSoftBestOfN || kind == SamplerKind::BlockwiseBestOfN ||
         kind == SamplerKind::SymbolwiseBestOfN;
}

std::uint64_t SamplerConfig::outcome_count() const {
  if (!draws_sequences()) return model.alphabet_size();
  return model.sequence_count();
}

Sampler::Sampler(SamplerConfig config)
    : config_(std::move(config)), table_(config_.model.base().probs()) {
  require_positive_n(config_.n);
  if (config_.kind == SamplerKind::SoftBestOfN ||
      config_.kind == SamplerKind::BlockwiseSoftBestOfN) {
    Temperature checked(config_.lambda);
    (void)checked;
  }
  const auto& r = config_.model.reward();
  scaled_reward_.resize(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) scaled_reward_[i] = r[i] / config_.lambda;
}

std::size_t Sampler::best_of_n_symbol(CounterRng& rng) const {
  const auto& r = config_.model.reward();
  double best = -std::numeric_limits<double>::infinity();
  std::size_t choice = 0;
  std::uint64_t ties = 0;
  for (int i = 0; i < config_.n; ++i) {
    const std::size_t x = table_.draw(rng);
    if (r[x] > best) {
      best = r[x];
      choice = x;
      ties = 1;
    } else if (r[x] == best) {
      // Reservoir step: keeps each maximizing index with probability 1/ties.
      ++ties;
      if (rng.below(ties) == 0) choice = x;
    }
  }
  return choice;
}

std::size_t Sampler::soft_best_of_n_symbol(CounterRng& rng) const {
  double best = -std::numeric_limits<double>::infinity();
  std::size_t choice = 0;
  for (int i = 0; i < config_.n; ++i) {
    const std::size_t x = table_.draw(rng);
    const double key = scaled_reward_[x] + rng.gumbel();
    if (key > best) {
      best = key;
      choice = x;
    }
  }
  return choice;
}

void Sampler::blockwise(CounterRng& rng, bool soft, Sequence& out) const {
  const int m = config_.model.m();
  Sequence candidate(static_cast<std::size_t>(m));
  double best = -std::numeric_limits<double>::infinity();
  std::uint64_t ties = 0;
  for (int i = 0; i < config_.n; ++i) {
    for (auto& x : candidate) x = table_.draw(rng);
    const double reward = config_.model.reward_of(candidate);
    if (soft) {
      const double key = reward / config_.lambda + rng.gumbel();
      if (key > best) {
        best = key;
        out = candidate;
      }
    } else if (reward > best) {
      best = reward;
      out = candidate;
      ties = 1;
    } else if (reward == best) {
      ++ties;
      if (rng.below(ties) == 0) out = candidate;
    }
  }
}

Sequence Sampler::draw_sequence(CounterRng& rng) const {
  Sequence out;
  switch (config_.kind) {
    case SamplerKind::BestOfN:
      out.push_back(best_of_n_symbol(rng));
      break;
    case SamplerKind::SoftBestOfN:
      out.push_back(soft_best_of_n_symbol(rng));
      break;
    case SamplerKind::BlockwiseSoftBestOfN:
      blockwise(rng, true, out);
      break;
    case SamplerKind::BlockwiseBestOfN:
      blockwise(rng, false, out);
      break;
    case SamplerKind::SymbolwiseBestOfN:
      out.resize(static_cast<std::size_t>(config_.model.m()));
      for (auto& x : out) x = best_of_n_symbol(rng);
      break;
  }
  return out;
}

std::size_t Sampler::draw_outcome(CounterRng& rng) const {
  switch (config_.kind) {
    case SamplerKind::BestOfN: return best_of_n_symbol(rng);
    case SamplerKind::SoftBestOfN: return soft_best_of_n_symbol(rng);
    default: return encode_sequence(draw_sequence(rng), config_.model.alphabet_size());
  }
}

std::size_t encode_sequence(std::span<const std::size_t> sequence, std::size_t alphabet_size) {
  std::size_t index = 0;
  for (std::size_t x : sequence) index = index * alphabet_size + x;
  return index;
}

Sequence decode_sequence(std::size_t index, std::size_t alphabet_size, int m) {
  Sequence out(static_cast<std::size_t>(m));
  for (int i = m - 1; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = index % alphabet_size;
    index /= alphabet_size;
  }
  return out;
}

std::size_t sample_bon(const FiniteDistribution& p, const RewardFunction& r, int n,
                       RngSeed seed) {
  Sampler sampler({SamplerKind::BestOfN, single_symbol_model(p, r), n, 1.0});
  CounterRng rng(seed);
  return sampler.draw_outcome(rng);
}

std::size_t sample_soft_bon(const FiniteDistribution& p, const RewardFunction& r,
                            Temperature lam, int n, RngSeed seed) {
  Sampler sampler({SamplerKind::SoftBestOfN, single_symbol_model(p, r), n, lam.value()});
  CounterRng rng(seed);
  return sampler.draw_outcome(rng);
}

Sequence sample_blockwise_soft_bon(const BlockModel& block, Temperature lam, int n,
                                   RngSeed seed) {
  Sampler sampler({SamplerKind::BlockwiseSoftBestOfN, block, n, lam.value()});
  CounterRng rng(seed);
  return sampler.draw_sequence(rng);
}

Sequence sample_blockwise_bon(const BlockModel& block, int n, RngSeed seed) {
  Sampler sampler({SamplerKind::BlockwiseBestOfN, block, n, 1.0});
  CounterRng rng(seed);
  return sampler.draw_sequence(rng);
}

Sequence sample_symbolwise_bon(const BlockModel& block, int n, RngSeed seed) {
  Sampler sampler({SamplerKind::SymbolwiseBestOfN, block, n, 1.0});
  CounterRng rng(seed);
  return sampler.draw_sequence(rng);
}

std::vector<double> EmpiricalDistribution::frequencies() const {
  std::vector<double> out(counts.size(), 0.0);
  if (total == 0) return out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  }
  return out;
}

EmpiricalDistribution estimate_distribution(const SamplerConfig& config, std::uint64_t draws,
                                            RngSeed seed, unsigned workers) {
  if (draws < 1) throw DomainError("estimate_distribution needs at least one draw");
  const std::uint64_t outcomes = config.outcome_count();
  if (outcomes > kMaxSequences) {
    throw BudgetError("empirical distribution over " + std::to_string(outcomes) +
                          " outcomes exceeds the materialization limit",
                      outcomes, kMaxSequences);
  }
  const Sampler sampler(config);
  workers = std::max(1u, workers);
  std::vector<std::vector<std::uint64_t>> partial(
      workers, std::vector<std::uint64_t>(static_cast<std::size_t>(outcomes), 0));
  parallel_chunks(static_cast<std::size_t>(draws), workers,
                  [&](std::size_t begin, std::size_t end, unsigned chunk) {
                    auto& counts = partial[chunk];
                    for (std::size_t i = begin; i < end; ++i) {
                      CounterRng rng({seed.seed, seed.stream + i});
                      ++counts[sampler.draw_outcome(rng)];
                    }
                  });
  EmpiricalDistribution out;
  out.counts.assign(static_cast<std::size_t>(outcomes), 0);
  for (const auto& counts : partial) {
    for (std::size_t i = 0; i < counts.size(); ++i) out.counts[i] += counts[i];
  }
  out.total = draws;
  return out;
}

}  // namespace alignlab
