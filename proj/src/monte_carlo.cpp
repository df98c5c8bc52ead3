#include <algorithm>
#include <cmath>
#include <exception>
#include <cstdlib>
#include <numbers>
#include <string>
#include <thread>

#include "lltomo/error.hpp"
#include "lltomo/numerics.hpp"

namespace lltomo {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

struct StratumStats {
  double sum = 0.0;
  double sumsq = 0.0;  // of deviations from the running mean (Welford M2)
  std::size_t n = 0;
};

// Fixed-shape pairwise reduction: result depends only on the input order.
template <class T, class Op>
T tree_reduce(std::vector<T> v, Op op) {
  if (v.empty()) return T{};
  while (v.size() > 1) {
    std::vector<T> next;
    next.reserve((v.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < v.size(); i += 2) next.push_back(op(v[i], v[i + 1]));
    if (v.size() % 2 == 1) next.push_back(v.back());
    v = std::move(next);
  }
  return v.front();
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      stream_(stream),
      counter_(counter) {}

void CounterRng::refill() {
  block_ = philox4x32_10({static_cast<std::uint32_t>(counter_),
                          static_cast<std::uint32_t>(counter_ >> 32),
                          static_cast<std::uint32_t>(stream_),
                          static_cast<std::uint32_t>(stream_ >> 32)},
                         key_);
  ++counter_;
  used_ = 0;
}

std::uint64_t CounterRng::next_u64() {
  if (used_ > 2) refill();
  const std::uint64_t v =
      (static_cast<std::uint64_t>(block_[used_]) << 32) | block_[used_ + 1];
  used_ += 2;
  return v;
}

double CounterRng::uniform() {
  // 53 random bits, shifted off zero.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() {
  const double u1 = uniform(), u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void MCConfig::validate() const {
  if (n_samples < 1000) throw DomainError("MC needs at least 1000 samples");
  if (n_strata == 0 || n_samples % n_strata != 0) {
    throw DomainError("MC strata must divide the sample count evenly");
  }
  if (n_samples / n_strata < 2) {
    throw DomainError("MC needs at least two samples per stratum for a variance estimate");
  }
}

std::size_t default_thread_count() {
  if (const char* env = std::getenv("LLTOMO_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (...) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = default_thread_count();
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < n; i += threads) body(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<MCResult> mc_estimate_multi(const MultiIntegrand& f, std::size_t n_out,
                                        const Sampler& sampler, const MCConfig& config) {
  config.validate();
  if (n_out == 0) throw DomainError("MC needs at least one integrand component");
  const std::size_t per = config.n_samples / config.n_strata;
  // stats[s * n_out + k]: component k in stratum s.
  std::vector<StratumStats> stats(config.n_strata * n_out);

  parallel_for(config.n_strata, config.threads, [&](std::size_t s) {
    CounterRng rng(config.seed, s);
    std::vector<double> x(sampler.dim), fx(n_out), mean(n_out, 0.0), m2(n_out, 0.0);
    for (std::size_t i = 0; i < per; ++i) {
      const double q = sampler.draw(s, config.n_strata, rng, x);
      if (!(q > 0.0) || !std::isfinite(q)) {
        throw SamplerError("sampler returned a non-positive density");
      }
      f(x, fx);
      const double cnt = static_cast<double>(i + 1);
      for (std::size_t k = 0; k < n_out; ++k) {
        const double w = fx[k] / q;
        const double delta = w - mean[k];
        mean[k] += delta / cnt;
        m2[k] += delta * (w - mean[k]);
      }
    }
    for (std::size_t k = 0; k < n_out; ++k) stats[s * n_out + k] = {mean[k], m2[k], per};
  });

  auto plus = [](double a, double b) { return a + b; };
  std::vector<MCResult> out(n_out);
  std::vector<double> values(config.n_strata), vars(config.n_strata);
  for (std::size_t k = 0; k < n_out; ++k) {
    for (std::size_t s = 0; s < config.n_strata; ++s) {
      const StratumStats& st = stats[s * n_out + k];
      values[s] = st.sum;
      vars[s] = st.sumsq / static_cast<double>(st.n - 1) / static_cast<double>(st.n);
    }
    out[k].value = tree_reduce(values, plus);
    out[k].std_err = std::sqrt(tree_reduce(vars, plus));
    out[k].n_samples = config.n_samples;
  }
  return out;
}

MCResult mc_estimate(const std::function<double(std::span<const double>)>& f,
                     const Sampler& sampler, const MCConfig& config) {
  return mc_estimate_multi([&](std::span<const double> x, std::span<double> out) { out[0] = f(x); },
                           1, sampler, config)
      .front();
}

}  // namespace lltomo
