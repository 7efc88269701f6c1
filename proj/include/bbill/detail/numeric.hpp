#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace bbill::detail {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Maximizer of a unimodal function on [a, b] by golden-section search.
// Stops when the bracket is below rel_tol * max(1, |x|).
template <typename F>
std::pair<double, double> golden_section_max(F&& f, double a, double b,
                                             double rel_tol = 1e-12) {
  constexpr double kInvPhi = 0.6180339887498948482;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < 200; ++it) {
    if (std::abs(b - a) <= rel_tol * std::max(1.0, std::abs(a))) break;
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    }
  }
  return f1 > f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

// Dense periodic scan of f on [0, 1) followed by golden-section refinement of
// every local maximum of the samples. Returns (argmax, max).
template <typename F>
std::pair<double, double> periodic_max(F&& f, int grid_n) {
  std::vector<double> v(static_cast<std::size_t>(grid_n));
  const double h = 1.0 / grid_n;
  for (int i = 0; i < grid_n; ++i) v[static_cast<std::size_t>(i)] = f(i * h);
  std::pair<double, double> best{0.0, -std::numeric_limits<double>::infinity()};
  for (int i = 0; i < grid_n; ++i) {
    const double prev = v[static_cast<std::size_t>((i + grid_n - 1) % grid_n)];
    const double next = v[static_cast<std::size_t>((i + 1) % grid_n)];
    const double cur = v[static_cast<std::size_t>(i)];
    if (cur < prev || cur < next) continue;
    auto cand = golden_section_max(f, (i - 1) * h, (i + 1) * h);
    if (cur > cand.second) cand = {i * h, cur};
    if (cand.second > best.second) best = cand;
  }
  if (!std::isfinite(best.second)) {
    // constant samples
    best = {0.0, v.front()};
  }
  best.first -= std::floor(best.first);
  return best;
}

struct RootResult {
  double x = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

// Root of a strictly monotone f on (lo, hi) with f(lo), f(hi) of opposite
// sign. Newton steps with derivative df are taken when they stay inside the
// current bracket, bisection otherwise. Terminates when |f| <= ftol or the
// bracket cannot shrink further in floating point.
template <typename F, typename DF>
RootResult safeguarded_root(F&& f, DF&& df, double lo, double hi, double ftol,
                            double guess = std::numeric_limits<double>::quiet_NaN(),
                            int max_iter = 300) {
  double flo = f(lo);
  double fhi = f(hi);
  RootResult out;
  if (flo == 0.0) return {lo, 0.0, 0};
  if (fhi == 0.0) return {hi, 0.0, 0};
  const bool increasing = fhi > flo;
  double x = (guess > lo && guess < hi) ? guess : 0.5 * (lo + hi);
  for (int it = 0; it < max_iter; ++it) {
    out.iterations = it + 1;
    const double fx = f(x);
    if (std::abs(fx) <= ftol || fx == 0.0) {
      return {x, fx, it + 1};
    }
    if ((fx > 0.0) == increasing) {
      hi = x;
    } else {
      lo = x;
    }
    const double d = df(x);
    double next = (d != 0.0 && std::isfinite(d)) ? x - fx / d : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x || next <= lo || next >= hi) {
      // bracket exhausted at double resolution
      return {x, fx, it + 1};
    }
    x = next;
  }
  out.x = x;
  out.residual = f(x);
  return out;
}

// Uniform double in [0, 1) from a 64-bit engine, independent of the standard
// library's distribution implementation (keeps runs bit-reproducible).
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

// Worker cap from BB_THREADS, defaulting to hardware concurrency.
inline unsigned worker_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("BB_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(std::min<long>(v, 1024));
    } catch (...) {
    }
  }
  return hw;
}

// Calls fn(i) for i in [0, n). Work is split in contiguous blocks; the result
// does not depend on the number of workers as long as fn(i) only writes slot i.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t block = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * block;
      const std::size_t end = std::min(n, begin + block);
      if (begin >= end) break;
      pool.emplace_back([&fn, &errors, w, begin, end] {
        try {
          for (std::size_t i = begin; i < end; ++i) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace bbill::detail
