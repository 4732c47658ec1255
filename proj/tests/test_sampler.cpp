#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "dmr/set_sampler.hpp"

using namespace dmr;

TEST_CASE("sampler init: zero and one probabilities") {
  std::vector<Fp> zeros(10, Fp::zero());
  SetSampler s0(10, zeros, 1);
  for (uint32_t i = 0; i < 10; ++i) CHECK(s0.next_fire(i) == 11);

  std::vector<Fp> ones(10, Fp::one());
  SetSampler s1(10, ones, 1);
  for (uint32_t i = 0; i < 10; ++i) CHECK(s1.next_fire(i) == 1);
}

TEST_CASE("sampler rejects bad probabilities") {
  std::vector<Fp> p(4, Fp::pow2(1));
  SetSampler s(4, p, 2);
  CHECK_THROWS_AS(s.set(0, Fp::from_raw(kSamplerPMin.raw() - 1)), ParameterError);
  CHECK_THROWS_AS(s.set(9, Fp::pow2(1)), ParameterError);
  s.set(0, Fp::zero());
  CHECK(s.next_fire(0) == 5);
}

TEST_CASE("sampler set: boundary behavior") {
  std::vector<Fp> p(6, Fp::pow2(2));
  SetSampler s(6, p, 3);
  s.set(2, Fp::zero());
  CHECK(s.next_fire(2) == 7);  // never fires
  s.set(3, Fp::one());
  CHECK(s.next_fire(3) == s.tau());  // fires at the first opportunity
}

TEST_CASE("sampler: all-zero and all-one sample outputs") {
  std::vector<Fp> zeros(8, Fp::zero());
  SetSampler s0(8, zeros, 4);
  for (int t = 0; t < 30; ++t) CHECK(s0.sample().empty());

  std::vector<Fp> ones(8, Fp::one());
  SetSampler s1(8, ones, 4);
  for (int t = 0; t < 30; ++t) CHECK(s1.sample().size() == 8);
}

TEST_CASE("sampler: structural invariant under interleaved fuzz") {
  std::mt19937_64 rng(99);
  uint32_t n = 50;
  std::vector<Fp> p(n);
  for (auto& x : p)
    x = Fp::from_raw(std::uniform_int_distribution<uint64_t>(
        kSamplerPMin.raw(), kOneRaw)(rng));
  for (auto mode : {GeometricMode::skip, GeometricMode::bernoulli}) {
    SetSampler s(n, p, 7, mode);
    s.verify();
    for (int op = 0; op < 5000; ++op) {
      if (std::uniform_int_distribution<int>(0, 2)(rng) == 0) {
        uint32_t i = std::uniform_int_distribution<uint32_t>(0, n - 1)(rng);
        uint64_t raw = std::uniform_int_distribution<uint64_t>(
            kSamplerPMin.raw(), kOneRaw)(rng);
        if (std::uniform_int_distribution<int>(0, 4)(rng) == 0) raw = 0;
        s.set(i, Fp::from_raw(raw));
      } else {
        s.sample();
      }
      s.verify();
    }
  }
}

TEST_CASE("sampler: geometric firing distribution matches alpha(1-alpha)^k") {
  // alpha = 0.3, tau = 1, n = 50; chi-square over first buckets, 1e5 trials.
  const int trials = 100000;
  Fp alpha = parse_fp("0.3");
  const int kbuckets = 12;
  for (auto mode : {GeometricMode::skip, GeometricMode::bernoulli}) {
    std::vector<Fp> p(50, Fp::zero());
    SetSampler s(50, p, 12345, mode);
    std::vector<long> count(kbuckets + 1, 0);  // 1..kbuckets, [0] = beyond
    for (int t = 0; t < trials; ++t) {
      s.set(7, alpha);
      uint32_t j = s.next_fire(7);
      if (j >= 1 && j <= kbuckets)
        count[j]++;
      else
        count[0]++;
    }
    double chi2 = 0;
    double tail = trials;
    for (int j = 1; j <= kbuckets; ++j) {
      double pj = 0.3 * std::pow(0.7, j - 1);
      double expect = trials * pj;
      chi2 += (count[j] - expect) * (count[j] - expect) / expect;
      tail -= expect;
    }
    chi2 += (count[0] - tail) * (count[0] - tail) / tail;
    // df = 12, upper critical value at significance 1e-3 is 32.91.
    CHECK(chi2 < 32.91);
  }
}

TEST_CASE("sampler: per-element marginals and pairwise correlation") {
  const uint32_t n = 20;
  const int trials = 20000;
  std::vector<Fp> p(n, Fp::pow2(1));
  SetSampler s(n, p, 777);
  std::vector<long> hits(n, 0);
  std::vector<std::vector<long>> both(n, std::vector<long>(n, 0));
  for (int t = 0; t < trials; ++t) {
    auto out = s.sample();
    for (uint32_t i : out) hits[i]++;
    for (size_t a = 0; a < out.size(); ++a)
      for (size_t b = a + 1; b < out.size(); ++b)
        both[std::min(out[a], out[b])][std::max(out[a], out[b])]++;
  }
  for (uint32_t i = 0; i < n; ++i) {
    double f = static_cast<double>(hits[i]) / trials;
    CHECK(f > 0.48);
    CHECK(f < 0.52);
  }
  // Pairwise correlation estimate; |rho| < 0.03 at this sample size.
  for (uint32_t a = 0; a < n; ++a)
    for (uint32_t b = a + 1; b < n; ++b) {
      double pa = static_cast<double>(hits[a]) / trials;
      double pb = static_cast<double>(hits[b]) / trials;
      double pab = static_cast<double>(both[a][b]) / trials;
      double var_a = pa * (1 - pa), var_b = pb * (1 - pb);
      double rho = (pab - pa * pb) / std::sqrt(var_a * var_b);
      CHECK(std::abs(rho) < 0.03);
    }
}

TEST_CASE("sampler: output-adaptive adversary keeps unreturned marginals") {
  // Adversary re-randomizes returned elements' probabilities after each
  // sample; the untouched element 0 must stay Bernoulli(1/2).
  const uint32_t n = 16;
  const int trials = 20000;
  std::vector<Fp> p(n, Fp::pow2(1));
  SetSampler s(n, p, 31337);
  std::mt19937_64 rng(5);
  long hits0 = 0;
  for (int t = 0; t < trials; ++t) {
    auto out = s.sample();
    for (uint32_t i : out) {
      if (i == 0) {
        hits0++;
        continue;  // element 0 keeps p = 1/2
      }
      uint64_t raw = std::uniform_int_distribution<uint64_t>(kSamplerPMin.raw(),
                                                             kOneRaw)(rng);
      s.set(i, Fp::from_raw(raw));
    }
  }
  double f = static_cast<double>(hits0) / trials;
  CHECK(f > 0.48);
  CHECK(f < 0.52);
}

TEST_CASE("sampler: amortized operation count stays linear") {
  std::mt19937_64 rng(6);
  double per_op[2];
  int idx = 0;
  for (uint32_t n : {100u, 10000u}) {
    std::vector<Fp> p(n, Fp::pow2(2));
    SetSampler s(n, p, 42);
    uint64_t start_ops = s.operation_count();
    size_t total_out = 0;
    int ops = 4 * static_cast<int>(n);
    for (int t = 0; t < ops; ++t) {
      if (t % 4 == 0) {
        uint32_t i = std::uniform_int_distribution<uint32_t>(0, n - 1)(rng);
        s.set(i, Fp::pow2(2));
      } else {
        total_out += s.sample().size();
      }
    }
    double denom = static_cast<double>(ops) + n + static_cast<double>(total_out);
    per_op[idx++] =
        static_cast<double>(s.operation_count() - start_ops) / denom;
  }
  CHECK(per_op[1] < 2.5 * per_op[0] + 0.5);
}
