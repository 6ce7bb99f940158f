// Shared helpers for the test suites: independent oracles (finite
// differences, rank correlation) and small filesystem utilities. These stay
// deliberately separate from the library implementations they check.

#ifndef TOVD_TESTS_SUPPORT_HPP
#define TOVD_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "tovd/losses.hpp"
#include "tovd/rng.hpp"

namespace tovd_test {

// Central finite differences of the loss w.r.t. logits. Independent of
// grad_logits: only the loss *value* path is exercised.
inline std::vector<double> finite_diff_grad(const tovd::LossKind& kind,
                                            std::vector<double> logits, int y,
                                            double h = 1e-5) {
  std::vector<double> grad(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) {
    const double keep = logits[k];
    logits[k] = keep + h;
    const double up = tovd::loss_from_logits(kind, logits, y);
    logits[k] = keep - h;
    const double down = tovd::loss_from_logits(kind, logits, y);
    logits[k] = keep;
    grad[k] = (up - down) / (2.0 * h);
  }
  return grad;
}

inline double rel_error(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline double max_rel_error(const std::vector<double>& a,
                            const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, rel_error(a[i], b[i]));
  return worst;
}

// average ranks for ties
inline std::vector<double> ranks(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> r(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

inline double pearson(const std::vector<double>& a,
                      const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double cov = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  if (va <= 0 || vb <= 0) return 0.0;
  return cov / std::sqrt(va * vb);
}

inline double spearman(const std::vector<double>& a,
                       const std::vector<double>& b) {
  return pearson(ranks(a), ranks(b));
}

// RAII temp directory under the system temp path
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("tovd_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& leaf) const {
    return (path_ / leaf).string();
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string write_file(const std::string& path,
                              const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace tovd_test

#endif  // TOVD_TESTS_SUPPORT_HPP
