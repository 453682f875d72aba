#include "support/surrogate_data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "zomgt/rng.hpp"

namespace zomgt::testsupport {

namespace {
constexpr int kRawDim = 123;
constexpr int kActivePerSample = 14;
}  // namespace

std::string surrogate_libsvm_text(int n_samples, std::uint64_t seed) {
  CounterRng rng(seed, 0, 0);
  std::vector<double> weights(kRawDim);
  for (auto& w : weights) w = rng.next_gaussian();

  // Threshold tuned for roughly one positive per four samples, matching the
  // census data's class balance.
  const double threshold =
      0.67 * std::sqrt(static_cast<double>(kActivePerSample) + 1.0);

  std::ostringstream os;
  for (int s = 0; s < n_samples; ++s) {
    std::vector<int> active;
    while (static_cast<int>(active.size()) < kActivePerSample) {
      const int idx = static_cast<int>(rng.next_u64() % kRawDim) + 1;
      if (std::find(active.begin(), active.end(), idx) == active.end())
        active.push_back(idx);
    }
    std::sort(active.begin(), active.end());
    double score = rng.next_gaussian();  // label noise
    for (int idx : active) score += weights[idx - 1];
    os << (score > threshold ? "+1" : "-1");
    for (int idx : active) os << " " << idx << ":1";
    os << "\n";
  }
  return os.str();
}

bool have_real_a9a() {
  return std::filesystem::exists(
      std::filesystem::path(ZOMGT_SOURCE_DIR) / "data" / "a9a");
}

Dataset acceptance_dataset(int subsample) {
  Dataset ds;
  if (have_real_a9a()) {
    std::ifstream is(std::filesystem::path(ZOMGT_SOURCE_DIR) / "data" / "a9a");
    ds = parse_libsvm(is, kRawDim);
  } else {
    const int n = subsample > 0 ? subsample : 32561;
    std::istringstream is(surrogate_libsvm_text(n, 0xa9aULL));
    ds = parse_libsvm(is, kRawDim);
  }
  if (subsample > 0 && subsample < static_cast<int>(ds.samples.size()))
    ds.samples.resize(subsample);
  return ds;
}

}  // namespace zomgt::testsupport
