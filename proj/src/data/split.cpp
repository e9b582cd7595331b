#include "lemon/data/split.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "lemon/util/errors.hpp"
#include "lemon/util/rng.hpp"

namespace lemon::data {

SplitIndices split_dataset(const std::vector<std::string>& categories,
                           const std::array<double, 3>& ratios, std::uint64_t seed) {
  const double rsum = ratios[0] + ratios[1] + ratios[2];
  require(std::abs(rsum - 1.0) <= 1e-9, "split ratios must sum to 1");
  for (double r : ratios) require(r >= 0.0, "split ratios must be nonnegative");

  int nonzero_splits = 0;
  for (double r : ratios)
    if (r > 0) ++nonzero_splits;

  std::map<std::string, std::vector<std::int64_t>> by_cat;
  for (size_t i = 0; i < categories.size(); ++i)
    by_cat[categories[i]].push_back(static_cast<std::int64_t>(i));

  SplitIndices out;
  Rng master(seed);
  std::uint64_t cat_tag = 0;
  for (auto& [cat, idx] : by_cat) {
    Rng rng = master.fork(cat_tag++);
    rng.shuffle(idx);
    const std::int64_t n = static_cast<std::int64_t>(idx.size());
    if (n < nonzero_splits) {
      std::fprintf(stderr,
                   "lemon: category '%s' has %lld samples, fewer than %d splits; "
                   "assigning all to train\n",
                   cat.c_str(), static_cast<long long>(n), nonzero_splits);
      out.train.insert(out.train.end(), idx.begin(), idx.end());
      continue;
    }
    // largest-remainder allocation
    std::int64_t counts[3];
    double frac[3];
    std::int64_t used = 0;
    for (int s = 0; s < 3; ++s) {
      const double exact = ratios[s] * double(n);
      counts[s] = static_cast<std::int64_t>(std::floor(exact));
      frac[s] = exact - double(counts[s]);
      used += counts[s];
    }
    while (used < n) {
      int best = 0;
      for (int s = 1; s < 3; ++s)
        if (frac[s] > frac[best]) best = s;
      ++counts[best];
      frac[best] = -1;
      ++used;
    }
    std::int64_t pos = 0;
    std::vector<std::int64_t>* dests[3] = {&out.train, &out.val, &out.test};
    for (int s = 0; s < 3; ++s)
      for (std::int64_t i = 0; i < counts[s]; ++i)
        dests[s]->push_back(idx[static_cast<size_t>(pos++)]);
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

}  // namespace lemon::data
