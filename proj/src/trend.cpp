#include "semidecay/trend.hpp"

#include <algorithm>
#include <cmath>

namespace semidecay {

namespace {

std::vector<double> running_sup(const std::vector<double>& values) {
  std::vector<double> m;
  double best = 0.0;
  for (double v : values) {
    best = std::max(best, v);
    m.push_back(best);
  }
  return m;
}

}  // namespace

const char* to_string(Trend trend) noexcept {
  switch (trend) {
    case Trend::Stable:
      return "stable";
    case Trend::Growing:
      return "growing";
    case Trend::Undetermined:
      return "undetermined";
  }
  return "undetermined";
}

double trend_spread(const std::vector<double>& values) {
  const auto m = running_sup(values);
  if (m.size() < 5) return 0.0;
  const double last = m.back();
  if (last == 0.0) return 0.0;
  return (last - m[m.size() - 5]) / last;
}

Trend classify_trend(const std::vector<double>& values) {
  for (double v : values) {
    if (!std::isfinite(v)) return Trend::Growing;
  }
  const auto m = running_sup(values);
  if (m.size() < 5) return Trend::Undetermined;
  const std::size_t J = m.size() - 1;
  if (m[J] > 1.25 * m[J - 3]) return Trend::Growing;
  if (m[J] == 0.0 || trend_spread(values) < 0.1) return Trend::Stable;
  return Trend::Undetermined;
}

}  // namespace semidecay
