#pragma once

#include <string>
#include <vector>

namespace semidecay {

enum class Trend { Stable, Growing, Undetermined };

const char* to_string(Trend trend) noexcept;

/// Classifies the running sup M_i = max(values[0..i]) over successive
/// refinements. Growing: M_J > 1.25 M_{J-3}. Stable: the last five running
/// sups vary by less than 10%. Fewer than five samples are undetermined.
Trend classify_trend(const std::vector<double>& values);

/// Relative spread of the last five running sups (0 when fewer samples).
double trend_spread(const std::vector<double>& values);

}  // namespace semidecay
