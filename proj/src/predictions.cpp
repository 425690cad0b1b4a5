#include "tempoframe/predictions.hpp"

#include <algorithm>

namespace tempoframe {

double SurvivalCurve::at(double t) const {
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
  if (it == breakpoints.begin()) return 1.0;
  return values[static_cast<std::size_t>(it - breakpoints.begin()) - 1];
}

std::vector<std::string> sample_ids_of(const Predictions& p) {
  return std::visit(
      [](const auto& out) -> std::vector<std::string> {
        using T = std::decay_t<decltype(out)>;
        if constexpr (std::is_same_v<T, StaticOutput> || std::is_same_v<T, ForecastOutput>) {
          return {out.values.sample_ids().begin(), out.values.sample_ids().end()};
        } else {
          return out.sample_ids;
        }
      },
      p);
}

}  // namespace tempoframe
