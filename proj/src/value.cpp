#include "tempoframe/value.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "tempoframe/error.hpp"

namespace tempoframe {

std::string_view to_string(KindTag tag) noexcept {
  switch (tag) {
    case KindTag::Continuous: return "continuous";
    case KindTag::Integer: return "integer";
    case KindTag::Categorical: return "categorical";
  }
  return "continuous";
}

KindTag kind_tag_from_string(std::string_view text) {
  if (text == "continuous") return KindTag::Continuous;
  if (text == "integer") return KindTag::Integer;
  if (text == "categorical") return KindTag::Categorical;
  fail(ErrorCode::InvalidKind, "unknown value kind '" + std::string(text) + "'");
}

ValueKind ValueKind::categorical(std::vector<std::string> categories) {
  if (categories.empty()) fail(ErrorCode::InvalidKind, "categorical kind needs at least one category");
  std::set<std::string_view> seen;
  for (const auto& c : categories) {
    if (c.empty()) fail(ErrorCode::InvalidKind, "empty category label");
    if (!seen.insert(c).second) fail(ErrorCode::InvalidKind, "duplicate category '" + c + "'");
  }
  return ValueKind(KindTag::Categorical, std::move(categories));
}

std::optional<std::size_t> ValueKind::category_index(std::string_view category) const {
  auto it = std::find(categories_.begin(), categories_.end(), category);
  if (it == categories_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - categories_.begin());
}

bool admits(const ValueKind& kind, const CellValue& value) {
  if (!value) return true;
  switch (kind.tag()) {
    case KindTag::Continuous: {
      const auto* v = std::get_if<double>(&*value);
      return v != nullptr && std::isfinite(*v);
    }
    case KindTag::Integer:
      return std::holds_alternative<std::int64_t>(*value);
    case KindTag::Categorical: {
      const auto* v = std::get_if<std::string>(&*value);
      return v != nullptr && kind.category_index(*v).has_value();
    }
  }
  return false;
}

double as_double(const Scalar& value) {
  if (const auto* d = std::get_if<double>(&value)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&value)) return static_cast<double>(*i);
  fail(ErrorCode::NonNumericFeature, "category label '" + std::get<std::string>(value) + "' used as a number");
}

std::string format_real(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

std::string format_cell(const CellValue& value) {
  if (!value) return {};
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_real(v);
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else {
          return v;
        }
      },
      *value);
}

std::optional<double> parse_real(std::string_view text) {
  if (text.empty()) return std::nullopt;
  const char* first = text.data();
  if (*first == '+') ++first;
  double out = 0;
  auto [ptr, ec] = std::from_chars(first, text.data() + text.size(), out);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(out)) return std::nullopt;
  return out;
}

CellValue parse_cell(std::string_view text, const ValueKind& kind) {
  if (text.empty()) return Missing;
  switch (kind.tag()) {
    case KindTag::Continuous: {
      if (auto v = parse_real(text)) return real(*v);
      break;
    }
    case KindTag::Integer: {
      std::int64_t out = 0;
      const char* first = text.data();
      if (*first == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, text.data() + text.size(), out);
      if (ec == std::errc() && ptr == text.data() + text.size()) return integer(out);
      break;
    }
    case KindTag::Categorical:
      if (kind.category_index(text)) return category(std::string(text));
      break;
  }
  fail(ErrorCode::KindMismatch,
       "'" + std::string(text) + "' is not a valid " + std::string(to_string(kind.tag())) + " value");
}

}  // namespace tempoframe
