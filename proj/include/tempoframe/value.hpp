#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tempoframe {

enum class KindTag { Continuous, Integer, Categorical };

std::string_view to_string(KindTag tag) noexcept;
KindTag kind_tag_from_string(std::string_view text);

/// Value type of a feature. Categorical kinds carry their declared category list.
class ValueKind {
 public:
  static ValueKind continuous() { return ValueKind(KindTag::Continuous, {}); }
  static ValueKind integer() { return ValueKind(KindTag::Integer, {}); }
  /// Throws InvalidKind for an empty, duplicated, or empty-string category list.
  static ValueKind categorical(std::vector<std::string> categories);

  KindTag tag() const noexcept { return tag_; }
  const std::vector<std::string>& categories() const noexcept { return categories_; }
  bool is_numeric() const noexcept { return tag_ != KindTag::Categorical; }

  /// Position of `category` in the declared list, or nullopt.
  std::optional<std::size_t> category_index(std::string_view category) const;

  bool operator==(const ValueKind&) const = default;

 private:
  ValueKind(KindTag tag, std::vector<std::string> categories)
      : tag_(tag), categories_(std::move(categories)) {}

  KindTag tag_;
  std::vector<std::string> categories_;
};

/// A concrete value: real, integer or category label.
using Scalar = std::variant<double, std::int64_t, std::string>;

/// A stored cell. `std::nullopt` is the missing sentinel.
using CellValue = std::optional<Scalar>;

inline constexpr std::nullopt_t Missing = std::nullopt;

inline CellValue real(double v) { return Scalar{v}; }
inline CellValue integer(std::int64_t v) { return Scalar{v}; }
inline CellValue category(std::string v) { return Scalar{std::move(v)}; }

/// True when `value` is Missing or matches `kind` (finite real, integer, or
/// declared category).
bool admits(const ValueKind& kind, const CellValue& value);

/// Numeric view of a concrete real or integer scalar. Throws NonNumericFeature
/// for category labels.
double as_double(const Scalar& value);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_real(double value);

/// Text form used by the bundle files. Missing renders as "".
std::string format_cell(const CellValue& value);

/// Inverse of format_cell under `kind`; "" parses to Missing. Throws
/// KindMismatch when the text is not a valid value of `kind`.
CellValue parse_cell(std::string_view text, const ValueKind& kind);

/// Strict decimal parse of a finite real; nullopt on any trailing garbage.
std::optional<double> parse_real(std::string_view text);

}  // namespace tempoframe
