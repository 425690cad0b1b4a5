#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tempoframe/value.hpp"

namespace tempoframe {

struct FeatureSpec {
  std::string id;
  ValueKind kind;

  bool operator==(const FeatureSpec&) const = default;
};

/// Ordered feature declarations. Container feature order follows this order.
using KindList = std::vector<FeatureSpec>;

/// Long-form static data point (i, f_s, x_s).
struct StaticRow {
  std::string sample_id;
  std::string feature_id;
  CellValue value;

  bool operator==(const StaticRow&) const = default;
};

/// Long-form timed data point (i, f, t, x), used by both time series and events.
struct TimedRow {
  std::string sample_id;
  std::string feature_id;
  double time = 0.0;
  CellValue value;

  bool operator==(const TimedRow&) const = default;
};

struct TimePoint {
  double time = 0.0;
  CellValue value;

  bool operator==(const TimePoint&) const = default;
};

struct EventEntry {
  double time = 0.0;
  CellValue value;  // Missing => censored at `time`

  bool censored() const noexcept { return !value.has_value(); }
  bool operator==(const EventEntry&) const = default;
};

/// Shared sample/feature index of every modality container. Containers only
/// expose read accessors so the physical layout stays private to each class.
class SampleFeatureIndex {
 public:
  std::span<const std::string> sample_ids() const noexcept { return sample_ids_; }
  std::span<const FeatureSpec> features() const noexcept { return features_; }
  std::size_t num_samples() const noexcept { return sample_ids_.size(); }
  std::size_t num_features() const noexcept { return features_.size(); }
  const FeatureSpec& feature(std::size_t f) const { return features_.at(f); }

  std::optional<std::size_t> sample_index(std::string_view id) const;
  std::optional<std::size_t> feature_index(std::string_view id) const;

  /// Positions of `ids` in this index; throws UnknownSample.
  std::vector<std::size_t> sample_positions(std::span<const std::string> ids) const;

 protected:
  SampleFeatureIndex() = default;
  SampleFeatureIndex(std::vector<std::string> sample_ids, std::vector<FeatureSpec> features);

  bool same_index(const SampleFeatureIndex& other) const {
    return sample_ids_ == other.sample_ids_ && features_ == other.features_;
  }

 private:
  std::vector<std::string> sample_ids_;
  std::vector<FeatureSpec> features_;
  std::unordered_map<std::string, std::size_t> sample_pos_;
  std::unordered_map<std::string, std::size_t> feature_pos_;
};

class StaticSamples : public SampleFeatureIndex {
 public:
  StaticSamples() = default;
  /// `cells` is sample-major, N x F. Throws KindMismatch / DuplicateFeature /
  /// DuplicateCell(duplicate sample id).
  StaticSamples(std::vector<std::string> sample_ids, std::vector<FeatureSpec> features,
                std::vector<CellValue> cells);

  const CellValue& at(std::size_t sample, std::size_t feature) const {
    return cells_[sample * num_features() + feature];
  }

  /// One row per cell, sample-major, including Missing cells.
  std::vector<StaticRow> to_rows() const;

  bool operator==(const StaticSamples& other) const {
    return same_index(other) && cells_ == other.cells_;
  }

 private:
  std::vector<CellValue> cells_;
};

class TimeSeriesSamples : public SampleFeatureIndex {
 public:
  TimeSeriesSamples() = default;
  /// `series` is sample-major, one sequence per (sample, feature). Times must be
  /// finite and strictly increasing within each sequence.
  TimeSeriesSamples(std::vector<std::string> sample_ids, std::vector<FeatureSpec> features,
                    std::vector<std::vector<TimePoint>> series);

  std::span<const TimePoint> series(std::size_t sample, std::size_t feature) const {
    return series_[sample * num_features() + feature];
  }

  std::vector<TimedRow> to_rows() const;

  bool operator==(const TimeSeriesSamples& other) const {
    return same_index(other) && series_ == other.series_;
  }

 private:
  std::vector<std::vector<TimePoint>> series_;
};

class EventSamples : public SampleFeatureIndex {
 public:
  EventSamples() = default;
  EventSamples(std::vector<std::string> sample_ids, std::vector<FeatureSpec> features,
               std::vector<std::optional<EventEntry>> entries);

  const std::optional<EventEntry>& entry(std::size_t sample, std::size_t feature) const {
    return entries_[sample * num_features() + feature];
  }

  std::vector<TimedRow> to_rows() const;

  bool operator==(const EventSamples& other) const {
    return same_index(other) && entries_ == other.entries_;
  }

 private:
  std::vector<std::optional<EventEntry>> entries_;
};

// Builders. Samples are ordered by first appearance in the input unless
// `sample_order` is non-empty, in which case that order is used verbatim and
// rows naming other samples are rejected with UnknownSample. Features follow
// the declaration order of `kinds`; declared features without rows are kept
// (as Missing / empty).

StaticSamples build_static_samples(std::span<const StaticRow> rows, const KindList& kinds,
                                   std::span<const std::string> sample_order = {});

TimeSeriesSamples build_time_series_samples(std::span<const TimedRow> points, const KindList& kinds,
                                            std::span<const std::string> sample_order = {});

EventSamples build_event_samples(std::span<const TimedRow> entries, const KindList& kinds,
                                 std::span<const std::string> sample_order = {});

/// Restrict to `ids` in the given order. Throws UnknownSample.
StaticSamples select(const StaticSamples& c, std::span<const std::string> ids);
TimeSeriesSamples select(const TimeSeriesSamples& c, std::span<const std::string> ids);
EventSamples select(const EventSamples& c, std::span<const std::string> ids);

/// Keep points with lo <= t <= hi. Throws InvalidWindow when lo > hi.
TimeSeriesSamples time_window(const TimeSeriesSamples& ts, double lo, double hi);

using StaticMask = std::vector<std::vector<bool>>;                // [sample][feature]
using TimeSeriesMask = std::vector<std::vector<std::vector<bool>>>;  // [sample][feature][point]
using EventMask = std::vector<std::vector<std::optional<bool>>>;  // nullopt: no entry

StaticMask missing_mask(const StaticSamples& c);
TimeSeriesMask missing_mask(const TimeSeriesSamples& c);
EventMask missing_mask(const EventSamples& c);

}  // namespace tempoframe
