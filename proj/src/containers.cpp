#include "tempoframe/containers.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "tempoframe/error.hpp"

namespace tempoframe {

namespace {

void check_kind(const FeatureSpec& feature, const CellValue& value, const std::string& sample) {
  if (!admits(feature.kind, value)) {
    fail(ErrorCode::KindMismatch, "value '" + format_cell(value) + "' for sample '" + sample +
                                      "' is not a valid " + std::string(to_string(feature.kind.tag())) +
                                      " value of feature '" + feature.id + "'");
  }
}

void check_time(double t) {
  if (!std::isfinite(t)) fail(ErrorCode::InvalidTime, "time index must be finite");
}

// Resolves sample and feature positions while building containers.
class RowIndexer {
 public:
  RowIndexer(const KindList& kinds, std::span<const std::string> sample_order)
      : fixed_order_(!sample_order.empty()) {
    for (std::size_t f = 0; f < kinds.size(); ++f) {
      if (!feature_pos_.emplace(kinds[f].id, f).second) {
        fail(ErrorCode::DuplicateFeature, "feature '" + kinds[f].id + "' declared twice");
      }
    }
    for (const auto& id : sample_order) {
      if (!sample_pos_.emplace(id, samples_.size()).second) {
        fail(ErrorCode::DuplicateCell, "sample '" + id + "' listed twice in sample order");
      }
      samples_.push_back(id);
    }
  }

  std::size_t feature(const std::string& id) const {
    auto it = feature_pos_.find(id);
    if (it == feature_pos_.end()) fail(ErrorCode::UnknownFeature, "feature '" + id + "' has no declared kind");
    return it->second;
  }

  std::size_t sample(const std::string& id) {
    auto it = sample_pos_.find(id);
    if (it != sample_pos_.end()) return it->second;
    if (fixed_order_) fail(ErrorCode::UnknownSample, "sample '" + id + "' is not in the sample order");
    sample_pos_.emplace(id, samples_.size());
    samples_.push_back(id);
    return samples_.size() - 1;
  }

  const std::string& sample_name(std::size_t i) const { return samples_[i]; }
  std::vector<std::string> take_samples() { return std::move(samples_); }
  std::size_t num_samples() const { return samples_.size(); }

 private:
  bool fixed_order_;
  std::map<std::string, std::size_t, std::less<>> feature_pos_;
  std::map<std::string, std::size_t, std::less<>> sample_pos_;
  std::vector<std::string> samples_;
};

}  // namespace

SampleFeatureIndex::SampleFeatureIndex(std::vector<std::string> sample_ids, std::vector<FeatureSpec> features)
    : sample_ids_(std::move(sample_ids)), features_(std::move(features)) {
  for (std::size_t i = 0; i < sample_ids_.size(); ++i) {
    if (!sample_pos_.emplace(sample_ids_[i], i).second) {
      fail(ErrorCode::DuplicateCell, "duplicate sample id '" + sample_ids_[i] + "'");
    }
  }
  for (std::size_t f = 0; f < features_.size(); ++f) {
    if (!feature_pos_.emplace(features_[f].id, f).second) {
      fail(ErrorCode::DuplicateFeature, "duplicate feature id '" + features_[f].id + "'");
    }
  }
}

std::optional<std::size_t> SampleFeatureIndex::sample_index(std::string_view id) const {
  auto it = sample_pos_.find(std::string(id));
  if (it == sample_pos_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> SampleFeatureIndex::feature_index(std::string_view id) const {
  auto it = feature_pos_.find(std::string(id));
  if (it == feature_pos_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::size_t> SampleFeatureIndex::sample_positions(std::span<const std::string> ids) const {
  std::vector<std::size_t> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto pos = sample_index(id);
    if (!pos) fail(ErrorCode::UnknownSample, "unknown sample '" + id + "'");
    out.push_back(*pos);
  }
  return out;
}

// ---------------------------------------------------------------------------

StaticSamples::StaticSamples(std::vector<std::string> ids, std::vector<FeatureSpec> specs,
                             std::vector<CellValue> data)
    : SampleFeatureIndex(std::move(ids), std::move(specs)), cells_(std::move(data)) {
  if (cells_.size() != num_samples() * num_features()) {
    fail(ErrorCode::KindMismatch, "static grid has " + std::to_string(cells_.size()) + " cells, expected " +
                                      std::to_string(num_samples() * num_features()));
  }
  for (std::size_t i = 0; i < num_samples(); ++i) {
    for (std::size_t f = 0; f < num_features(); ++f) check_kind(feature(f), at(i, f), sample_ids()[i]);
  }
}

std::vector<StaticRow> StaticSamples::to_rows() const {
  std::vector<StaticRow> rows;
  rows.reserve(cells_.size());
  for (std::size_t i = 0; i < num_samples(); ++i) {
    for (std::size_t f = 0; f < num_features(); ++f) {
      rows.push_back({sample_ids()[i], feature(f).id, at(i, f)});
    }
  }
  return rows;
}

TimeSeriesSamples::TimeSeriesSamples(std::vector<std::string> ids, std::vector<FeatureSpec> specs,
                                     std::vector<std::vector<TimePoint>> data)
    : SampleFeatureIndex(std::move(ids), std::move(specs)), series_(std::move(data)) {
  if (series_.size() != num_samples() * num_features()) {
    fail(ErrorCode::KindMismatch, "time series container has " + std::to_string(series_.size()) +
                                      " sequences, expected " + std::to_string(num_samples() * num_features()));
  }
  for (std::size_t i = 0; i < num_samples(); ++i) {
    for (std::size_t f = 0; f < num_features(); ++f) {
      const auto s = series(i, f);
      for (std::size_t k = 0; k < s.size(); ++k) {
        check_time(s[k].time);
        check_kind(feature(f), s[k].value, sample_ids()[i]);
        if (k > 0 && !(s[k - 1].time < s[k].time)) {
          fail(ErrorCode::DuplicateTimePoint, "times of sample '" + sample_ids()[i] + "' feature '" +
                                                  feature(f).id + "' are not strictly increasing");
        }
      }
    }
  }
}

std::vector<TimedRow> TimeSeriesSamples::to_rows() const {
  std::vector<TimedRow> rows;
  for (std::size_t i = 0; i < num_samples(); ++i) {
    for (std::size_t f = 0; f < num_features(); ++f) {
      for (const auto& p : series(i, f)) rows.push_back({sample_ids()[i], feature(f).id, p.time, p.value});
    }
  }
  return rows;
}

EventSamples::EventSamples(std::vector<std::string> ids, std::vector<FeatureSpec> specs,
                           std::vector<std::optional<EventEntry>> data)
    : SampleFeatureIndex(std::move(ids), std::move(specs)), entries_(std::move(data)) {
  if (entries_.size() != num_samples() * num_features()) {
    fail(ErrorCode::KindMismatch, "event container has " + std::to_string(entries_.size()) +
                                      " slots, expected " + std::to_string(num_samples() * num_features()));
  }
  for (std::size_t i = 0; i < num_samples(); ++i) {
    for (std::size_t f = 0; f < num_features(); ++f) {
      if (const auto& e = entry(i, f)) {
        check_time(e->time);
        check_kind(feature(f), e->value, sample_ids()[i]);
      }
    }
  }
}

std::vector<TimedRow> EventSamples::to_rows() const {
  std::vector<TimedRow> rows;
  for (std::size_t i = 0; i < num_samples(); ++i) {
    for (std::size_t f = 0; f < num_features(); ++f) {
      if (const auto& e = entry(i, f)) rows.push_back({sample_ids()[i], feature(f).id, e->time, e->value});
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------

StaticSamples build_static_samples(std::span<const StaticRow> rows, const KindList& kinds,
                                   std::span<const std::string> sample_order) {
  RowIndexer index(kinds, sample_order);
  // (sample, feature) -> value; sample positions grow as rows are read.
  std::map<std::pair<std::size_t, std::size_t>, CellValue> cells;
  for (const auto& row : rows) {
    const std::size_t f = index.feature(row.feature_id);
    const std::size_t i = index.sample(row.sample_id);
    check_kind(kinds[f], row.value, row.sample_id);
    if (!cells.emplace(std::pair{i, f}, row.value).second) {
      fail(ErrorCode::DuplicateCell,
           "sample '" + row.sample_id + "' feature '" + row.feature_id + "' appears more than once");
    }
  }
  const std::size_t n = index.num_samples();
  std::vector<CellValue> grid(n * kinds.size());
  for (auto& [key, value] : cells) grid[key.first * kinds.size() + key.second] = std::move(value);
  return StaticSamples(index.take_samples(), kinds, std::move(grid));
}

TimeSeriesSamples build_time_series_samples(std::span<const TimedRow> points, const KindList& kinds,
                                            std::span<const std::string> sample_order) {
  RowIndexer index(kinds, sample_order);
  std::map<std::pair<std::size_t, std::size_t>, std::vector<TimePoint>> seqs;
  for (const auto& p : points) {
    const std::size_t f = index.feature(p.feature_id);
    const std::size_t i = index.sample(p.sample_id);
    check_time(p.time);
    check_kind(kinds[f], p.value, p.sample_id);
    seqs[{i, f}].push_back({p.time, p.value});
  }
  const std::size_t n = index.num_samples();
  std::vector<std::vector<TimePoint>> series(n * kinds.size());
  for (auto& [key, seq] : seqs) {
    std::stable_sort(seq.begin(), seq.end(), [](const TimePoint& a, const TimePoint& b) { return a.time < b.time; });
    for (std::size_t k = 1; k < seq.size(); ++k) {
      if (seq[k - 1].time == seq[k].time) {
        fail(ErrorCode::DuplicateTimePoint, "sample '" + index.sample_name(key.first) + "' feature '" +
                                                kinds[key.second].id + "' has two points at time " +
                                                format_real(seq[k].time));
      }
    }
    series[key.first * kinds.size() + key.second] = std::move(seq);
  }
  return TimeSeriesSamples(index.take_samples(), kinds, std::move(series));
}

EventSamples build_event_samples(std::span<const TimedRow> entries, const KindList& kinds,
                                 std::span<const std::string> sample_order) {
  RowIndexer index(kinds, sample_order);
  std::map<std::pair<std::size_t, std::size_t>, EventEntry> slots;
  for (const auto& e : entries) {
    const std::size_t f = index.feature(e.feature_id);
    const std::size_t i = index.sample(e.sample_id);
    check_time(e.time);
    check_kind(kinds[f], e.value, e.sample_id);
    if (!slots.emplace(std::pair{i, f}, EventEntry{e.time, e.value}).second) {
      fail(ErrorCode::DuplicateEvent,
           "sample '" + e.sample_id + "' has more than one entry for event '" + e.feature_id + "'");
    }
  }
  const std::size_t n = index.num_samples();
  std::vector<std::optional<EventEntry>> slots_out(n * kinds.size());
  for (auto& [key, e] : slots) slots_out[key.first * kinds.size() + key.second] = std::move(e);
  return EventSamples(index.take_samples(), kinds, std::move(slots_out));
}

// ---------------------------------------------------------------------------

namespace {

std::vector<FeatureSpec> features_of(const SampleFeatureIndex& c) {
  return {c.features().begin(), c.features().end()};
}

}  // namespace

StaticSamples select(const StaticSamples& c, std::span<const std::string> ids) {
  const auto pos = c.sample_positions(ids);
  std::vector<CellValue> cells;
  cells.reserve(pos.size() * c.num_features());
  for (std::size_t i : pos) {
    for (std::size_t f = 0; f < c.num_features(); ++f) cells.push_back(c.at(i, f));
  }
  return StaticSamples({ids.begin(), ids.end()}, features_of(c), std::move(cells));
}

TimeSeriesSamples select(const TimeSeriesSamples& c, std::span<const std::string> ids) {
  const auto pos = c.sample_positions(ids);
  std::vector<std::vector<TimePoint>> series;
  series.reserve(pos.size() * c.num_features());
  for (std::size_t i : pos) {
    for (std::size_t f = 0; f < c.num_features(); ++f) {
      const auto s = c.series(i, f);
      series.emplace_back(s.begin(), s.end());
    }
  }
  return TimeSeriesSamples({ids.begin(), ids.end()}, features_of(c), std::move(series));
}

EventSamples select(const EventSamples& c, std::span<const std::string> ids) {
  const auto pos = c.sample_positions(ids);
  std::vector<std::optional<EventEntry>> entries;
  entries.reserve(pos.size() * c.num_features());
  for (std::size_t i : pos) {
    for (std::size_t f = 0; f < c.num_features(); ++f) entries.push_back(c.entry(i, f));
  }
  return EventSamples({ids.begin(), ids.end()}, features_of(c), std::move(entries));
}

TimeSeriesSamples time_window(const TimeSeriesSamples& ts, double lo, double hi) {
  if (!(lo <= hi)) fail(ErrorCode::InvalidWindow, "window [" + format_real(lo) + ", " + format_real(hi) + "] is empty");
  std::vector<std::vector<TimePoint>> series;
  series.reserve(ts.num_samples() * ts.num_features());
  for (std::size_t i = 0; i < ts.num_samples(); ++i) {
    for (std::size_t f = 0; f < ts.num_features(); ++f) {
      auto& out = series.emplace_back();
      for (const auto& p : ts.series(i, f)) {
        if (lo <= p.time && p.time <= hi) out.push_back(p);
      }
    }
  }
  return TimeSeriesSamples({ts.sample_ids().begin(), ts.sample_ids().end()}, features_of(ts), std::move(series));
}

StaticMask missing_mask(const StaticSamples& c) {
  StaticMask mask(c.num_samples(), std::vector<bool>(c.num_features()));
  for (std::size_t i = 0; i < c.num_samples(); ++i) {
    for (std::size_t f = 0; f < c.num_features(); ++f) mask[i][f] = !c.at(i, f).has_value();
  }
  return mask;
}

TimeSeriesMask missing_mask(const TimeSeriesSamples& c) {
  TimeSeriesMask mask(c.num_samples(), std::vector<std::vector<bool>>(c.num_features()));
  for (std::size_t i = 0; i < c.num_samples(); ++i) {
    for (std::size_t f = 0; f < c.num_features(); ++f) {
      for (const auto& p : c.series(i, f)) mask[i][f].push_back(!p.value.has_value());
    }
  }
  return mask;
}

EventMask missing_mask(const EventSamples& c) {
  EventMask mask(c.num_samples(), std::vector<std::optional<bool>>(c.num_features()));
  for (std::size_t i = 0; i < c.num_samples(); ++i) {
    for (std::size_t f = 0; f < c.num_features(); ++f) {
      if (const auto& e = c.entry(i, f)) mask[i][f] = e->censored();
    }
  }
  return mask;
}

}  // namespace tempoframe
