#include "tempoframe/preprocessing.hpp"

#include <algorithm>
#include <cmath>

#include "json_util.hpp"
#include "tempoframe/error.hpp"
#include "tempoframe/plugin.hpp"

namespace tempoframe::preprocessing {

using detail::ojson;

namespace {

std::vector<std::string> ids_of(const SampleFeatureIndex& c) { return {c.sample_ids().begin(), c.sample_ids().end()}; }
std::vector<FeatureSpec> specs_of(const SampleFeatureIndex& c) { return {c.features().begin(), c.features().end()}; }

// Accumulates observed values of one feature.
struct Tally {
  double sum = 0;
  std::size_t count = 0;
  std::map<std::string, std::size_t> labels;

  void add(const CellValue& v) {
    if (!v) return;
    ++count;
    if (const auto* s = std::get_if<std::string>(&*v)) {
      ++labels[*s];
    } else {
      sum += as_double(*v);
    }
  }

  CellValue fill(const ValueKind& kind) const {
    if (count == 0) return Missing;
    switch (kind.tag()) {
      case KindTag::Continuous:
        return real(sum / static_cast<double>(count));
      case KindTag::Integer:
        return integer(std::llround(sum / static_cast<double>(count)));
      case KindTag::Categorical: {
        // std::map iterates labels in lexicographic order, so the first maximum wins ties.
        const std::string* best = nullptr;
        std::size_t best_count = 0;
        for (const auto& [label, c] : labels) {
          if (c > best_count) {
            best = &label;
            best_count = c;
          }
        }
        return category(*best);
      }
    }
    return Missing;
  }
};

const CellValue& need_fill(const FillMap& fill, const std::string& feature) {
  auto it = fill.find(feature);
  if (it == fill.end() || !it->second) {
    fail(ErrorCode::AllMissingFeature, "feature '" + feature + "' had no observed training values to impute from");
  }
  return it->second;
}

}  // namespace

FillMap training_fill_values(const Dataset& ds) {
  FillMap out;
  if (const auto& s = ds.static_samples()) {
    for (std::size_t f = 0; f < s->num_features(); ++f) {
      Tally t;
      for (std::size_t i = 0; i < s->num_samples(); ++i) t.add(s->at(i, f));
      out[s->feature(f).id] = t.fill(s->feature(f).kind);
    }
  }
  if (const auto& ts = ds.temporal()) {
    for (std::size_t f = 0; f < ts->num_features(); ++f) {
      Tally t;
      for (std::size_t i = 0; i < ts->num_samples(); ++i) {
        for (const auto& p : ts->series(i, f)) t.add(p.value);
      }
      out[ts->feature(f).id] = t.fill(ts->feature(f).kind);
    }
  }
  return out;
}

Dataset mean_impute(const Dataset& ds, const FillMap& fill) {
  std::optional<StaticSamples> s;
  std::optional<TimeSeriesSamples> ts;
  if (const auto& in = ds.static_samples()) {
    std::vector<CellValue> cells;
    cells.reserve(in->num_samples() * in->num_features());
    for (std::size_t i = 0; i < in->num_samples(); ++i) {
      for (std::size_t f = 0; f < in->num_features(); ++f) {
        const auto& v = in->at(i, f);
        cells.push_back(v ? v : need_fill(fill, in->feature(f).id));
      }
    }
    s.emplace(ids_of(*in), specs_of(*in), std::move(cells));
  }
  if (const auto& in = ds.temporal()) {
    std::vector<std::vector<TimePoint>> series;
    for (std::size_t i = 0; i < in->num_samples(); ++i) {
      for (std::size_t f = 0; f < in->num_features(); ++f) {
        auto& out = series.emplace_back(in->series(i, f).begin(), in->series(i, f).end());
        for (auto& p : out) {
          if (!p.value) p.value = need_fill(fill, in->feature(f).id);
        }
      }
    }
    ts.emplace(ids_of(*in), specs_of(*in), std::move(series));
  }
  return assemble_dataset(std::move(s), std::move(ts), ds.events(), ds.roles());
}

Dataset locf_impute(const Dataset& ds, const FillMap& fallback) {
  const auto& in = ds.temporal();
  if (!in) fail(ErrorCode::RequirementUnmet, "LOCF imputation needs a temporal container", "missing_temporal");
  std::vector<std::vector<TimePoint>> series;
  for (std::size_t i = 0; i < in->num_samples(); ++i) {
    for (std::size_t f = 0; f < in->num_features(); ++f) {
      auto& out = series.emplace_back(in->series(i, f).begin(), in->series(i, f).end());
      CellValue last;
      for (auto& p : out) {
        if (p.value) {
          last = p.value;
        } else {
          p.value = last ? last : need_fill(fallback, in->feature(f).id);
        }
      }
    }
  }
  return with_temporal(ds, TimeSeriesSamples(ids_of(*in), specs_of(*in), std::move(series)), ds.roles());
}

ScalerState fit_zscore(const Dataset& ds, bool include_targets) {
  ScalerState state;
  auto eligible = [&](const FeatureSpec& f) {
    return f.kind.tag() == KindTag::Continuous && (include_targets || ds.roles().role_of(f.id) != Role::Target);
  };
  auto finish = [](const std::vector<double>& xs) {
    ScaleStats st;
    st.count = xs.size();
    if (xs.empty()) return st;
    double sum = 0;
    for (double x : xs) sum += x;
    st.mean = sum / static_cast<double>(xs.size());
    double ss = 0;
    for (double x : xs) ss += (x - st.mean) * (x - st.mean);
    st.stddev = std::sqrt(ss / static_cast<double>(xs.size()));
    return st;
  };
  std::vector<double> xs;
  if (const auto& s = ds.static_samples()) {
    for (std::size_t f = 0; f < s->num_features(); ++f) {
      if (!eligible(s->feature(f))) continue;
      xs.clear();
      for (std::size_t i = 0; i < s->num_samples(); ++i) {
        if (const auto& v = s->at(i, f)) xs.push_back(as_double(*v));
      }
      state[s->feature(f).id] = finish(xs);
    }
  }
  if (const auto& ts = ds.temporal()) {
    for (std::size_t f = 0; f < ts->num_features(); ++f) {
      if (!eligible(ts->feature(f))) continue;
      xs.clear();
      for (std::size_t i = 0; i < ts->num_samples(); ++i) {
        for (const auto& p : ts->series(i, f)) {
          if (p.value) xs.push_back(as_double(*p.value));
        }
      }
      state[ts->feature(f).id] = finish(xs);
    }
  }
  return state;
}

Dataset zscore(const Dataset& ds, const ScalerState& state) {
  auto scale = [](const CellValue& v, const ScaleStats& st) -> CellValue {
    if (!v) return v;
    if (st.stddev == 0) return real(0.0);
    return real((as_double(*v) - st.mean) / st.stddev);
  };
  std::optional<StaticSamples> s;
  std::optional<TimeSeriesSamples> ts;
  if (const auto& in = ds.static_samples()) {
    std::vector<const ScaleStats*> stats(in->num_features(), nullptr);
    for (std::size_t f = 0; f < in->num_features(); ++f) {
      if (auto it = state.find(in->feature(f).id); it != state.end()) stats[f] = &it->second;
    }
    std::vector<CellValue> cells;
    for (std::size_t i = 0; i < in->num_samples(); ++i) {
      for (std::size_t f = 0; f < in->num_features(); ++f) {
        cells.push_back(stats[f] ? scale(in->at(i, f), *stats[f]) : in->at(i, f));
      }
    }
    s.emplace(ids_of(*in), specs_of(*in), std::move(cells));
  }
  if (const auto& in = ds.temporal()) {
    std::vector<std::vector<TimePoint>> series;
    for (std::size_t i = 0; i < in->num_samples(); ++i) {
      for (std::size_t f = 0; f < in->num_features(); ++f) {
        auto& out = series.emplace_back(in->series(i, f).begin(), in->series(i, f).end());
        if (auto it = state.find(in->feature(f).id); it != state.end()) {
          for (auto& p : out) p.value = scale(p.value, it->second);
        }
      }
    }
    ts.emplace(ids_of(*in), specs_of(*in), std::move(series));
  }
  return assemble_dataset(std::move(s), std::move(ts), ds.events(), ds.roles());
}

Dataset one_hot_encode(const Dataset& ds,
                       const std::map<std::string, std::vector<std::string>, std::less<>>& categories) {
  std::vector<std::pair<std::string, Role>> roles;
  for (const auto& [f, r] : ds.roles().entries()) {
    if (!categories.contains(f)) roles.emplace_back(f, r);
  }

  // Expanded feature list plus, per output feature, (source feature, category index or npos).
  struct Slot {
    std::size_t source;
    std::size_t category;  // npos: copy the source cell
  };
  constexpr std::size_t kCopy = static_cast<std::size_t>(-1);
  auto expand = [&](const SampleFeatureIndex& c, std::vector<FeatureSpec>& specs, std::vector<Slot>& slots) {
    for (std::size_t f = 0; f < c.num_features(); ++f) {
      const auto& spec = c.feature(f);
      auto it = categories.find(spec.id);
      if (it == categories.end()) {
        specs.push_back(spec);
        slots.push_back({f, kCopy});
        continue;
      }
      const Role role = *ds.roles().role_of(spec.id);
      for (std::size_t k = 0; k < it->second.size(); ++k) {
        specs.push_back({spec.id + "=" + it->second[k], ValueKind::integer()});
        slots.push_back({f, k});
        roles.emplace_back(specs.back().id, role);
      }
    }
  };
  auto encode = [&](const CellValue& v, const Slot& slot, const SampleFeatureIndex& c) -> CellValue {
    if (slot.category == kCopy || !v) return v;
    const auto& cats = categories.at(c.feature(slot.source).id);
    const auto* label = std::get_if<std::string>(&*v);
    if (!label || std::find(cats.begin(), cats.end(), *label) == cats.end()) {
      fail(ErrorCode::UnseenCategory,
           "value '" + format_cell(v) + "' of feature '" + c.feature(slot.source).id + "' was not seen when fitting");
    }
    return integer(*label == cats[slot.category] ? 1 : 0);
  };

  std::optional<StaticSamples> s;
  std::optional<TimeSeriesSamples> ts;
  if (const auto& in = ds.static_samples()) {
    std::vector<FeatureSpec> specs;
    std::vector<Slot> slots;
    expand(*in, specs, slots);
    std::vector<CellValue> cells;
    for (std::size_t i = 0; i < in->num_samples(); ++i) {
      for (const auto& slot : slots) cells.push_back(encode(in->at(i, slot.source), slot, *in));
    }
    s.emplace(ids_of(*in), std::move(specs), std::move(cells));
  }
  if (const auto& in = ds.temporal()) {
    std::vector<FeatureSpec> specs;
    std::vector<Slot> slots;
    expand(*in, specs, slots);
    std::vector<std::vector<TimePoint>> series;
    for (std::size_t i = 0; i < in->num_samples(); ++i) {
      for (const auto& slot : slots) {
        auto& out = series.emplace_back();
        for (const auto& p : in->series(i, slot.source)) out.push_back({p.time, encode(p.value, slot, *in)});
      }
    }
    ts.emplace(ids_of(*in), std::move(specs), std::move(series));
  }
  return assemble_dataset(std::move(s), std::move(ts), ds.events(), RoleMap(roles));
}

TimeSeriesSamples resample_regular(const TimeSeriesSamples& ts, double step) {
  if (!(step > 0) || !std::isfinite(step)) fail(ErrorCode::InvalidStep, "resampling step must be positive");
  std::vector<std::vector<TimePoint>> series;
  for (std::size_t i = 0; i < ts.num_samples(); ++i) {
    for (std::size_t f = 0; f < ts.num_features(); ++f) {
      const auto in = ts.series(i, f);
      auto& out = series.emplace_back();
      if (in.empty()) continue;
      const double t0 = in.front().time;
      // Tolerance keeps a grid point that lands on t_max up to rounding.
      const auto last_k = static_cast<std::size_t>(std::floor((in.back().time - t0) / step + 1e-9));
      std::size_t next = 0;
      CellValue carried;
      for (std::size_t k = 0; k <= last_k; ++k) {
        const double t = t0 + static_cast<double>(k) * step;
        while (next < in.size() && in[next].time <= t) {
          if (in[next].value) carried = in[next].value;
          ++next;
        }
        out.push_back({t, carried});
      }
    }
  }
  return TimeSeriesSamples(ids_of(ts), specs_of(ts), std::move(series));
}

// --- plugins ----------------------------------------------------------------

namespace {

ojson fill_to_json(const FillMap& fill) {
  ojson j = ojson::object();
  for (const auto& [f, v] : fill) j[f] = detail::cell_to_json(v);
  return j;
}

FillMap fill_from_json(const ojson& j) {
  FillMap fill;
  for (const auto& [f, v] : j.items()) fill[f] = detail::cell_from_json(v);
  return fill;
}

class FittedFill final : public FittedModel {
 public:
  FittedFill(FillMap fill, bool locf) : fill_(std::move(fill)), locf_(locf) {}
  Dataset transform(const Dataset& ds) const override { return locf_ ? locf_impute(ds, fill_) : mean_impute(ds, fill_); }
  ojson state() const override { return {{"fill", fill_to_json(fill_)}}; }

 private:
  FillMap fill_;
  bool locf_;
};

class FillLearner final : public Learner {
 public:
  explicit FillLearner(bool locf) : locf_(locf) {}
  std::shared_ptr<const FittedModel> fit(const Dataset& ds) const override {
    if (locf_ && !ds.temporal()) {
      fail(ErrorCode::RequirementUnmet, "LOCF imputation needs a temporal container", "missing_temporal");
    }
    FillMap fill = training_fill_values(ds);
    if (locf_) {
      for (auto it = fill.begin(); it != fill.end();) {
        it = ds.temporal()->feature_index(it->first) ? std::next(it) : fill.erase(it);
      }
    } else {
      for (const auto& [f, v] : fill) {
        if (!v) fail(ErrorCode::AllMissingFeature, "feature '" + f + "' has no observed training values");
      }
    }
    return std::make_shared<FittedFill>(std::move(fill), locf_);
  }

 private:
  bool locf_;
};

class FittedScaler final : public FittedModel {
 public:
  explicit FittedScaler(ScalerState state) : state_(std::move(state)) {}
  Dataset transform(const Dataset& ds) const override { return zscore(ds, state_); }
  ojson state() const override {
    ojson j = ojson::object();
    for (const auto& [f, st] : state_) j[f] = {{"mean", st.mean}, {"stddev", st.stddev}, {"count", st.count}};
    return {{"features", j}};
  }
  static std::shared_ptr<const FittedModel> load(const ojson& j) {
    ScalerState state;
    for (const auto& [f, st] : j.at("features").items()) {
      state[f] = {st.at("mean").get<double>(), st.at("stddev").get<double>(), st.at("count").get<std::size_t>()};
    }
    return std::make_shared<FittedScaler>(std::move(state));
  }

 private:
  ScalerState state_;
};

class ScalerLearner final : public Learner {
 public:
  explicit ScalerLearner(bool include_targets) : include_targets_(include_targets) {}
  std::shared_ptr<const FittedModel> fit(const Dataset& ds) const override {
    return std::make_shared<FittedScaler>(fit_zscore(ds, include_targets_));
  }

 private:
  bool include_targets_;
};

using CategoryLists = std::map<std::string, std::vector<std::string>, std::less<>>;

class FittedOneHot final : public FittedModel {
 public:
  explicit FittedOneHot(CategoryLists cats) : cats_(std::move(cats)) {}
  Dataset transform(const Dataset& ds) const override { return one_hot_encode(ds, cats_); }
  ojson state() const override {
    ojson j = ojson::object();
    for (const auto& [f, c] : cats_) j[f] = c;
    return {{"categories", j}};
  }

 private:
  CategoryLists cats_;
};

class OneHotLearner final : public Learner {
 public:
  std::shared_ptr<const FittedModel> fit(const Dataset& ds) const override {
    CategoryLists cats;
    for (const auto& ref : ds.features()) {
      if (ref.modality != Modality::Event && ref.spec->kind.tag() == KindTag::Categorical) {
        cats[ref.spec->id] = ref.spec->kind.categories();
      }
    }
    return std::make_shared<FittedOneHot>(std::move(cats));
  }
};

class FittedResample final : public FittedModel {
 public:
  explicit FittedResample(double step) : step_(step) {}
  Dataset transform(const Dataset& ds) const override {
    if (!ds.temporal()) fail(ErrorCode::RequirementUnmet, "resampling needs a temporal container", "missing_temporal");
    return with_temporal(ds, resample_regular(*ds.temporal(), step_), ds.roles());
  }
  ojson state() const override { return {{"step", step_}}; }

 private:
  double step_;
};

class ResampleLearner final : public Learner {
 public:
  explicit ResampleLearner(double step) : step_(step) {
    if (!(step > 0)) fail(ErrorCode::InvalidStep, "resampling step must be positive");
  }
  std::shared_ptr<const FittedModel> fit(const Dataset& ds) const override {
    if (!ds.temporal()) fail(ErrorCode::RequirementUnmet, "resampling needs a temporal container", "missing_temporal");
    return std::make_shared<FittedResample>(step_);
  }

 private:
  double step_;
};

}  // namespace

void register_plugins(Registry& registry) {
  registry.register_plugin({
      .name = "impute.locf",
      .category = Category::Transform,
      .schema = {},
      .description = "carry the last observed value forward; leading gaps take the training mean",
      .make = [](const Params&) { return std::make_unique<FillLearner>(true); },
      .load = [](const ojson& j, const Params&, const Registry&) -> std::shared_ptr<const FittedModel> {
        return std::make_shared<FittedFill>(fill_from_json(j.at("fill")), true);
      },
  });
  registry.register_plugin({
      .name = "impute.mean",
      .category = Category::Transform,
      .schema = {},
      .description = "fill missing values with the training mean (mode for categorical)",
      .make = [](const Params&) { return std::make_unique<FillLearner>(false); },
      .load = [](const ojson& j, const Params&, const Registry&) -> std::shared_ptr<const FittedModel> {
        return std::make_shared<FittedFill>(fill_from_json(j.at("fill")), false);
      },
  });
  registry.register_plugin({
      .name = "scale.zscore",
      .category = Category::Transform,
      .schema = {HyperparamDef::boolean("include_targets", false)},
      .description = "standardize continuous features with training mean and population stddev",
      .make = [](const Params& p) { return std::make_unique<ScalerLearner>(p.boolean("include_targets")); },
      .load = [](const ojson& j, const Params&, const Registry&) { return FittedScaler::load(j); },
  });
  registry.register_plugin({
      .name = "encode.onehot",
      .category = Category::Transform,
      .schema = {},
      .description = "replace categorical features by 0/1 indicator features",
      .make = [](const Params&) { return std::make_unique<OneHotLearner>(); },
      .load = [](const ojson& j, const Params&, const Registry&) -> std::shared_ptr<const FittedModel> {
        CategoryLists cats;
        for (const auto& [f, c] : j.at("categories").items()) cats[f] = c.get<std::vector<std::string>>();
        return std::make_shared<FittedOneHot>(std::move(cats));
      },
  });
  registry.register_plugin({
      .name = "resample.regular",
      .category = Category::Transform,
      .schema = {HyperparamDef::real("step", 1.0, -1e300, 1e300)},
      .description = "resample each series onto a regular grid with carry-forward values",
      .make = [](const Params& p) { return std::make_unique<ResampleLearner>(p.real("step")); },
      .load = [](const ojson& j, const Params&, const Registry&) -> std::shared_ptr<const FittedModel> {
        return std::make_shared<FittedResample>(j.at("step").get<double>());
      },
  });
}

}  // namespace tempoframe::preprocessing
