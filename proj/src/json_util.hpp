#pragma once

#include <json.hpp>

#include "tempoframe/error.hpp"
#include "tempoframe/value.hpp"

namespace tempoframe::detail {

using ojson = nlohmann::ordered_json;

inline ojson cell_to_json(const CellValue& v) {
  if (!v) return nullptr;
  if (const auto* d = std::get_if<double>(&*v)) return {{"r", *d}};
  if (const auto* i = std::get_if<std::int64_t>(&*v)) return {{"i", *i}};
  return {{"c", std::get<std::string>(*v)}};
}

inline CellValue cell_from_json(const ojson& j) {
  if (j.is_null()) return Missing;
  if (j.contains("r")) return real(j.at("r").get<double>());
  if (j.contains("i")) return integer(j.at("i").get<std::int64_t>());
  if (j.contains("c")) return category(j.at("c").get<std::string>());
  fail(ErrorCode::CorruptBlob, "malformed cell value " + j.dump());
}

}  // namespace tempoframe::detail
