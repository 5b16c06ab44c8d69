// Trial record serialization: schema-stable CSV and JSON with reproducible
// byte-for-byte output.  Floating-point cells carry 17 significant digits so
// dominance checks can be re-verified downstream; failed bounds serialize as
// nan (CSV) / null (JSON).  Wall time never enters the data stream -- it goes
// to the stderr run summary.

#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cli/config.hpp"

namespace perturb::cli {

using Record = nlohmann::ordered_json;

inline std::string format_cell(const Record& v) {
  if (v.is_null()) return "nan";
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isnan(d)) return "nan";
    if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), d, std::chars_format::general, 17);
    return std::string(buf, ptr);
  }
  return v.get<std::string>();
}

inline std::string render_csv(const std::vector<std::string>& columns,
                              const std::vector<Record>& records) {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out += ',';
    out += columns[i];
  }
  out += '\n';
  for (const auto& rec : records) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (i) out += ',';
      out += format_cell(rec.at(columns[i]));
    }
    out += '\n';
  }
  return out;
}

inline std::string render_json(const std::vector<Record>& records, const Record& summary) {
  Record doc;
  doc["records"] = records;
  doc["summary"] = summary;
  return doc.dump(1) + "\n";
}

inline void write_output(const CommonConfig& common, const std::vector<std::string>& columns,
                         const std::vector<Record>& records, const Record& summary) {
  const std::string payload = common.format == OutputFormat::Csv
                                  ? render_csv(columns, records)
                                  : render_json(records, summary);
  if (common.out.empty()) {
    std::cout << payload;
    return;
  }
  std::ofstream os(common.out, std::ios::binary);
  if (!os) throw ConfigError("cannot open output file " + common.out);
  os << payload;
}

}  // namespace perturb::cli
