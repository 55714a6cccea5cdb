#include "uuaudit/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <system_error>

#include <json.hpp>

#include "uuaudit/errors.hpp"

namespace uuaudit {
namespace {

using json = nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line,
                                        std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (quoted) {
    throw ValidationError("line " + std::to_string(line_no) +
                          ": unterminated quoted field");
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string quote_csv(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

double parse_double(const std::string& text, const std::string& what,
                    const std::string& row_id) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ValidationError("row '" + row_id + "': cannot parse " + what +
                          " value '" + text + "'");
  }
  return value;
}

AuditData finish(std::vector<TestPoint> points, GroundTruth truth,
                 const LoadOptions& options) {
  return AuditData(TestSet(std::move(points), options.critical_class),
                   std::move(truth));
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

DataFormat format_from_path(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".csv") return DataFormat::csv;
  if (ext == ".jsonl" || ext == ".ndjson") return DataFormat::jsonl;
  throw ConfigError("cannot infer data format from '" + path.string() +
                    "' (expected .csv or .jsonl)");
}

DataFormat parse_format(std::string_view name) {
  if (name == "csv") return DataFormat::csv;
  if (name == "jsonl") return DataFormat::jsonl;
  throw ConfigError("unknown data format '" + std::string(name) + "'");
}

AuditData read_csv(std::istream& in, const LoadOptions& options) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    header = split_csv_line(line, line_no);
    break;
  }
  if (header.empty()) throw SchemaError("missing CSV header");

  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col.emplace(header[i], i);
  auto require = [&](const std::string& name) {
    auto it = col.find(name);
    if (it == col.end()) throw SchemaError("missing column '" + name + "'");
    return it->second;
  };
  const std::size_t id_col = require("id");
  const std::size_t conf_col = require("confidence");
  const std::size_t pred_col = require("predicted_class");
  std::vector<std::size_t> feature_cols;
  while (true) {
    auto it = col.find("f" + std::to_string(feature_cols.size()));
    if (it == col.end()) break;
    feature_cols.push_back(it->second);
  }
  if (feature_cols.empty()) throw SchemaError("missing column 'f0'");
  for (const auto& [name, idx] : col) {
    if (name.size() > 1 && name[0] == 'f' &&
        std::all_of(name.begin() + 1, name.end(),
                    [](char c) { return c >= '0' && c <= '9'; })) {
      if (std::stoul(name.substr(1)) >= feature_cols.size()) {
        throw SchemaError("missing column 'f" +
                          std::to_string(feature_cols.size()) + "'");
      }
    }
  }
  auto optional_col = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = col.find(name);
    if (it == col.end()) return std::nullopt;
    return it->second;
  };
  const auto truth_col = optional_col("true_label");
  const auto uri_col = optional_col("display_uri");

  std::vector<TestPoint> points;
  GroundTruth truth;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line, line_no);
    if (fields.size() != header.size()) {
      throw DimensionError("line " + std::to_string(line_no) + ": expected " +
                           std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()));
    }
    TestPoint pt;
    pt.id = fields[id_col];
    pt.features.reserve(feature_cols.size());
    for (std::size_t j = 0; j < feature_cols.size(); ++j) {
      pt.features.push_back(
          parse_double(fields[feature_cols[j]], "f" + std::to_string(j), pt.id));
    }
    pt.confidence = parse_double(fields[conf_col], "confidence", pt.id);
    pt.predicted_class = fields[pred_col];
    if (uri_col && !fields[*uri_col].empty()) pt.display_uri = fields[*uri_col];
    if (truth_col && !fields[*truth_col].empty()) {
      truth.emplace_back(fields[*truth_col]);
    } else {
      truth.emplace_back(std::nullopt);
    }
    points.push_back(std::move(pt));
  }
  return finish(std::move(points), std::move(truth), options);
}

AuditData read_jsonl(std::istream& in, const LoadOptions& options) {
  std::vector<TestPoint> points;
  GroundTruth truth;
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!obj.is_object()) {
      throw SchemaError("line " + std::to_string(line_no) +
                        ": expected a JSON object");
    }
    for (const char* key : {"id", "features", "confidence", "predicted_class"}) {
      if (!obj.contains(key)) {
        throw SchemaError("line " + std::to_string(line_no) +
                          ": missing column '" + key + "'");
      }
    }
    TestPoint pt;
    try {
      pt.id = obj.at("id").get<std::string>();
      pt.features = obj.at("features").get<std::vector<double>>();
      pt.confidence = obj.at("confidence").get<double>();
      pt.predicted_class = obj.at("predicted_class").get<std::string>();
      if (obj.contains("display_uri") && !obj["display_uri"].is_null()) {
        pt.display_uri = obj["display_uri"].get<std::string>();
      }
      if (obj.contains("true_label") && !obj["true_label"].is_null()) {
        truth.emplace_back(obj["true_label"].get<std::string>());
      } else {
        truth.emplace_back(std::nullopt);
      }
    } catch (const json::type_error& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (points.empty()) dim = pt.features.size();
    if (pt.features.size() != dim) {
      throw DimensionError("line " + std::to_string(line_no) + ": point '" +
                           pt.id + "' has " +
                           std::to_string(pt.features.size()) +
                           " features, expected " + std::to_string(dim));
    }
    points.push_back(std::move(pt));
  }
  return finish(std::move(points), std::move(truth), options);
}

AuditData load_testset(const std::filesystem::path& path, DataFormat format,
                       const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return format == DataFormat::csv ? read_csv(in, options)
                                   : read_jsonl(in, options);
}

AuditData load_testset(const std::filesystem::path& path,
                       const LoadOptions& options) {
  return load_testset(path, format_from_path(path), options);
}

void write_csv(std::ostream& out, const AuditData& data) {
  const TestSet& ts = data.set;
  const bool has_truth = std::any_of(data.truth.begin(), data.truth.end(),
                                     [](const auto& t) { return t.has_value(); });
  const bool has_uri =
      std::any_of(ts.points().begin(), ts.points().end(),
                  [](const TestPoint& p) { return p.display_uri.has_value(); });
  out << "id";
  for (std::size_t j = 0; j < ts.dim(); ++j) out << ",f" << j;
  out << ",confidence,predicted_class";
  if (has_truth) out << ",true_label";
  if (has_uri) out << ",display_uri";
  out << '\n';
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const TestPoint& pt = ts[i];
    out << quote_csv(pt.id);
    for (double f : pt.features) out << ',' << format_double(f);
    out << ',' << format_double(pt.confidence) << ','
        << quote_csv(pt.predicted_class);
    if (has_truth) out << ',' << quote_csv(data.truth[i].value_or(""));
    if (has_uri) out << ',' << quote_csv(pt.display_uri.value_or(""));
    out << '\n';
  }
}

void write_jsonl(std::ostream& out, const AuditData& data) {
  const TestSet& ts = data.set;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const TestPoint& pt = ts[i];
    nlohmann::ordered_json obj;
    obj["id"] = pt.id;
    obj["features"] = pt.features;
    obj["confidence"] = pt.confidence;
    obj["predicted_class"] = pt.predicted_class;
    if (data.truth[i]) obj["true_label"] = *data.truth[i];
    if (pt.display_uri) obj["display_uri"] = *pt.display_uri;
    out << obj.dump() << '\n';
  }
}

void write_testset(const std::filesystem::path& path, const AuditData& data,
                   DataFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  if (format == DataFormat::csv) {
    write_csv(out, data);
  } else {
    write_jsonl(out, data);
  }
}

}  // namespace uuaudit
