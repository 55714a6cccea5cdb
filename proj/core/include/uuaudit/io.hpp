#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "uuaudit/testset.hpp"

namespace uuaudit {

enum class DataFormat { csv, jsonl };

/// Picks the format from the file extension (.csv, .jsonl/.ndjson).
DataFormat format_from_path(const std::filesystem::path& path);
DataFormat parse_format(std::string_view name);

struct LoadOptions {
  std::optional<std::string> critical_class;
};

// CSV header: id,f0,...,f{p-1},confidence,predicted_class[,true_label]
// [,display_uri]. Columns are located by name; feature columns must run
// contiguously from f0. JSONL: one object per line with keys id, features,
// confidence, predicted_class and optional true_label, display_uri.
AuditData load_testset(const std::filesystem::path& path, DataFormat format,
                       const LoadOptions& options = {});
AuditData load_testset(const std::filesystem::path& path,
                       const LoadOptions& options = {});

AuditData read_csv(std::istream& in, const LoadOptions& options = {});
AuditData read_jsonl(std::istream& in, const LoadOptions& options = {});

void write_csv(std::ostream& out, const AuditData& data);
void write_jsonl(std::ostream& out, const AuditData& data);
void write_testset(const std::filesystem::path& path, const AuditData& data,
                   DataFormat format);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace uuaudit
