#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

// Output formatting. Experiment reruns must be byte-identical, so every float
// goes through std::to_chars shortest round-trip form; nothing here touches
// locales, wall clocks, or printf %g.
namespace hpntk::io {

std::string fmt(double v);
std::string fmt(std::int64_t v);

// Accumulates rows in memory and writes the file once on close (no partial
// files on failure paths).
class CsvWriter {
 public:
  explicit CsvWriter(std::string path) : path_(std::move(path)) {}
  void header(const std::vector<std::string>& names);
  void row(const std::vector<std::string>& fields);
  // write + clear; throws std::runtime_error on I/O failure
  void close();
  const std::string& buffer() const { return buf_; }

 private:
  std::string path_;
  std::string buf_;
  std::size_t arity_ = 0;
  bool closed_ = false;
};

void write_text(const std::string& path, const std::string& content);
void write_json(const std::string& path, const nlohmann::json& j);
std::string read_text(const std::string& path);

} // namespace hpntk::io
