#include "hpntk/io.h"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hpntk::io {

std::string fmt(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("float formatting failed");
  return std::string(buf, ptr);
}

std::string fmt(std::int64_t v) {
  char buf[24];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("int formatting failed");
  return std::string(buf, ptr);
}

void CsvWriter::header(const std::vector<std::string>& names) {
  if (arity_ != 0) throw std::logic_error("header written twice");
  arity_ = names.size();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) buf_ += ',';
    buf_ += names[i];
  }
  buf_ += '\n';
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != arity_) throw std::logic_error("csv row arity mismatch");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) buf_ += ',';
    buf_ += fields[i];
  }
  buf_ += '\n';
}

void CsvWriter::close() {
  if (closed_) return;
  write_text(path_, buf_);
  closed_ = true;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_json(const std::string& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace hpntk::io
