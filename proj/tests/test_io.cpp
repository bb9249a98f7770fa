#include <doctest.h>

#include <stdexcept>

#include <cstdint>
#include <filesystem>
#include <string>

#include "hpntk/io.h"

using namespace hpntk;

TEST_CASE("float formatting is shortest round-trip") {
  CHECK(io::fmt(6.0) == "6");
  CHECK(io::fmt(0.5) == "0.5");
  CHECK(io::fmt(-0.0) == "-0");
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 2.5e22, -3.141592653589793, 6.02e23}) {
    CHECK(std::stod(io::fmt(v)) == v);
  }
  CHECK(io::fmt(std::int64_t{-42}) == "-42");
  CHECK(io::fmt(std::int64_t{1} << 62) == "4611686018427387904");
}

TEST_CASE("csv writer builds exact bytes and enforces arity") {
  const std::string path =
      (std::filesystem::temp_directory_path() / "hpntk_io_test.csv").string();
  io::CsvWriter csv(path);
  csv.header({"a", "b"});
  csv.row({io::fmt(1.5), io::fmt(std::int64_t{2})});
  csv.row({"x", "y"});
  CHECK(csv.buffer() == "a,b\n1.5,2\nx,y\n");
  CHECK_THROWS_AS(csv.row({"only-one"}), std::logic_error);
  CHECK_THROWS_AS(csv.header({"again"}), std::logic_error);
  csv.close();
  CHECK(io::read_text(path) == "a,b\n1.5,2\nx,y\n");
  std::filesystem::remove(path);
}

TEST_CASE("json files end with a newline and reparse") {
  const std::string path =
      (std::filesystem::temp_directory_path() / "hpntk_io_test.json").string();
  nlohmann::json j = {{"k", 1.25}, {"s", "v"}};
  io::write_json(path, j);
  const std::string text = io::read_text(path);
  CHECK(text.back() == '\n');
  CHECK(nlohmann::json::parse(text) == j);
  std::filesystem::remove(path);
}

TEST_CASE("read_text on a missing file throws") {
  CHECK_THROWS_AS(io::read_text("/nonexistent/path/file.txt"), std::runtime_error);
}
