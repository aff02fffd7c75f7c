#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wlqc/finite_horizon.hpp"
#include "wlqc/infinite_horizon.hpp"
#include "wlqc/model.hpp"

namespace wlqc::io {

// Fixed 17-significant-digit float formatting: lossless double round trip,
// so emitted files are byte-stable across runs.
std::string fmt17(double value);

std::uint64_t fnv1a64(std::string_view bytes);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Structured-text matrix dumps (documented in docs/formats.md): dimensions
// header followed by named row-major blocks.
std::string dump_finite(const finite_horizon::FiniteSolution& sol, int n,
                        int m, int k);
std::string dump_steady(const infinite_horizon::SteadySolution& sol, int n,
                        int m, int k);

// Minimal CSV emitter with a header row; cells are fmt17 for doubles.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void add_row(const std::vector<std::string>& cells);
  std::string str() const { return body_; }

  static std::string cell(double value) { return fmt17(value); }
  static std::string cell(int value) { return std::to_string(value); }

 private:
  std::string body_;
  size_t columns_;
};

}  // namespace wlqc::io
