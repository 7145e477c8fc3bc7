#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "klframe/error.hpp"

namespace klframe {

enum class ThresholdMode { Soft, Hard };

class ThresholdRule {
 public:
  ThresholdRule(ThresholdMode mode, double lambda);

  ThresholdMode mode() const noexcept { return mode_; }
  double lambda() const noexcept { return lambda_; }
  double apply(double x) const noexcept;

 private:
  ThresholdMode mode_;
  double lambda_;
};

/// soft: sign(x) max(|x| - lambda, 0).  hard: x if |x| > lambda, else 0.
inline double threshold(double x, const ThresholdRule& rule) noexcept { return rule.apply(x); }

/// Round half away from zero of x / step.
std::int64_t uniform_quantize(double x, double step);
double uniform_dequantize(std::int64_t q, double step);

using Symbol = std::int32_t;

/// Distinct symbols with positive probabilities summing to 1, sorted by
/// descending probability with ties in ascending symbol order.
class SymbolModel {
 public:
  struct Entry {
    Symbol symbol;
    double probability;
  };

  static SymbolModel from_probabilities(std::vector<Entry> entries);
  /// Empirical model; zero-count symbols are dropped.
  static SymbolModel from_counts(const std::map<Symbol, std::uint64_t>& counts);
  static SymbolModel from_data(std::span<const Symbol> data);

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  explicit SymbolModel(std::vector<Entry> entries) : entries_(std::move(entries)) {}
  std::vector<Entry> entries_;
};

/// Codes are strings of '0' and '1'.
struct CodeTable {
  std::map<Symbol, std::string> codes;

  const std::string& at(Symbol s) const;
  friend bool operator==(const CodeTable&, const CodeTable&) = default;
};

CodeTable shannon_fano_table(const SymbolModel& model);

bool is_prefix_free(const CodeTable& table);
double kraft_sum(const CodeTable& table);
double average_code_length(const SymbolModel& model, const CodeTable& table);
double shannon_entropy_bits(const SymbolModel& model);

/// Bits packed most-significant first; pad bits are zero.
class BitStream {
 public:
  BitStream() = default;
  /// Throws CorruptContainer unless bytes holds exactly ceil(bit_count / 8)
  /// bytes with zero padding.
  BitStream(std::size_t bit_count, std::vector<std::uint8_t> bytes);

  void push(bool bit);
  void append(const std::string& code);
  bool bit(std::size_t i) const { return (bytes_[i / 8] >> (7 - i % 8)) & 1U; }

  std::size_t bit_count() const noexcept { return bit_count_; }
  const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }

  friend bool operator==(const BitStream&, const BitStream&) = default;

 private:
  std::size_t bit_count_ = 0;
  std::vector<std::uint8_t> bytes_;
};

BitStream encode(std::span<const Symbol> data, const CodeTable& table);
std::vector<Symbol> decode(const BitStream& bits, const CodeTable& table, std::size_t count);

/// u32 count, then per symbol in ascending order: i32 symbol, u8 length,
/// code bits MSB-first padded to a byte. All integers little-endian.
void write_code_table(const CodeTable& table, std::vector<std::uint8_t>& out);
/// Reads a table at `offset` and advances it. Throws CorruptContainer.
CodeTable read_code_table(std::span<const std::uint8_t> in, std::size_t& offset);

}  // namespace klframe
