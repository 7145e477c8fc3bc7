#include "klframe/coding.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "byteio.hpp"

namespace klframe {

ThresholdRule::ThresholdRule(ThresholdMode mode, double lambda) : mode_(mode), lambda_(lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error(Errc::NegativeLambda, "threshold lambda must be >= 0");
}

double ThresholdRule::apply(double x) const noexcept {
  if (mode_ == ThresholdMode::Hard) return std::abs(x) > lambda_ ? x : 0.0;
  if (x > lambda_) return x - lambda_;
  if (x < -lambda_) return x + lambda_;
  return 0.0;
}

std::int64_t uniform_quantize(double x, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw Error(Errc::NonPositiveStep, "quantizer step must be > 0");
  if (!std::isfinite(x)) throw Error(Errc::NonFinite, "cannot quantize a non-finite value");
  return static_cast<std::int64_t>(std::llround(x / step));
}

double uniform_dequantize(std::int64_t q, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw Error(Errc::NonPositiveStep, "quantizer step must be > 0");
  return static_cast<double>(q) * step;
}

SymbolModel SymbolModel::from_probabilities(std::vector<Entry> entries) {
  if (entries.empty()) throw Error(Errc::EmptyModel, "symbol model has no symbols");
  std::set<Symbol> seen;
  double total = 0.0;
  for (const auto& e : entries) {
    if (!(e.probability > 0.0) || !std::isfinite(e.probability)) {
      throw Error(Errc::BadProbabilities, "probabilities must be positive and finite");
    }
    if (!seen.insert(e.symbol).second) throw Error(Errc::BadProbabilities, "duplicate symbol in model");
    total += e.probability;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error(Errc::BadProbabilities, "probabilities must sum to 1");
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.probability != b.probability) return a.probability > b.probability;
    return a.symbol < b.symbol;
  });
  return SymbolModel(std::move(entries));
}

SymbolModel SymbolModel::from_counts(const std::map<Symbol, std::uint64_t>& counts) {
  std::uint64_t total = 0;
  for (const auto& [s, c] : counts) total += c;
  std::vector<Entry> entries;
  for (const auto& [s, c] : counts) {
    if (c > 0) entries.push_back({s, static_cast<double>(c) / static_cast<double>(total)});
  }
  return from_probabilities(std::move(entries));
}

SymbolModel SymbolModel::from_data(std::span<const Symbol> data) {
  std::map<Symbol, std::uint64_t> counts;
  for (Symbol s : data) ++counts[s];
  return from_counts(counts);
}

const std::string& CodeTable::at(Symbol s) const {
  auto it = codes.find(s);
  if (it == codes.end()) throw Error(Errc::UnknownSymbol, "symbol " + std::to_string(s) + " has no code");
  return it->second;
}

namespace {

using Entries = std::vector<SymbolModel::Entry>;

void split(const Entries& e, std::size_t lo, std::size_t hi, std::string& prefix, CodeTable& out) {
  if (hi - lo == 1) {
    out.codes[e[lo].symbol] = prefix;
    return;
  }
  double total = 0.0;
  for (std::size_t i = lo; i < hi; ++i) total += e[i].probability;
  const double half = 0.5 * total - 1e-12 * total;
  double cum = 0.0;
  std::size_t cut = lo;
  while (cut < hi - 1) {
    cum += e[cut].probability;
    ++cut;
    if (cum >= half) break;
  }
  prefix.push_back('0');
  split(e, lo, cut, prefix, out);
  prefix.back() = '1';
  split(e, cut, hi, prefix, out);
  prefix.pop_back();
}

/// Binary trie over the table; leaves hold symbols.
struct Trie {
  struct Node {
    std::int32_t child[2] = {-1, -1};
    bool leaf = false;
    Symbol symbol = 0;
  };
  std::vector<Node> nodes{1};

  explicit Trie(const CodeTable& table) {
    for (const auto& [sym, code] : table.codes) {
      std::size_t at = 0;
      for (char c : code) {
        const int b = c == '1';
        if (nodes[at].child[b] < 0) {
          nodes[at].child[b] = static_cast<std::int32_t>(nodes.size());
          nodes.emplace_back();
        }
        at = static_cast<std::size_t>(nodes[at].child[b]);
      }
      nodes[at].leaf = true;
      nodes[at].symbol = sym;
    }
  }
};

}  // namespace

CodeTable shannon_fano_table(const SymbolModel& model) {
  const auto& e = model.entries();
  if (e.empty()) throw Error(Errc::EmptyModel, "symbol model has no symbols");
  CodeTable table;
  if (e.size() == 1) {
    table.codes[e[0].symbol] = "0";
    return table;
  }
  std::string prefix;
  split(e, 0, e.size(), prefix, table);
  return table;
}

bool is_prefix_free(const CodeTable& table) {
  // After lexicographic sorting, a prefix sorts immediately before some code it prefixes.
  std::vector<const std::string*> codes;
  for (const auto& [s, c] : table.codes) {
    if (c.empty()) return false;
    codes.push_back(&c);
  }
  std::sort(codes.begin(), codes.end(), [](auto a, auto b) { return *a < *b; });
  for (std::size_t i = 1; i < codes.size(); ++i) {
    if (codes[i]->starts_with(*codes[i - 1])) return false;
  }
  return true;
}

double kraft_sum(const CodeTable& table) {
  double s = 0.0;
  for (const auto& [sym, c] : table.codes) s += std::ldexp(1.0, -static_cast<int>(c.size()));
  return s;
}

double average_code_length(const SymbolModel& model, const CodeTable& table) {
  double len = 0.0;
  for (const auto& e : model.entries()) len += e.probability * static_cast<double>(table.at(e.symbol).size());
  return len;
}

double shannon_entropy_bits(const SymbolModel& model) {
  double h = 0.0;
  for (const auto& e : model.entries()) h -= e.probability * std::log2(e.probability);
  return std::max(h, 0.0);
}

BitStream::BitStream(std::size_t bit_count, std::vector<std::uint8_t> bytes)
    : bit_count_(bit_count), bytes_(std::move(bytes)) {
  if (bytes_.size() != (bit_count_ + 7) / 8) throw Error(Errc::CorruptContainer, "bit count does not match byte length");
  const std::size_t pad = bytes_.size() * 8 - bit_count_;
  if (pad > 0 && (bytes_.back() & ((1U << pad) - 1U)) != 0) {
    throw Error(Errc::CorruptContainer, "nonzero pad bits");
  }
}

void BitStream::push(bool bit) {
  if (bit_count_ % 8 == 0) bytes_.push_back(0);
  if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80U >> (bit_count_ % 8));
  ++bit_count_;
}

void BitStream::append(const std::string& code) {
  for (char c : code) push(c == '1');
}

BitStream encode(std::span<const Symbol> data, const CodeTable& table) {
  BitStream out;
  for (Symbol s : data) out.append(table.at(s));
  return out;
}

std::vector<Symbol> decode(const BitStream& bits, const CodeTable& table, std::size_t count) {
  const Trie trie(table);
  std::vector<Symbol> out;
  out.reserve(count);
  std::size_t at = 0;
  for (std::size_t i = 0; i < bits.bit_count(); ++i) {
    if (out.size() == count) throw Error(Errc::ExcessBits, "bits remain after the expected symbol count");
    const std::int32_t next = trie.nodes[at].child[bits.bit(i)];
    if (next < 0) throw Error(Errc::DanglingBits, "bit sequence matches no code");
    at = static_cast<std::size_t>(next);
    if (trie.nodes[at].leaf) {
      out.push_back(trie.nodes[at].symbol);
      at = 0;
    }
  }
  if (at != 0) throw Error(Errc::DanglingBits, "stream ends inside a code");
  if (out.size() != count) {
    throw Error(Errc::DanglingBits,
                "stream holds " + std::to_string(out.size()) + " symbols, expected " + std::to_string(count));
  }
  return out;
}

void write_code_table(const CodeTable& table, std::vector<std::uint8_t>& out) {
  byteio::put(out, static_cast<std::uint32_t>(table.codes.size()));
  for (const auto& [sym, code] : table.codes) {
    if (code.empty() || code.size() > 255) throw Error(Errc::CodeTooLong, "code length must be in [1, 255]");
    byteio::put(out, static_cast<std::int32_t>(sym));
    byteio::put(out, static_cast<std::uint8_t>(code.size()));
    BitStream bits;
    bits.append(code);
    out.insert(out.end(), bits.bytes().begin(), bits.bytes().end());
  }
}

CodeTable read_code_table(std::span<const std::uint8_t> in, std::size_t& offset) {
  byteio::Reader r(in, offset);
  const auto n = r.get<std::uint32_t>();
  // Each entry takes at least 6 bytes.
  if (n > r.remaining() / 6) throw Error(Errc::CorruptContainer, "code table count exceeds data");
  CodeTable table;
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto sym = r.get<std::int32_t>();
    const auto len = r.get<std::uint8_t>();
    if (len == 0) throw Error(Errc::CorruptContainer, "zero-length code");
    auto raw = r.take((len + 7U) / 8U);
    BitStream bits(len, {raw.begin(), raw.end()});
    std::string code;
    for (std::size_t b = 0; b < len; ++b) code.push_back(bits.bit(b) ? '1' : '0');
    if (!table.codes.emplace(sym, std::move(code)).second) throw Error(Errc::CorruptContainer, "duplicate symbol");
  }
  if (!is_prefix_free(table)) throw Error(Errc::CorruptContainer, "code table is not prefix-free");
  return table;
}

}  // namespace klframe
