#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "klframe/error.hpp"

namespace klframe::byteio {

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  static_assert(std::is_arithmetic_v<T>);
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t,
                                                  std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint8_t>>>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

/// Little-endian reader that throws CorruptContainer on overrun.
class Reader {
 public:
  Reader(std::span<const std::uint8_t> in, std::size_t& offset) : in_(in), offset_(offset) {}

  template <typename T>
  T get() {
    static_assert(std::is_arithmetic_v<T>);
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t,
                                                    std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint8_t>>>;
    need(sizeof(T));
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(static_cast<U>(in_[offset_ + i]) << (8 * i));
    offset_ += sizeof(T);
    return std::bit_cast<T>(bits);
  }

  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = in_.subspan(offset_, n);
    offset_ += n;
    return s;
  }

  std::size_t remaining() const { return in_.size() - offset_; }

 private:
  void need(std::size_t n) const {
    if (n > in_.size() - offset_) throw Error(Errc::CorruptContainer, "unexpected end of data");
  }

  std::span<const std::uint8_t> in_;
  std::size_t& offset_;
};

}  // namespace klframe::byteio
