#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sgc {

using BigInt = mpz_class;

// Largest binomial a subset block may index: C(N, m) <= 2^kMaxSubsetBits.
inline constexpr std::size_t kMaxSubsetBits = 20'000'000;

/// Number of bits of a fixed-width field holding values in [0, max]:
/// ceil(log2(max + 1)), zero when max == 0.
std::size_t bit_width(std::uint64_t max);
std::size_t bit_width(const BigInt& max);

/// Exact binomial coefficient; zero when k > n.
BigInt binomial(std::uint64_t n, std::uint64_t k);

/// Natural log of a positive big integer (0 for values <= 1 is NOT implied;
/// log(1) = 0, and the input must be >= 1).
double log_big(const BigInt& v);

/// log C(n, k) in nats, computed from the exact integer.
double log_binomial(std::uint64_t n, std::uint64_t k);

/// ceil(log2 C(N, m)); throws CapacityError past kMaxSubsetBits.
std::size_t subset_width(std::uint64_t universe, std::uint64_t m);

/// Colexicographic rank sum_i C(e_i, i) of a strictly increasing subset of
/// [0, universe). Throws std::invalid_argument on unsorted, duplicate or
/// out-of-range elements.
BigInt rank_subset(std::span<const std::uint64_t> elements, std::uint64_t universe);

/// Inverse of rank_subset. Throws std::invalid_argument when
/// rank >= C(universe, m) or rank < 0.
std::vector<std::uint64_t> unrank_subset(const BigInt& rank, std::uint64_t universe,
                                         std::uint64_t m);

/// Append-only MSB-first bit buffer with labeled sections for length
/// accounting. Every write lands in the most recently opened section.
class CodeStream {
 public:
  struct Section {
    std::string label;
    std::size_t bits = 0;
  };

  void begin_section(std::string label);

  void write_bits(std::uint64_t value, unsigned width);
  void write_uint(std::uint64_t value, std::uint64_t max);
  void write_big(const BigInt& value, std::size_t width);
  void write_big_uint(const BigInt& value, const BigInt& max);
  /// Writes the colex rank of `elements` in subset_width(universe, size) bits.
  void write_subset(std::span<const std::uint64_t> elements, std::uint64_t universe);
  /// Zero bits up to the next byte boundary, booked under section "padding".
  void pad_to_byte();
  /// Appends another stream bit by bit, keeping its section labels.
  void append(const CodeStream& other);

  std::size_t bit_size() const noexcept { return bit_size_; }
  double nats() const noexcept;
  const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }
  const std::vector<Section>& sections() const noexcept { return sections_; }
  /// Total bits across all sections carrying this label.
  std::size_t section_bits(std::string_view label) const;

 private:
  void push_bit(bool bit);
  Section& current();

  std::vector<std::uint8_t> bytes_;
  std::size_t bit_size_ = 0;
  std::vector<Section> sections_;
  std::string resume_;  // section reopened by the next write after padding
};

/// Sequential reader over an MSB-first bit buffer. Throws MalformedStream
/// (with the failing bit offset) when reading past the limit or when a
/// field decodes out of range.
class BitReader {
 public:
  BitReader(std::span<const std::uint8_t> bytes, std::size_t bit_limit);
  explicit BitReader(std::span<const std::uint8_t> bytes)
      : BitReader(bytes, bytes.size() * 8) {}

  std::uint64_t read_bits(unsigned width);
  std::uint64_t read_uint(std::uint64_t max);
  BigInt read_big(std::size_t width);
  BigInt read_big_uint(const BigInt& max);
  std::vector<std::uint64_t> read_subset(std::uint64_t universe, std::uint64_t m);
  void align_to_byte();

  std::size_t position() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return limit_ - pos_; }

 private:
  void require(std::size_t bits, const char* what) const;

  std::span<const std::uint8_t> bytes_;
  std::size_t limit_;
  std::size_t pos_ = 0;
};

}  // namespace sgc
