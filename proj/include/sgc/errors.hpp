#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sgc {

// Raised when an exact computation would exceed a configured budget
// (enumeration node limit, binomial size cap, brute-force limits).
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by decoders on truncated or inconsistent input.
class MalformedStream : public std::runtime_error {
 public:
  MalformedStream(const std::string& what, std::size_t bit_offset)
      : std::runtime_error(what + " (at byte " + std::to_string(bit_offset / 8) +
                           ", bit " + std::to_string(bit_offset % 8) + ")"),
        bit_offset_(bit_offset) {}

  std::size_t bit_offset() const noexcept { return bit_offset_; }
  std::size_t byte_offset() const noexcept { return bit_offset_ / 8; }

 private:
  std::size_t bit_offset_;
};

// Container magic or version byte does not match.
class VersionError : public MalformedStream {
 public:
  using MalformedStream::MalformedStream;
};

}  // namespace sgc
