#include "sacl/binary_io.hpp"

#include <array>
#include <bit>
#include <string>

#include "sacl/error.hpp"

namespace sacl::binary {
namespace {

template <std::size_t N>
void write_le(std::ostream& out, std::uint64_t bits) {
  std::array<char, N> bytes{};
  for (std::size_t i = 0; i < N; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
  out.write(bytes.data(), N);
}

template <std::size_t N>
std::uint64_t read_le(std::istream& in) {
  std::array<char, N> bytes{};
  if (!in.read(bytes.data(), N)) throw ParseError("unexpected end of binary file");
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < N; ++i)
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i])) << (8 * i);
  return bits;
}

}  // namespace

void write_magic(std::ostream& out, std::string_view magic) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

void write_u32(std::ostream& out, std::uint32_t value) { write_le<4>(out, value); }

void write_f64(std::ostream& out, double value) {
  write_le<8>(out, std::bit_cast<std::uint64_t>(value));
}

void expect_magic(std::istream& in, std::string_view magic) {
  std::string got(magic.size(), '\0');
  if (!in.read(got.data(), static_cast<std::streamsize>(got.size())) || got != magic) {
    throw ParseError("bad magic bytes, expected " + std::string(magic));
  }
}

std::uint32_t read_u32(std::istream& in) { return static_cast<std::uint32_t>(read_le<4>(in)); }

double read_f64(std::istream& in) { return std::bit_cast<double>(read_le<8>(in)); }

}  // namespace sacl::binary
