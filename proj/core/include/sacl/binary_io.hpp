#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string_view>

namespace sacl::binary {

// Little-endian primitives for checkpoint files, independent of host order.
void write_magic(std::ostream& out, std::string_view magic);
void write_u32(std::ostream& out, std::uint32_t value);
void write_f64(std::ostream& out, double value);

// Throws ParseError when the stream ends early or the magic differs.
void expect_magic(std::istream& in, std::string_view magic);
std::uint32_t read_u32(std::istream& in);
double read_f64(std::istream& in);

}  // namespace sacl::binary
