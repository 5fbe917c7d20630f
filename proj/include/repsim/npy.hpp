#ifndef REPSIM_NPY_HPP
#define REPSIM_NPY_HPP

// Minimal NPY container IO, deliberately restricted to the one flavor the
// activation dumps use: format version 1.0, dtype '<f4', C order. Anything
// else is rejected loudly rather than converted. The format is:
//
//   \x93NUMPY <major> <minor> <header_len le16> <header dict> <payload>
//
// where the header dict is an ASCII Python literal, padded with spaces and
// terminated by '\n' so that the total preamble length is a multiple of 64.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "repsim/errors.hpp"
#include "repsim/tensor.hpp"

namespace repsim::npy {

static_assert(std::endian::native == std::endian::little,
              "npy reader assumes a little-endian host");

inline constexpr std::array<char, 6> kMagic = {'\x93', 'N', 'U', 'M', 'P', 'Y'};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

// Pulls the raw value text for 'key' out of the header dict. The dict is
// flat and the keys are known, so a full Python parser is not needed.
inline std::string dict_value(const std::string& dict, const std::string& key) {
  const std::string quoted = "'" + key + "'";
  auto pos = dict.find(quoted);
  if (pos == std::string::npos)
    throw BadMagic("npy header missing key '" + key + "'");
  pos = dict.find(':', pos + quoted.size());
  if (pos == std::string::npos)
    throw BadMagic("npy header malformed near key '" + key + "'");
  ++pos;
  // Value ends at the next top-level comma or closing brace.
  int depth = 0;
  std::string out;
  for (; pos < dict.size(); ++pos) {
    const char c = dict[pos];
    if (c == '(' || c == '[') ++depth;
    if (c == ')' || c == ']') --depth;
    if (depth == 0 && (c == ',' || c == '}')) break;
    out += c;
  }
  return trim(out);
}

inline std::vector<std::int64_t> parse_shape_tuple(const std::string& in) {
  std::string s = trim(in);
  if (s.size() < 2 || s.front() != '(' || s.back() != ')')
    throw BadMagic("npy header shape is not a tuple: " + s);
  s = s.substr(1, s.size() - 2);
  std::vector<std::int64_t> dims;
  std::string token;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == ',') {
      token = trim(token);
      if (!token.empty()) dims.push_back(std::stoll(token));
      token.clear();
    } else {
      token += s[i];
    }
  }
  return dims;
}

inline std::string shape_tuple(const std::vector<std::int64_t>& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  if (shape.size() == 1) s += ",";
  s += ")";
  return s;
}

}  // namespace detail

/// Reads one activation tensor. Errors are specific: BadMagic for anything
/// that is not an npy v1.0 file, UnsupportedDtype / UnsupportedLayout for
/// valid npy files outside the supported flavor, ShapeMismatch when the
/// payload size disagrees with the header, NonFinite on NaN/Inf values.
inline ActivationTensor load_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile("cannot open " + path.string());

  std::array<char, 8> preamble{};
  in.read(preamble.data(), preamble.size());
  if (!in || !std::equal(kMagic.begin(), kMagic.end(), preamble.begin()))
    throw BadMagic(path.string() + " is not an npy file");
  if (preamble[6] != 1 || preamble[7] != 0)
    throw BadMagic(path.string() + ": unsupported npy format version");

  std::array<unsigned char, 2> len_le{};
  in.read(reinterpret_cast<char*>(len_le.data()), 2);
  if (!in) throw BadMagic(path.string() + ": truncated npy header");
  const std::size_t header_len = len_le[0] | (len_le[1] << 8);

  std::string header(header_len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw BadMagic(path.string() + ": truncated npy header");

  const std::string descr = detail::dict_value(header, "descr");
  if (descr != "'<f4'")
    throw UnsupportedDtype(path.string() + ": dtype " + descr +
                           " (only '<f4' is supported)");
  const std::string order = detail::dict_value(header, "fortran_order");
  if (order == "True")
    throw UnsupportedLayout(path.string() + ": fortran_order files are not supported");
  if (order != "False")
    throw BadMagic(path.string() + ": malformed fortran_order flag");

  ActivationTensor t;
  t.shape = detail::parse_shape_tuple(detail::dict_value(header, "shape"));

  std::int64_t count = 1;
  for (auto d : t.shape) {
    if (d <= 0) throw ShapeMismatch(path.string() + ": non-positive dimension");
    count *= d;
  }

  t.values.resize(static_cast<std::size_t>(count));
  in.read(reinterpret_cast<char*>(t.values.data()),
          static_cast<std::streamsize>(count * 4));
  if (in.gcount() != count * 4)
    throw ShapeMismatch(path.string() + ": payload shorter than header shape");
  if (in.peek() != std::ifstream::traits_type::eof())
    throw ShapeMismatch(path.string() + ": payload longer than header shape");

  t.validate();  // rank, counts, finiteness
  return t;
}

/// Writes a tensor in the restricted flavor above. Output is a pure function
/// of the tensor, so two saves of the same tensor are byte-identical.
inline void save_tensor(const ActivationTensor& t,
                        const std::filesystem::path& path) {
  t.validate();

  std::string dict = "{'descr': '<f4', 'fortran_order': False, 'shape': " +
                     detail::shape_tuple(t.shape) + ", }";
  // Pad so magic(6) + version(2) + len(2) + dict + '\n' is a multiple of 64.
  const std::size_t unpadded = 10 + dict.size() + 1;
  dict.append((64 - unpadded % 64) % 64, ' ');
  dict += '\n';

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot open " + path.string() + " for writing");

  out.write(kMagic.data(), static_cast<std::streamsize>(kMagic.size()));
  out.put(1);
  out.put(0);
  const auto len = static_cast<std::uint16_t>(dict.size());
  out.put(static_cast<char>(len & 0xff));
  out.put(static_cast<char>(len >> 8));
  out.write(dict.data(), static_cast<std::streamsize>(dict.size()));
  out.write(reinterpret_cast<const char*>(t.values.data()),
            static_cast<std::streamsize>(t.values.size() * 4));
  if (!out) throw IoFailure("write failed for " + path.string());
}

}  // namespace repsim::npy

#endif  // REPSIM_NPY_HPP
