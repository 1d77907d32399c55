#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rpvfield/diff/tensor.hpp"
#include "rpvfield/field/field.hpp"

namespace rpvfield::field {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Binary container, little-endian:
//   "RFLD" | u32 version
//   i32 trunk_layers | i32 trunk_width | i32 pe_frequencies | i32 skip_at
//   u64 seed | u64 step | u32 tensor count
//   per tensor: u32 name length | name | u32 rank | u64 dims[rank] | f64 payload
// Tensors beyond the field weights (optimizer moments) ride along by name.
struct Checkpoint {
  FieldConfig config;
  std::uint64_t step = 0;
  std::vector<std::string> names;
  std::vector<diff::Tensor> tensors;

  const diff::Tensor* find(const std::string& name) const;
};

Checkpoint to_checkpoint(const RadianceField& field, std::uint64_t step = 0);
RadianceField field_from(const Checkpoint& checkpoint);

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
// `source` names the stream in ParseError messages.
Checkpoint read_checkpoint(std::istream& in, const std::string& source);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace rpvfield::field
