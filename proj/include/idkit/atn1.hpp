#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "idkit/asa.hpp"

namespace idkit {

// ATN1 attention interchange format. Each tensor is stored as
//   "ATN1" | u16 version (=1) | u32 header length | JSON header | payload
// where the header is {"layers", "heads", "seq_len", "dtype": "f32", "meta"}
// and the payload is layers*heads*L*L little-endian f32 values, row-major.
// A file is any number of such records back to back.
inline constexpr std::uint16_t kAtn1Version = 1;

void write_attention(std::ostream& out, const std::vector<AttentionTensor>& tensors);
void write_attention_file(const std::string& path,
                          const std::vector<AttentionTensor>& tensors);

// Validates every tensor; failures throw FormatError with the byte offset of
// the offending record or field.
std::vector<AttentionTensor> read_attention(std::istream& in);
std::vector<AttentionTensor> read_attention_file(const std::string& path);

}  // namespace idkit
