#pragma once

// Minimal flatbuffers builder — just enough to emit the six table types the
// Arrow IPC file format needs (Message, Schema, Field, FloatingPoint,
// RecordBatch, Footer). Buffers build back-to-front, so bytes are kept in
// reverse order internally and every position is a distance from the final
// buffer's end; the whole thing is flipped once at finish().

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <string_view>
#include <vector>

#include "gaze/error.hpp"

namespace gaze::detail {

class FlatBufferBuilder {
 public:
  using Offset = std::uint32_t;  // distance from buffer end to object start

  template <class T>
  void prepend_scalar(T v) {
    align_for(sizeof(T), sizeof(T));
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    for (std::size_t k = sizeof(T); k-- > 0;) rev_.push_back(bytes[k]);
  }

  // ---- tables --------------------------------------------------------------

  void begin_table() {
    table_begin_ = size();
    slots_.clear();
  }

  template <class T>
  void add_scalar_slot(std::size_t slot, T v) {
    prepend_scalar(v);
    record_slot(slot);
  }

  void add_offset_slot(std::size_t slot, Offset target) {
    prepend_uoffset(target);
    record_slot(slot);
  }

  Offset end_table() {
    align_for(4, 4);
    for (int k = 0; k < 4; ++k) rev_.push_back(0);  // soffset placeholder
    const std::size_t d_table = size();

    const std::size_t nslots = slots_.size();
    const std::size_t vt_bytes = 4 + 2 * nslots;
    const auto vt_size = static_cast<std::uint16_t>(vt_bytes);
    const auto table_size = static_cast<std::uint16_t>(d_table - table_begin_);
    while ((size() + vt_bytes) % 2 != 0) rev_.push_back(0);
    for (std::size_t k = nslots; k-- > 0;) {
      const std::uint16_t off =
          slots_[k] == 0 ? 0 : static_cast<std::uint16_t>(d_table - slots_[k]);
      push_u16_raw(off);
    }
    push_u16_raw(table_size);
    push_u16_raw(vt_size);
    const std::size_t d_vtable = size();

    patch_u32(d_table, static_cast<std::uint32_t>(d_vtable - d_table));
    return static_cast<Offset>(d_table);
  }

  // ---- vectors and strings -------------------------------------------------

  Offset create_string(std::string_view s) {
    const std::size_t total = s.size() + 1;  // payload plus NUL
    while ((size() + total + 4) % 4 != 0) rev_.push_back(0);
    rev_.push_back(0);
    for (std::size_t k = s.size(); k-- > 0;)
      rev_.push_back(static_cast<unsigned char>(s[k]));
    push_u32_raw(static_cast<std::uint32_t>(s.size()));
    return static_cast<Offset>(size());
  }

  Offset create_offset_vector(const std::vector<Offset>& items) {
    while ((size() + 4 * items.size()) % 4 != 0) rev_.push_back(0);
    for (std::size_t k = items.size(); k-- > 0;) prepend_uoffset(items[k]);
    push_u32_raw(static_cast<std::uint32_t>(items.size()));
    return static_cast<Offset>(size());
  }

  /// Vector of fixed-size structs supplied as raw little-endian bytes
  /// (elem_size each, already padded to the struct layout).
  Offset create_struct_vector(const std::vector<unsigned char>& bytes,
                              std::size_t elem_size, std::size_t elem_align) {
    if (elem_size == 0 || bytes.size() % elem_size != 0)
      raise(ErrorKind::InvalidArgument, "struct vector size mismatch");
    min_align_ = std::max(min_align_, elem_align);
    while ((size() + bytes.size()) % elem_align != 0) rev_.push_back(0);
    for (std::size_t k = bytes.size(); k-- > 0;) rev_.push_back(bytes[k]);
    push_u32_raw(static_cast<std::uint32_t>(bytes.size() / elem_size));
    return static_cast<Offset>(size());
  }

  // ---- finish --------------------------------------------------------------

  std::vector<unsigned char> finish(Offset root) {
    while ((size() + 4) % min_align_ != 0) rev_.push_back(0);
    prepend_uoffset(root);
    std::vector<unsigned char> out(rev_.rbegin(), rev_.rend());
    return out;
  }

 private:
  std::size_t size() const { return rev_.size(); }

  void align_for(std::size_t alignment, std::size_t upcoming) {
    min_align_ = std::max(min_align_, alignment);
    while ((size() + upcoming) % alignment != 0) rev_.push_back(0);
  }

  void prepend_uoffset(Offset target) {
    align_for(4, 4);
    const auto value = static_cast<std::uint32_t>(size() + 4 - target);
    push_u32_raw(value);
  }

  void push_u16_raw(std::uint16_t v) {
    rev_.push_back(static_cast<unsigned char>(v >> 8));
    rev_.push_back(static_cast<unsigned char>(v & 0xFF));
  }

  void push_u32_raw(std::uint32_t v) {
    for (int k = 3; k >= 0; --k)
      rev_.push_back(static_cast<unsigned char>((v >> (8 * k)) & 0xFF));
  }

  void patch_u32(std::size_t d, std::uint32_t v) {
    for (int k = 0; k < 4; ++k)
      rev_[d - 1 - static_cast<std::size_t>(k)] =
          static_cast<unsigned char>((v >> (8 * k)) & 0xFF);
  }

  void record_slot(std::size_t slot) {
    if (slots_.size() <= slot) slots_.resize(slot + 1, 0);
    slots_[slot] = size();
  }

  std::vector<unsigned char> rev_;
  std::vector<std::size_t> slots_;
  std::size_t table_begin_ = 0;
  std::size_t min_align_ = 4;
};

}  // namespace gaze::detail
