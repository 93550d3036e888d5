#pragma once

// Arrow IPC file format writer (the format Feather v2 files use), emitting
// float64 columns with validity bitmaps. Written against the published
// format: an 8-byte magic, encapsulated schema and record-batch messages,
// an end-of-stream marker, and a footer indexing the batches.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "gaze/core.hpp"
#include "gaze/detail/flatbuf.hpp"
#include "gaze/error.hpp"

namespace gaze {

namespace detail_ipc {

// Enum values from the Arrow flatbuffers schema.
inline constexpr std::int16_t kMetadataV5 = 4;
inline constexpr std::uint8_t kHeaderSchema = 1;
inline constexpr std::uint8_t kHeaderRecordBatch = 3;
inline constexpr std::uint8_t kTypeFloatingPoint = 3;
inline constexpr std::int16_t kPrecisionDouble = 2;

struct Column {
  std::string name;
  std::span<const double> values;
};

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k)
    out.push_back(static_cast<unsigned char>((v >> (8 * k)) & 0xFF));
}

inline void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int k = 0; k < 8; ++k)
    out.push_back(static_cast<unsigned char>((v >> (8 * k)) & 0xFF));
}

/// Appends one encapsulated message (continuation marker, size prefix,
/// padded flatbuffer, body) and returns (metadata_length, body_length).
inline std::pair<std::uint32_t, std::uint64_t> put_message(
    std::vector<unsigned char>& out, const std::vector<unsigned char>& meta,
    const std::vector<unsigned char>& body) {
  std::size_t padded = meta.size();
  while ((8 + padded) % 8 != 0) ++padded;
  put_u32(out, 0xFFFFFFFF);
  put_u32(out, static_cast<std::uint32_t>(padded));
  out.insert(out.end(), meta.begin(), meta.end());
  out.resize(out.size() + (padded - meta.size()), 0);
  out.insert(out.end(), body.begin(), body.end());
  return {static_cast<std::uint32_t>(8 + padded),
          static_cast<std::uint64_t>(body.size())};
}

/// Schema table with one nullable float64 field per column. Shared between
/// the schema message and the footer, which embeds a second copy.
inline detail::FlatBufferBuilder::Offset build_schema(
    detail::FlatBufferBuilder& fb, const std::vector<Column>& columns) {
  std::vector<detail::FlatBufferBuilder::Offset> fields;
  for (const Column& c : columns) {
    fb.begin_table();  // FloatingPoint { precision }
    fb.add_scalar_slot<std::int16_t>(0, kPrecisionDouble);
    const auto fp = fb.end_table();
    const auto name = fb.create_string(c.name);
    const auto children = fb.create_offset_vector({});
    fb.begin_table();  // Field { name, nullable, type_type, type, children }
    fb.add_offset_slot(0, name);
    fb.add_scalar_slot<std::uint8_t>(1, 1);  // nullable
    fb.add_scalar_slot<std::uint8_t>(2, kTypeFloatingPoint);
    fb.add_offset_slot(3, fp);
    fb.add_offset_slot(5, children);
    fields.push_back(fb.end_table());
  }
  const auto fvec = fb.create_offset_vector(fields);
  fb.begin_table();  // Schema { endianness (default little), fields }
  fb.add_offset_slot(1, fvec);
  return fb.end_table();
}

inline std::vector<unsigned char> schema_message(
    const std::vector<Column>& columns) {
  detail::FlatBufferBuilder fb;
  const auto schema = build_schema(fb, columns);
  fb.begin_table();  // Message { version, header_type, header, bodyLength }
  fb.add_scalar_slot<std::int16_t>(0, kMetadataV5);
  fb.add_scalar_slot<std::uint8_t>(1, kHeaderSchema);
  fb.add_offset_slot(2, schema);
  return fb.finish(fb.end_table());
}

struct BatchParts {
  std::vector<unsigned char> meta;
  std::vector<unsigned char> body;
};

inline BatchParts batch_message(const std::vector<Column>& columns,
                                std::size_t rows) {
  // Body: per column a validity bitmap (omitted when nothing is null) and
  // the value data, each 8-byte aligned. Null slots carry zeroed payloads so
  // the missing marker is the null bit, not a NaN payload.
  std::vector<unsigned char> body;
  std::vector<unsigned char> nodes;   // FieldNode { length, null_count }
  std::vector<unsigned char> buffers; // Buffer { offset, length }
  auto add_buffer = [&](std::uint64_t offset, std::uint64_t length) {
    put_u64(buffers, offset);
    put_u64(buffers, length);
  };
  for (const Column& c : columns) {
    std::size_t null_count = 0;
    for (double v : c.values)
      if (is_missing(v)) ++null_count;
    put_u64(nodes, static_cast<std::uint64_t>(rows));
    put_u64(nodes, static_cast<std::uint64_t>(null_count));

    if (null_count == 0) {
      add_buffer(body.size(), 0);
    } else {
      const std::size_t bitmap_bytes = (rows + 7) / 8;
      add_buffer(body.size(), bitmap_bytes);
      std::vector<unsigned char> bitmap(bitmap_bytes, 0);
      for (std::size_t i = 0; i < rows; ++i)
        if (!is_missing(c.values[i]))
          bitmap[i / 8] |= static_cast<unsigned char>(1u << (i % 8));
      body.insert(body.end(), bitmap.begin(), bitmap.end());
      while (body.size() % 8 != 0) body.push_back(0);
    }

    add_buffer(body.size(), rows * 8);
    for (std::size_t i = 0; i < rows; ++i) {
      const double v = is_missing(c.values[i]) ? 0.0 : c.values[i];
      std::uint64_t bits;
      std::memcpy(&bits, &v, 8);
      put_u64(body, bits);
    }
  }

  detail::FlatBufferBuilder fb;
  const auto nodes_vec = fb.create_struct_vector(nodes, 16, 8);
  const auto buffers_vec = fb.create_struct_vector(buffers, 16, 8);
  fb.begin_table();  // RecordBatch { length, nodes, buffers }
  fb.add_scalar_slot<std::int64_t>(0, static_cast<std::int64_t>(rows));
  fb.add_offset_slot(1, nodes_vec);
  fb.add_offset_slot(2, buffers_vec);
  const auto batch = fb.end_table();

  fb.begin_table();  // Message
  fb.add_scalar_slot<std::int16_t>(0, kMetadataV5);
  fb.add_scalar_slot<std::uint8_t>(1, kHeaderRecordBatch);
  fb.add_offset_slot(2, batch);
  fb.add_scalar_slot<std::int64_t>(3, static_cast<std::int64_t>(body.size()));
  return {fb.finish(fb.end_table()), std::move(body)};
}

struct BlockEntry {
  std::uint64_t offset;
  std::uint32_t meta_length;
  std::uint64_t body_length;
};

inline std::vector<unsigned char> footer(
    const std::vector<Column>& columns,
    const std::vector<BlockEntry>& batches) {
  detail::FlatBufferBuilder fb;
  const auto schema = build_schema(fb, columns);
  std::vector<unsigned char> blocks;  // Block { offset, metaDataLength, bodyLength }
  for (const BlockEntry& b : batches) {
    put_u64(blocks, b.offset);
    put_u32(blocks, b.meta_length);
    put_u32(blocks, 0);  // struct padding
    put_u64(blocks, b.body_length);
  }
  const auto dict_vec = fb.create_struct_vector({}, 24, 8);
  const auto batch_vec = fb.create_struct_vector(blocks, 24, 8);
  fb.begin_table();  // Footer { version, schema, dictionaries, recordBatches }
  fb.add_scalar_slot<std::int16_t>(0, kMetadataV5);
  fb.add_offset_slot(1, schema);
  fb.add_offset_slot(2, dict_vec);
  fb.add_offset_slot(3, batch_vec);
  return fb.finish(fb.end_table());
}

inline std::vector<Column> frame_columns(const GazeFrame& f) {
  std::vector<Column> cols = {{"time", f.time()},
                              {"x_px", f.x_px()},
                              {"y_px", f.y_px()}};
  if (f.has_degrees()) {
    cols.push_back({"x_dva", f.x_dva()});
    cols.push_back({"y_dva", f.y_dva()});
  }
  if (f.has_velocity()) {
    cols.push_back({"vx", f.vx()});
    cols.push_back({"vy", f.vy()});
  }
  if (f.has_pupil()) cols.push_back({"pupil", f.pupil()});
  return cols;
}

}  // namespace detail_ipc

inline std::vector<unsigned char> encode_gaze_ipc(const GazeFrame& f) {
  using namespace detail_ipc;
  const auto columns = frame_columns(f);
  std::vector<unsigned char> out;
  const char* magic = "ARROW1";
  out.insert(out.end(), magic, magic + 6);
  out.push_back(0);
  out.push_back(0);

  put_message(out, schema_message(columns), {});

  std::vector<BlockEntry> batches;
  if (f.size() > 0) {
    const std::uint64_t at = out.size();
    auto parts = batch_message(columns, f.size());
    auto [meta_len, body_len] = put_message(out, parts.meta, parts.body);
    batches.push_back({at, meta_len, body_len});
  }

  put_u32(out, 0xFFFFFFFF);  // end-of-stream marker
  put_u32(out, 0);

  const auto footer_bytes = footer(columns, batches);
  out.insert(out.end(), footer_bytes.begin(), footer_bytes.end());
  put_u32(out, static_cast<std::uint32_t>(footer_bytes.size()));
  out.insert(out.end(), magic, magic + 6);
  return out;
}

inline void write_gaze_ipc(const GazeFrame& f,
                           const std::filesystem::path& path) {
  const auto bytes = encode_gaze_ipc(f);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os)
    detail::raise(ErrorKind::Io, "cannot open " + path.string() +
                                     " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()),
           static_cast<std::streamsize>(bytes.size()));
  os.flush();
  if (!os)
    detail::raise(ErrorKind::Io, "failed writing " + path.string());
}

}  // namespace gaze
