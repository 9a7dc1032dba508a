#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "timebin/types.hpp"

namespace timebin {

/// A time-tag stream with its tick resolution and declared channel count.
struct TagFile {
  std::vector<TimeTag> tags;
  double tick_resolution_ps = 1.0;
  std::uint8_t channel_count = 1;
};

/// Binary time-tag container, little-endian throughout:
///   bytes 0-3   magic "TTG1"
///   bytes 4-11  float64  tick resolution in ps
///   byte  12    uint8    channel count
///   then per record: uint64 ticks, uint8 channel (9 bytes each).
/// Tags must be sorted by ticks within each channel; write_ttg1 rejects
/// channel indices >= channel_count.
void write_ttg1(const std::string& path, const TagFile& file);

/// Reads a TTG1 file, validating the magic and that the payload is a
/// whole number of records.  Errors name the byte offset at which the
/// file is malformed or truncated.
TagFile read_ttg1(const std::string& path);

/// Plain-text export: header line "ticks,channel", one record per line.
void write_tags_csv(const std::string& path, const std::vector<TimeTag>& tags);

/// Parses the CSV format written by write_tags_csv.
std::vector<TimeTag> read_tags_csv(const std::string& path);

/// Splits a mixed stream into per-channel streams (index = channel).
std::vector<std::vector<TimeTag>> split_channels(
    const std::vector<TimeTag>& tags, std::uint8_t channel_count);

}  // namespace timebin
