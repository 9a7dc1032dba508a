#include "timebin/tags_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace timebin {

namespace {

constexpr char kMagic[4] = {'T', 'T', 'G', '1'};
constexpr std::size_t kHeaderBytes = 13;
constexpr std::size_t kRecordBytes = 9;

void put_u64_le(std::string& out, std::uint64_t value) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
  }
}

std::uint64_t get_u64_le(const unsigned char* p) {
  std::uint64_t value = 0;
  for (int i = 0; i < 8; ++i) {
    value |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  }
  return value;
}

[[noreturn]] void fail(const std::string& path, std::size_t offset,
                       const std::string& what) {
  std::ostringstream msg;
  msg << path << ": " << what << " at byte offset " << offset;
  throw std::runtime_error(msg.str());
}

}  // namespace

void write_ttg1(const std::string& path, const TagFile& file) {
  if (file.channel_count == 0) {
    throw std::invalid_argument("channel_count must be >= 1");
  }
  std::string buffer;
  buffer.reserve(kHeaderBytes + kRecordBytes * file.tags.size());
  buffer.append(kMagic, 4);
  std::uint64_t res_bits = std::bit_cast<std::uint64_t>(file.tick_resolution_ps);
  put_u64_le(buffer, res_bits);
  buffer.push_back(static_cast<char>(file.channel_count));
  std::array<std::uint64_t, 256> last_ticks{};
  std::array<bool, 256> seen{};
  for (const TimeTag& tag : file.tags) {
    if (tag.channel >= file.channel_count) {
      throw std::invalid_argument("tag channel index exceeds channel_count");
    }
    if (seen[tag.channel] && tag.ticks < last_ticks[tag.channel]) {
      throw std::invalid_argument(
          "tags must be sorted by ticks within each channel");
    }
    seen[tag.channel] = true;
    last_ticks[tag.channel] = tag.ticks;
    put_u64_le(buffer, tag.ticks);
    buffer.push_back(static_cast<char>(tag.channel));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error(path + ": cannot open for writing");
  }
  out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  if (!out) {
    throw std::runtime_error(path + ": write failed");
  }
}

TagFile read_ttg1(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error(path + ": cannot open for reading");
  }
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (data.size() < kHeaderBytes) {
    fail(path, data.size(), "truncated header");
  }
  if (std::memcmp(data.data(), kMagic, 4) != 0) {
    fail(path, 0, "bad magic (expected TTG1)");
  }
  const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
  TagFile file;
  file.tick_resolution_ps =
      std::bit_cast<double>(get_u64_le(bytes + 4));
  if (!(file.tick_resolution_ps > 0.0)) {
    fail(path, 4, "non-positive tick resolution");
  }
  file.channel_count = bytes[12];
  if (file.channel_count == 0) {
    fail(path, 12, "channel count must be >= 1");
  }
  const std::size_t payload = data.size() - kHeaderBytes;
  if (payload % kRecordBytes != 0) {
    fail(path, kHeaderBytes + payload - payload % kRecordBytes,
         "truncated record");
  }
  const std::size_t records = payload / kRecordBytes;
  file.tags.reserve(records);
  for (std::size_t i = 0; i < records; ++i) {
    const std::size_t offset = kHeaderBytes + i * kRecordBytes;
    TimeTag tag;
    tag.ticks = get_u64_le(bytes + offset);
    tag.channel = bytes[offset + 8];
    if (tag.channel >= file.channel_count) {
      fail(path, offset + 8, "channel index exceeds declared channel count");
    }
    file.tags.push_back(tag);
  }
  return file;
}

void write_tags_csv(const std::string& path,
                    const std::vector<TimeTag>& tags) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error(path + ": cannot open for writing");
  }
  out << "ticks,channel\n";
  for (const TimeTag& tag : tags) {
    out << tag.ticks << ',' << static_cast<unsigned>(tag.channel) << '\n';
  }
  if (!out) {
    throw std::runtime_error(path + ": write failed");
  }
}

std::vector<TimeTag> read_tags_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error(path + ": cannot open for reading");
  }
  std::string line;
  if (!std::getline(in, line) || line != "ticks,channel") {
    throw std::runtime_error(path + ": missing ticks,channel header");
  }
  std::vector<TimeTag> tags;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos) {
      std::ostringstream msg;
      msg << path << ": malformed record on line " << line_no;
      throw std::runtime_error(msg.str());
    }
    TimeTag tag;
    try {
      tag.ticks = std::stoull(line.substr(0, comma));
      const int channel = std::stoi(line.substr(comma + 1));
      if (channel < 0 || channel > 255) {
        throw std::out_of_range("channel");
      }
      tag.channel = static_cast<std::uint8_t>(channel);
    } catch (const std::exception&) {
      std::ostringstream msg;
      msg << path << ": malformed record on line " << line_no;
      throw std::runtime_error(msg.str());
    }
    tags.push_back(tag);
  }
  return tags;
}

std::vector<std::vector<TimeTag>> split_channels(
    const std::vector<TimeTag>& tags, std::uint8_t channel_count) {
  std::vector<std::vector<TimeTag>> out(channel_count);
  for (const TimeTag& tag : tags) {
    if (tag.channel >= channel_count) {
      throw std::invalid_argument("tag channel index exceeds channel_count");
    }
    out[tag.channel].push_back(tag);
  }
  return out;
}

}  // namespace timebin
