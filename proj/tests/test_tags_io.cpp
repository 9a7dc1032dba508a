#include <doctest.h>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "timebin/tags_io.hpp"
#include "timebin/types.hpp"

using namespace timebin;

namespace {

/// Unique temporary path, removed when the guard leaves scope.
struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) {
    path = (std::filesystem::temp_directory_path() /
            ("timebin_test_" + name + "_" + std::to_string(counter()++)))
               .string();
  }
  ~TempFile() { std::remove(path.c_str()); }
  static int& counter() {
    static int n = 0;
    return n;
  }
};

TagFile sample_file() {
  TagFile file;
  file.tick_resolution_ps = 1.0;
  file.channel_count = 2;
  file.tags = {{100, 0}, {250, 1}, {300, 0}, {1000000000000ull, 1}};
  return file;
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return data;
}

}  // namespace

TEST_CASE("binary container round-trips tags exactly") {
  const TagFile file = sample_file();
  TempFile tmp("roundtrip");
  write_ttg1(tmp.path, file);
  const TagFile back = read_ttg1(tmp.path);
  CHECK(back.tick_resolution_ps == file.tick_resolution_ps);
  CHECK(back.channel_count == file.channel_count);
  CHECK(back.tags == file.tags);
}

TEST_CASE("binary layout is exactly as documented") {
  TagFile file;
  file.tick_resolution_ps = 1.0;
  file.channel_count = 2;
  file.tags = {{0x0102030405060708ull, 0x09}};
  file.channel_count = 10;  // allow channel 9
  TempFile tmp("layout");
  write_ttg1(tmp.path, file);
  const std::string bytes = read_bytes(tmp.path);
  REQUIRE(bytes.size() == 13 + 9);
  CHECK(bytes.substr(0, 4) == "TTG1");
  // float64 little-endian 1.0 = 00 00 00 00 00 00 F0 3F.
  CHECK(static_cast<unsigned char>(bytes[10]) == 0xF0);
  CHECK(static_cast<unsigned char>(bytes[11]) == 0x3F);
  CHECK(static_cast<unsigned char>(bytes[12]) == 10);  // channel count
  // uint64 ticks little-endian: low byte first.
  CHECK(static_cast<unsigned char>(bytes[13]) == 0x08);
  CHECK(static_cast<unsigned char>(bytes[20]) == 0x01);
  CHECK(static_cast<unsigned char>(bytes[21]) == 0x09);  // channel
}

TEST_CASE("bad magic is reported at byte offset zero") {
  TempFile tmp("magic");
  std::ofstream(tmp.path, std::ios::binary) << "NOPE then some bytes";
  try {
    read_ttg1(tmp.path);
    FAIL("expected failure");
  } catch (const std::exception& e) {
    const std::string what = e.what();
    CHECK(what.find("byte offset 0") != std::string::npos);
  }
}

TEST_CASE("truncated header and truncated record name their offsets") {
  const TagFile file = sample_file();
  TempFile tmp("trunc");
  write_ttg1(tmp.path, file);
  const std::string bytes = read_bytes(tmp.path);

  SUBCASE("header cut inside the resolution field") {
    TempFile cut("trunc_header");
    std::ofstream(cut.path, std::ios::binary) << bytes.substr(0, 8);
    try {
      read_ttg1(cut.path);
      FAIL("expected failure");
    } catch (const std::exception& e) {
      CHECK(std::string(e.what()).find("byte offset") != std::string::npos);
    }
  }

  SUBCASE("payload cut mid-record names the record start") {
    TempFile cut("trunc_record");
    // Keep the header, first record (13 + 9 = 22), plus 4 stray bytes.
    std::ofstream(cut.path, std::ios::binary) << bytes.substr(0, 26);
    try {
      read_ttg1(cut.path);
      FAIL("expected failure");
    } catch (const std::exception& e) {
      CHECK(std::string(e.what()).find("byte offset 22") !=
            std::string::npos);
    }
  }
}

TEST_CASE("writer rejects channels beyond the declared count") {
  TagFile file;
  file.channel_count = 1;
  file.tags = {{10, 0}, {20, 1}};
  TempFile tmp("chan");
  CHECK_THROWS_AS(write_ttg1(tmp.path, file), std::invalid_argument);
}

TEST_CASE("writer rejects unsorted tags within a channel") {
  TagFile file;
  file.channel_count = 1;
  file.tags = {{100, 0}, {50, 0}};
  TempFile tmp("sorted");
  CHECK_THROWS_AS(write_ttg1(tmp.path, file), std::invalid_argument);
}

TEST_CASE("interleaved channels may overlap in time") {
  TagFile file;
  file.channel_count = 2;
  file.tags = {{100, 0}, {50, 1}, {200, 0}, {60, 1}};
  TempFile tmp("interleave");
  CHECK_NOTHROW(write_ttg1(tmp.path, file));
  const TagFile back = read_ttg1(tmp.path);
  CHECK(back.tags == file.tags);
}

TEST_CASE("text export round-trips and matches the documented header") {
  const TagFile file = sample_file();
  TempFile tmp("csv");
  write_tags_csv(tmp.path, file.tags);
  const std::string text = read_bytes(tmp.path);
  CHECK(text.rfind("ticks,channel\n", 0) == 0);
  CHECK(text.find("100,0\n") != std::string::npos);
  CHECK(text.find("1000000000000,1\n") != std::string::npos);
  const std::vector<TimeTag> back = read_tags_csv(tmp.path);
  CHECK(back == file.tags);
}

TEST_CASE("text and binary containers carry identical streams") {
  const TagFile file = sample_file();
  TempFile bin("both_bin");
  TempFile csv("both_csv");
  write_ttg1(bin.path, file);
  write_tags_csv(csv.path, file.tags);
  CHECK(read_ttg1(bin.path).tags == read_tags_csv(csv.path));
}

TEST_CASE("malformed text rows are rejected") {
  TempFile tmp("badcsv");
  std::ofstream(tmp.path) << "ticks,channel\n12,0\nnot-a-number,1\n";
  CHECK_THROWS(read_tags_csv(tmp.path));
}

TEST_CASE("split_channels partitions by channel index") {
  const std::vector<TimeTag> tags = {{10, 0}, {20, 1}, {30, 0}, {40, 2}};
  const auto split = split_channels(tags, 3);
  REQUIRE(split.size() == 3);
  CHECK(split[0] == std::vector<TimeTag>{{10, 0}, {30, 0}});
  CHECK(split[1] == std::vector<TimeTag>{{20, 1}});
  CHECK(split[2] == std::vector<TimeTag>{{40, 2}});
}
