#pragma once

// EVS1 binary and CSV event stream codecs.
//
// EVS1 layout (all integers little-endian):
//   header  : "EVS1" | width u16 | height u16                       (8 octets)
//   record  : t u64 (us) | x u16 | y u16 | polarity u8 | gray u8      (14 octets)

#include <array>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evfish/error.hpp"
#include "evfish/text.hpp"

namespace evfish {

enum class Polarity : std::uint8_t { off = 0, on = 1 };

struct Event {
  std::uint64_t t = 0;  // microseconds
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  Polarity polarity = Polarity::off;
  std::uint8_t gray = 0;

  friend bool operator==(const Event&, const Event&) = default;
};

struct StreamHeader {
  std::uint16_t width = 1280;
  std::uint16_t height = 800;

  friend bool operator==(const StreamHeader&, const StreamHeader&) = default;

  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
};

struct EventStream {
  StreamHeader header;
  std::vector<Event> events;

  friend bool operator==(const EventStream&, const EventStream&) = default;
};

inline constexpr std::array<char, 4> kEvs1Magic{'E', 'V', 'S', '1'};
inline constexpr std::size_t kEvs1HeaderSize = 8;
inline constexpr std::size_t kEvs1RecordSize = 14;
inline constexpr std::string_view kEventCsvHeader = "t_us,x,y,polarity,gray";

namespace detail {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(v) >> (8 * i)));
  }
}

template <typename T>
T get_le(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return static_cast<T>(v);
}

inline void validate_header(const StreamHeader& h) {
  if (h.width < 1 || h.height < 1) {
    throw InvariantViolation("stream geometry must be at least 1x1");
  }
}

}  // namespace detail

/// Checks the per-stream invariants shared by both writers: coordinates in
/// bounds, timestamps non-decreasing.
inline void validate_events(const StreamHeader& header, std::span<const Event> events) {
  detail::validate_header(header);
  std::uint64_t last_t = 0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (!header.contains(e.x, e.y)) {
      throw InvariantViolation("event " + std::to_string(i) + " at (" + std::to_string(e.x) + "," +
                               std::to_string(e.y) + ") outside " + std::to_string(header.width) +
                               "x" + std::to_string(header.height));
    }
    if (e.polarity != Polarity::off && e.polarity != Polarity::on) {
      throw InvariantViolation("event " + std::to_string(i) + " has invalid polarity");
    }
    if (i > 0 && e.t < last_t) {
      throw InvariantViolation("event " + std::to_string(i) + " timestamp regresses");
    }
    last_t = e.t;
  }
}

inline std::vector<std::uint8_t> write_stream(const StreamHeader& header,
                                              std::span<const Event> events) {
  validate_events(header, events);
  std::vector<std::uint8_t> out;
  out.reserve(kEvs1HeaderSize + kEvs1RecordSize * events.size());
  for (char c : kEvs1Magic) out.push_back(static_cast<std::uint8_t>(c));
  detail::put_le(out, header.width);
  detail::put_le(out, header.height);
  for (const auto& e : events) {
    detail::put_le(out, e.t);
    detail::put_le(out, e.x);
    detail::put_le(out, e.y);
    detail::put_le(out, static_cast<std::uint8_t>(e.polarity));
    detail::put_le(out, e.gray);
  }
  return out;
}

inline EventStream read_stream(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kEvs1HeaderSize) {
    if (bytes.size() >= 4 && !std::equal(kEvs1Magic.begin(), kEvs1Magic.end(), bytes.begin(),
                                         [](char a, std::uint8_t b) { return a == static_cast<char>(b); })) {
      throw BadMagic("missing EVS1 magic");
    }
    throw TruncatedRecord("input shorter than the 8-octet EVS1 header");
  }
  for (std::size_t i = 0; i < kEvs1Magic.size(); ++i) {
    if (static_cast<char>(bytes[i]) != kEvs1Magic[i]) throw BadMagic("missing EVS1 magic");
  }
  EventStream s;
  s.header.width = detail::get_le<std::uint16_t>(bytes.data() + 4);
  s.header.height = detail::get_le<std::uint16_t>(bytes.data() + 6);
  if (s.header.width < 1 || s.header.height < 1) {
    throw InvariantViolation("EVS1 header declares empty geometry");
  }

  const std::size_t body = bytes.size() - kEvs1HeaderSize;
  if (body % kEvs1RecordSize != 0) {
    throw TruncatedRecord("trailing " + std::to_string(body % kEvs1RecordSize) +
                          " octets do not form a whole record");
  }
  const std::size_t n = body / kEvs1RecordSize;
  s.events.resize(n);
  const std::uint8_t* p = bytes.data() + kEvs1HeaderSize;
  for (std::size_t i = 0; i < n; ++i, p += kEvs1RecordSize) {
    Event& e = s.events[i];
    e.t = detail::get_le<std::uint64_t>(p);
    e.x = detail::get_le<std::uint16_t>(p + 8);
    e.y = detail::get_le<std::uint16_t>(p + 10);
    const std::uint8_t pol = p[12];
    e.gray = p[13];
    if (pol > 1) throw InvariantViolation("record " + std::to_string(i) + " has polarity " + std::to_string(pol));
    e.polarity = static_cast<Polarity>(pol);
    if (e.x >= s.header.width || e.y >= s.header.height) {
      throw CoordOutOfRange("record " + std::to_string(i) + " at (" + std::to_string(e.x) + "," +
                            std::to_string(e.y) + ")");
    }
    if (i > 0 && e.t < s.events[i - 1].t) {
      throw TimestampRegression("record " + std::to_string(i) + " t=" + std::to_string(e.t) +
                                " precedes " + std::to_string(s.events[i - 1].t));
    }
  }
  return s;
}

inline std::string write_csv_events(std::span<const Event> events, const StreamHeader& header) {
  validate_events(header, events);
  std::string out(kEventCsvHeader);
  out += '\n';
  for (const auto& e : events) {
    out += std::to_string(e.t);
    out += ',';
    out += std::to_string(e.x);
    out += ',';
    out += std::to_string(e.y);
    out += ',';
    out += e.polarity == Polarity::on ? '1' : '0';
    out += ',';
    out += std::to_string(e.gray);
    out += '\n';
  }
  return out;
}

/// CSV carries no geometry, so bounds are checked against the caller's header.
inline std::vector<Event> read_csv_events(std::string_view csv, const StreamHeader& header,
                                          std::string_view source = "<csv>") {
  detail::validate_header(header);
  const auto rows = text::lines(csv);
  if (rows.empty() || text::trim(rows[0]) != kEventCsvHeader) {
    text::parse_fail(source, 1, 1, "expected header \"" + std::string(kEventCsvHeader) + "\"");
  }
  std::vector<Event> events;
  events.reserve(rows.size() - 1);
  for (std::size_t li = 1; li < rows.size(); ++li) {
    const auto line_no = li + 1;
    if (text::trim(rows[li]).empty()) continue;
    const auto fields = text::split(rows[li], ',');
    if (fields.size() != 5) {
      text::parse_fail(source, line_no, 1, "expected 5 fields, got " + std::to_string(fields.size()));
    }
    std::uint64_t t = 0;
    std::uint32_t x = 0, y = 0, pol = 0, gray = 0;
    if (!text::parse_number(fields[0], t)) text::parse_fail(source, line_no, 1, "bad t_us");
    if (!text::parse_number(fields[1], x)) text::parse_fail(source, line_no, 2, "bad x");
    if (!text::parse_number(fields[2], y)) text::parse_fail(source, line_no, 3, "bad y");
    if (!text::parse_number(fields[3], pol) || pol > 1) {
      text::parse_fail(source, line_no, 4, "polarity must be 0 or 1");
    }
    if (!text::parse_number(fields[4], gray) || gray > 255) {
      text::parse_fail(source, line_no, 5, "gray must be 0..255");
    }
    if (x >= header.width || y >= header.height) {
      throw CoordOutOfRange(std::string(source) + ":" + std::to_string(line_no) + ": (" +
                            std::to_string(x) + "," + std::to_string(y) + ") outside sensor");
    }
    if (!events.empty() && t < events.back().t) {
      throw TimestampRegression(std::string(source) + ":" + std::to_string(line_no) +
                                ": timestamp regresses");
    }
    events.push_back(Event{t, static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y),
                           static_cast<Polarity>(pol), static_cast<std::uint8_t>(gray)});
  }
  return events;
}

// File helpers.

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string read_file_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline void write_file(const std::string& path, std::string_view textual) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out.write(textual.data(), static_cast<std::streamsize>(textual.size()));
}

/// Loads an event file, choosing the codec by extension (".csv" is CSV,
/// anything else EVS1). CSV input takes its geometry from `csv_geometry`.
inline EventStream load_events(const std::string& path, const StreamHeader& csv_geometry) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) {
    return {csv_geometry, read_csv_events(read_file_text(path), csv_geometry, path)};
  }
  const auto bytes = read_file_bytes(path);
  return read_stream(bytes);
}

inline void save_events(const std::string& path, const EventStream& s) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) {
    write_file(path, write_csv_events(s.events, s.header));
  } else {
    write_file(path, write_stream(s.header, s.events));
  }
}

}  // namespace evfish
