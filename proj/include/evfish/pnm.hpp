#pragma once

// Binary netpbm writers: P5 for single-mode frames, P6 for mixed frames.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "evfish/event_io.hpp"
#include "evfish/framing.hpp"

namespace evfish {

inline std::vector<std::uint8_t> encode_pgm(const ModeFrame& f) {
  const std::string head = "P5\n" + std::to_string(f.width) + " " + std::to_string(f.height) + "\n255\n";
  std::vector<std::uint8_t> out(head.begin(), head.end());
  out.insert(out.end(), f.pixels.begin(), f.pixels.end());
  return out;
}

inline std::vector<std::uint8_t> encode_ppm(const MixedFrame& f) {
  const std::string head = "P6\n" + std::to_string(f.width) + " " + std::to_string(f.height) + "\n255\n";
  std::vector<std::uint8_t> out(head.begin(), head.end());
  out.insert(out.end(), f.pixels.begin(), f.pixels.end());
  return out;
}

inline std::string frame_filename(std::size_t index, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%06zu.%s", index, ext);
  return buf;
}

}  // namespace evfish
