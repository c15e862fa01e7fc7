#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "canids/can_core.hpp"

namespace testing {

inline canids::CanFrame frame(std::uint64_t t_us, unsigned id, std::uint8_t dlc = 0) {
  canids::CanFrame f;
  f.timestamp_us = t_us;
  f.id = canids::CanId(id);
  f.dlc = dlc;
  f.payload.assign(dlc, 0);
  return f;
}

inline std::vector<canids::CanFrame> frames_of(const std::vector<unsigned>& ids) {
  std::vector<canids::CanFrame> out;
  for (std::size_t i = 0; i < ids.size(); ++i) out.push_back(frame(i * 1000, ids[i]));
  return out;
}

// Scratch directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("canids_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
