#pragma once

#include <unistd.h>

#include <filesystem>
#include <stdexcept>
#include <string>

#include "r2csl/common.hpp"

namespace testutil {

// Kind of the r2csl::Error a callable throws; fails the test if it does not.
template <typename F>
r2csl::ErrorKind thrown_kind(F&& f) {
  try {
    f();
  } catch (const r2csl::Error& e) {
    return e.kind();
  }
  throw std::runtime_error("expected an r2csl::Error");
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("r2csl-test-" + tag + "-" + std::to_string(++counter) + "-" +
             std::to_string(static_cast<long>(::getpid())));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil
