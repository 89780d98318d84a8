#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cxr_audit/annotations.hpp"
#include "cxr_audit/synthgen.hpp"

namespace fixtures {

// Fresh directory under the system temp dir, removed on destruction.
class temp_dir {
 public:
  explicit temp_dir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("cxr_audit_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~temp_dir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  temp_dir(const temp_dir&) = delete;
  temp_dir& operator=(const temp_dir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline cxr_audit::annotation_record rec(std::string image, std::string rad,
                                        cxr_audit::class_label label) {
  return {std::move(image), std::move(rad), label, std::nullopt};
}

inline cxr_audit::annotation_record rec(std::string image, std::string rad,
                                        cxr_audit::class_label label, cxr_audit::bbox b) {
  return {std::move(image), std::move(rad), label, b};
}

inline cxr_audit::image_index index_of(const std::vector<cxr_audit::annotation_record>& records) {
  return cxr_audit::build_image_index(records);
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

}  // namespace fixtures
