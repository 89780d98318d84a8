#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cxr_audit {

enum class transfer_syntax {
  explicit_vr_little_endian,  // 1.2.840.10008.1.2.1
  implicit_vr_little_endian,  // 1.2.840.10008.1.2
};

inline constexpr std::string_view kExplicitVrLittleEndianUid =
    "1.2.840.10008.1.2.1";
inline constexpr std::string_view kImplicitVrLittleEndianUid =
    "1.2.840.10008.1.2";

std::string_view transfer_syntax_uid(transfer_syntax syntax);

/// Patient and image attributes read from a Part-10 header.
///
/// String values keep their on-disk spelling minus trailing space/NUL
/// padding. Integer attributes are absent when the tag is missing, empty,
/// or zero.
struct dicom_header {
  std::string image_id;
  transfer_syntax syntax = transfer_syntax::explicit_vr_little_endian;
  std::optional<std::string> patient_age_raw;
  std::optional<std::string> patient_sex_raw;
  std::optional<std::string> photometric;
  std::optional<int> number_of_frames;
  std::optional<int> rows;
  std::optional<int> columns;
  std::optional<int> bits_allocated;

  friend bool operator==(const dicom_header&, const dicom_header&) = default;
};

enum class dicom_error_kind {
  missing_magic,
  truncated,
  unsupported_transfer_syntax,
  io_error,
};

std::string_view error_kind_name(dicom_error_kind kind);

class dicom_parse_error : public std::runtime_error {
 public:
  dicom_parse_error(dicom_error_kind kind, std::uint64_t offset,
                    const std::string& detail);

  dicom_error_kind kind() const { return kind_; }
  std::uint64_t offset() const { return offset_; }

 private:
  dicom_error_kind kind_;
  std::uint64_t offset_;
};

/// Parses the header of an in-memory Part-10 file.
///
/// Stops at Pixel Data (7FE0,0010); nothing after that tag is inspected.
/// Unknown elements are skipped by their declared length, undefined-length
/// sequences by walking their items. Throws dicom_parse_error.
dicom_header parse_dicom_header(std::span<const std::uint8_t> bytes,
                                std::string image_id = {});

// Reads only the bytes the header walk touches; pixel data stays on disk.
dicom_header parse_dicom_file(const std::filesystem::path& path);

enum class age_validity { valid, out_of_range, malformed, missing };

std::string_view age_validity_name(age_validity v);

struct age_parse {
  std::optional<int> years;
  age_validity validity = age_validity::missing;

  friend bool operator==(const age_parse&, const age_parse&) = default;
};

inline constexpr int kMinValidAge = 1;
inline constexpr int kMaxValidAge = 99;

/// Accepts "nnnU" (U in D/W/M/Y, converted to whole years by integer
/// division) and bare unsigned integers (years). Valid means 1..99 years.
age_parse parse_age(std::optional<std::string_view> raw);

enum class sex_category { male, female, other, missing };

inline constexpr int kNumSexCategories = 4;

std::string_view sex_category_name(sex_category s);

// "M", "F", "O" after trailing padding strip; anything else is missing.
sex_category normalize_sex(std::optional<std::string_view> raw);

struct scan_failure {
  dicom_error_kind kind;
  std::uint64_t offset = 0;
  std::string message;
};

struct scan_entry {
  std::string image_id;
  std::filesystem::path path;
  std::variant<dicom_header, scan_failure> result;

  bool ok() const { return std::holds_alternative<dicom_header>(result); }
  const dicom_header* header() const { return std::get_if<dicom_header>(&result); }
  const scan_failure* failure() const { return std::get_if<scan_failure>(&result); }
};

struct scan_options {
  // Compared case-insensitively against the file extension.
  std::vector<std::string> extensions = {".dicom", ".dcm"};
  // 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
};

class directory_unreadable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One entry per matching regular file in `root` (non-recursive), sorted by
/// image_id then path. Per-file failures become entries.
std::vector<scan_entry> scan_corpus(const std::filesystem::path& root,
                                    const scan_options& options = {});

using header_map = std::map<std::string, dicom_header>;

// Successfully parsed headers keyed by image_id. Later duplicates are dropped.
header_map headers_by_id(const std::vector<scan_entry>& entries);

}  // namespace cxr_audit
