#include "cxr_audit/dicom_meta.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <cstring>
#include <fstream>
#include <limits>
#include <thread>

namespace cxr_audit {
namespace {

constexpr std::uint32_t kUndefinedLength = 0xFFFFFFFFu;
constexpr std::uint64_t kMagicOffset = 128;
constexpr int kMaxSequenceDepth = 64;

constexpr std::uint32_t make_tag(std::uint16_t group, std::uint16_t element) {
  return (static_cast<std::uint32_t>(group) << 16) | element;
}

constexpr std::uint32_t kTransferSyntaxTag = make_tag(0x0002, 0x0010);
constexpr std::uint32_t kPatientSexTag = make_tag(0x0010, 0x0040);
constexpr std::uint32_t kPatientAgeTag = make_tag(0x0010, 0x1010);
constexpr std::uint32_t kPhotometricTag = make_tag(0x0028, 0x0004);
constexpr std::uint32_t kNumberOfFramesTag = make_tag(0x0028, 0x0008);
constexpr std::uint32_t kRowsTag = make_tag(0x0028, 0x0010);
constexpr std::uint32_t kColumnsTag = make_tag(0x0028, 0x0011);
constexpr std::uint32_t kBitsAllocatedTag = make_tag(0x0028, 0x0100);
constexpr std::uint32_t kPixelDataTag = make_tag(0x7FE0, 0x0010);
constexpr std::uint32_t kItemTag = make_tag(0xFFFE, 0xE000);
constexpr std::uint32_t kItemDelimTag = make_tag(0xFFFE, 0xE00D);
constexpr std::uint32_t kSequenceDelimTag = make_tag(0xFFFE, 0xE0DD);

// VRs with a 2-byte reserved field and a 4-byte length in explicit VR.
bool has_long_length(char a, char b) {
  static constexpr std::array<std::array<char, 2>, 12> kLong = {{
      {'O', 'B'}, {'O', 'W'}, {'O', 'F'}, {'O', 'D'}, {'O', 'L'}, {'O', 'V'},
      {'S', 'Q'}, {'U', 'T'}, {'U', 'N'}, {'U', 'C'}, {'U', 'R'}, {'S', 'V'},
  }};
  if (a == 'U' && b == 'V') return true;
  return std::any_of(kLong.begin(), kLong.end(),
                     [&](const auto& vr) { return vr[0] == a && vr[1] == b; });
}

class byte_source {
 public:
  virtual ~byte_source() = default;
  virtual std::uint64_t size() const = 0;
  virtual void read(std::uint64_t offset, std::span<std::uint8_t> out) const = 0;
};

class span_source final : public byte_source {
 public:
  explicit span_source(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
  std::uint64_t size() const override { return bytes_.size(); }
  void read(std::uint64_t offset, std::span<std::uint8_t> out) const override {
    std::memcpy(out.data(), bytes_.data() + offset, out.size());
  }

 private:
  std::span<const std::uint8_t> bytes_;
};

class file_source final : public byte_source {
 public:
  explicit file_source(const std::filesystem::path& path)
      : in_(path, std::ios::binary) {
    if (!in_) {
      throw dicom_parse_error(dicom_error_kind::io_error, 0,
                              "cannot open " + path.string());
    }
    std::error_code ec;
    size_ = std::filesystem::file_size(path, ec);
    if (ec) {
      throw dicom_parse_error(dicom_error_kind::io_error, 0,
                              "cannot stat " + path.string());
    }
  }
  std::uint64_t size() const override { return size_; }
  void read(std::uint64_t offset, std::span<std::uint8_t> out) const override {
    in_.clear();
    in_.seekg(static_cast<std::streamoff>(offset));
    in_.read(reinterpret_cast<char*>(out.data()),
             static_cast<std::streamsize>(out.size()));
    if (static_cast<std::size_t>(in_.gcount()) != out.size()) {
      throw dicom_parse_error(dicom_error_kind::io_error, offset,
                              "short read");
    }
  }

 private:
  mutable std::ifstream in_;
  std::uint64_t size_ = 0;
};

struct element_header {
  std::uint32_t tag = 0;
  char vr[2] = {0, 0};
  bool has_vr = false;
  std::uint32_t length = 0;
  std::uint64_t start = 0;
  std::uint64_t value_offset = 0;

  std::uint16_t group() const { return static_cast<std::uint16_t>(tag >> 16); }
  bool vr_is(const char* name) const {
    return has_vr && vr[0] == name[0] && vr[1] == name[1];
  }
};

std::uint16_t le16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::string strip_padding(std::string s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\0')) s.pop_back();
  return s;
}

[[noreturn]] void throw_truncated(std::uint64_t offset, const char* what) {
  throw dicom_parse_error(dicom_error_kind::truncated, offset, what);
}

class header_walker {
 public:
  explicit header_walker(const byte_source& src) : src_(src) {}

  dicom_header run(std::string image_id) {
    dicom_header header;
    header.image_id = std::move(image_id);

    check_magic();
    std::uint64_t pos = kMagicOffset + 4;
    pos = read_file_meta(pos, header);
    walk_dataset(pos, header);
    return header;
  }

 private:
  void check_magic() const {
    if (src_.size() < kMagicOffset + 4) {
      throw dicom_parse_error(dicom_error_kind::missing_magic, kMagicOffset,
                              "file shorter than preamble + magic");
    }
    std::array<std::uint8_t, 4> magic{};
    src_.read(kMagicOffset, magic);
    if (std::memcmp(magic.data(), "DICM", 4) != 0) {
      throw dicom_parse_error(dicom_error_kind::missing_magic, kMagicOffset,
                              "no DICM magic");
    }
  }

  void require(std::uint64_t start, std::uint64_t n, const char* what) const {
    if (start + n > src_.size()) throw_truncated(start, what);
  }

  element_header read_element(std::uint64_t pos, bool explicit_vr) const {
    element_header h;
    h.start = pos;
    require(pos, 8, "element header runs past end of input");
    std::array<std::uint8_t, 12> buf{};
    src_.read(pos, std::span(buf).first(8));
    h.tag = make_tag(le16(buf.data()), le16(buf.data() + 2));
    if (h.group() == 0xFFFE || !explicit_vr) {
      h.length = le32(buf.data() + 4);
      h.value_offset = pos + 8;
      return h;
    }
    h.has_vr = true;
    h.vr[0] = static_cast<char>(buf[4]);
    h.vr[1] = static_cast<char>(buf[5]);
    if (has_long_length(h.vr[0], h.vr[1])) {
      require(pos, 12, "element header runs past end of input");
      src_.read(pos + 8, std::span(buf).subspan(8, 4));
      h.length = le32(buf.data() + 8);
      h.value_offset = pos + 12;
    } else {
      h.length = le16(buf.data() + 6);
      h.value_offset = pos + 8;
    }
    return h;
  }

  std::vector<std::uint8_t> read_value(const element_header& h) const {
    std::vector<std::uint8_t> value(h.length);
    if (!value.empty()) src_.read(h.value_offset, value);
    return value;
  }

  std::uint64_t skip_defined(const element_header& h) const {
    if (h.value_offset + h.length > src_.size()) {
      throw_truncated(h.start, "element value runs past end of input");
    }
    return h.value_offset + h.length;
  }

  std::uint64_t read_file_meta(std::uint64_t pos, dicom_header& header) {
    std::optional<std::string> uid;
    std::uint64_t uid_offset = 0;
    while (pos + 2 <= src_.size()) {
      std::array<std::uint8_t, 2> group{};
      src_.read(pos, group);
      if (le16(group.data()) != 0x0002) break;
      const element_header h = read_element(pos, true);
      if (h.length == kUndefinedLength) {
        throw_truncated(h.start, "undefined length in file meta group");
      }
      const std::uint64_t next = skip_defined(h);
      if (h.tag == kTransferSyntaxTag) {
        const auto value = read_value(h);
        uid = strip_padding(std::string(value.begin(), value.end()));
        uid_offset = h.start;
      }
      pos = next;
    }
    if (!uid) {
      throw dicom_parse_error(dicom_error_kind::unsupported_transfer_syntax,
                              pos, "file meta declares no transfer syntax");
    }
    if (*uid == kExplicitVrLittleEndianUid) {
      header.syntax = transfer_syntax::explicit_vr_little_endian;
    } else if (*uid == kImplicitVrLittleEndianUid) {
      header.syntax = transfer_syntax::implicit_vr_little_endian;
    } else {
      throw dicom_parse_error(dicom_error_kind::unsupported_transfer_syntax,
                              uid_offset, "transfer syntax " + *uid);
    }
    return pos;
  }

  // `pos` points just past the header of an undefined-length element.
  // Returns the offset after its sequence delimiter.
  std::uint64_t skip_undefined_sequence(std::uint64_t pos, bool explicit_vr,
                                        int depth) const {
    if (depth > kMaxSequenceDepth) throw_truncated(pos, "sequences nested too deep");
    while (true) {
      const element_header item = read_element(pos, explicit_vr);
      if (item.tag == kSequenceDelimTag) return item.value_offset;
      if (item.tag != kItemTag) {
        throw_truncated(item.start, "malformed sequence: expected item tag");
      }
      if (item.length != kUndefinedLength) {
        pos = skip_defined(item);
        continue;
      }
      pos = item.value_offset;
      while (true) {
        const element_header h = read_element(pos, explicit_vr);
        if (h.tag == kItemDelimTag) {
          pos = h.value_offset;
          break;
        }
        if (h.length == kUndefinedLength) {
          pos = skip_undefined_sequence(h.value_offset,
                                        explicit_vr && !h.vr_is("UN"), depth + 1);
        } else {
          pos = skip_defined(h);
        }
      }
    }
  }

  static std::optional<int> positive_int(long long v) {
    if (v <= 0 || v > std::numeric_limits<int>::max()) return std::nullopt;
    return static_cast<int>(v);
  }

  static std::optional<int> decode_integer(const element_header& h,
                                           const std::vector<std::uint8_t>& v,
                                           bool numeric_string) {
    const bool binary16 =
        h.vr_is("US") || h.vr_is("SS") ||
        (!h.has_vr && !numeric_string && v.size() == 2);
    const bool binary32 =
        h.vr_is("UL") || h.vr_is("SL") ||
        (!h.has_vr && !numeric_string && v.size() == 4);
    if (binary16 && v.size() >= 2) {
      const auto raw = le16(v.data());
      return positive_int(h.vr_is("SS") ? static_cast<std::int16_t>(raw) : raw);
    }
    if (binary32 && v.size() >= 4) {
      const auto raw = le32(v.data());
      return positive_int(h.vr_is("SL") ? static_cast<std::int32_t>(raw)
                                        : static_cast<long long>(raw));
    }
    std::string text = strip_padding(std::string(v.begin(), v.end()));
    const auto first = text.find_first_not_of(' ');
    if (first == std::string::npos) return std::nullopt;
    text.erase(0, first);
    long long value = 0;
    for (char c : text) {
      if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
      value = value * 10 + (c - '0');
      if (value > std::numeric_limits<int>::max()) return std::nullopt;
    }
    return positive_int(value);
  }

  void capture(const element_header& h, dicom_header& header) const {
    auto as_string = [&] {
      const auto v = read_value(h);
      return strip_padding(std::string(v.begin(), v.end()));
    };
    switch (h.tag) {
      case kPatientSexTag:
        header.patient_sex_raw = as_string();
        break;
      case kPatientAgeTag:
        header.patient_age_raw = as_string();
        break;
      case kPhotometricTag:
        header.photometric = as_string();
        break;
      case kNumberOfFramesTag:
        header.number_of_frames = decode_integer(h, read_value(h), true);
        break;
      case kRowsTag:
        header.rows = decode_integer(h, read_value(h), false);
        break;
      case kColumnsTag:
        header.columns = decode_integer(h, read_value(h), false);
        break;
      case kBitsAllocatedTag:
        header.bits_allocated = decode_integer(h, read_value(h), false);
        break;
      default:
        break;
    }
  }

  void walk_dataset(std::uint64_t pos, dicom_header& header) const {
    const bool explicit_vr =
        header.syntax == transfer_syntax::explicit_vr_little_endian;
    while (pos < src_.size()) {
      const element_header h = read_element(pos, explicit_vr);
      if (h.tag == kPixelDataTag) return;
      if (h.length == kUndefinedLength) {
        pos = skip_undefined_sequence(h.value_offset,
                                      explicit_vr && !h.vr_is("UN"), 1);
        continue;
      }
      const std::uint64_t next = skip_defined(h);
      capture(h, header);
      pos = next;
    }
  }

  const byte_source& src_;
};

bool extension_matches(const std::filesystem::path& path,
                       const std::vector<std::string>& extensions) {
  auto lower = [](std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  };
  const std::string ext = lower(path.extension().string());
  return std::any_of(extensions.begin(), extensions.end(),
                     [&](const std::string& e) { return lower(e) == ext; });
}

}  // namespace

std::string_view transfer_syntax_uid(transfer_syntax syntax) {
  return syntax == transfer_syntax::explicit_vr_little_endian
             ? kExplicitVrLittleEndianUid
             : kImplicitVrLittleEndianUid;
}

std::string_view error_kind_name(dicom_error_kind kind) {
  switch (kind) {
    case dicom_error_kind::missing_magic: return "MissingMagic";
    case dicom_error_kind::truncated: return "Truncated";
    case dicom_error_kind::unsupported_transfer_syntax: return "UnsupportedTransferSyntax";
    case dicom_error_kind::io_error: return "IoError";
  }
  return "Unknown";
}

dicom_parse_error::dicom_parse_error(dicom_error_kind kind, std::uint64_t offset,
                                     const std::string& detail)
    : std::runtime_error(std::string(error_kind_name(kind)) + " at byte " +
                         std::to_string(offset) + ": " + detail),
      kind_(kind),
      offset_(offset) {}

dicom_header parse_dicom_header(std::span<const std::uint8_t> bytes,
                                std::string image_id) {
  const span_source src(bytes);
  return header_walker(src).run(std::move(image_id));
}

dicom_header parse_dicom_file(const std::filesystem::path& path) {
  const file_source src(path);
  return header_walker(src).run(path.stem().string());
}

std::string_view age_validity_name(age_validity v) {
  switch (v) {
    case age_validity::valid: return "valid";
    case age_validity::out_of_range: return "out_of_range";
    case age_validity::malformed: return "malformed";
    case age_validity::missing: return "missing";
  }
  return "missing";
}

age_parse parse_age(std::optional<std::string_view> raw) {
  if (!raw) return {std::nullopt, age_validity::missing};
  std::string_view s = *raw;
  while (!s.empty() && (s.back() == ' ' || s.back() == '\0')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  if (s.empty()) return {std::nullopt, age_validity::missing};

  int divisor = 1;
  std::string_view digits = s;
  switch (s.back()) {
    case 'D': divisor = 365; digits.remove_suffix(1); break;
    case 'W': divisor = 52; digits.remove_suffix(1); break;
    case 'M': divisor = 12; digits.remove_suffix(1); break;
    case 'Y': digits.remove_suffix(1); break;
    default: break;
  }
  if (digits.empty() || digits.size() > 9) return {std::nullopt, age_validity::malformed};
  long long value = 0;
  for (char c : digits) {
    if (c < '0' || c > '9') return {std::nullopt, age_validity::malformed};
    value = value * 10 + (c - '0');
  }
  const int years = static_cast<int>(value / divisor);
  const bool in_range = years >= kMinValidAge && years <= kMaxValidAge;
  return {years, in_range ? age_validity::valid : age_validity::out_of_range};
}

std::string_view sex_category_name(sex_category s) {
  switch (s) {
    case sex_category::male: return "Male";
    case sex_category::female: return "Female";
    case sex_category::other: return "Other";
    case sex_category::missing: return "Missing";
  }
  return "Missing";
}

sex_category normalize_sex(std::optional<std::string_view> raw) {
  if (!raw) return sex_category::missing;
  std::string_view s = *raw;
  while (!s.empty() && (s.back() == ' ' || s.back() == '\0')) s.remove_suffix(1);
  if (s == "M") return sex_category::male;
  if (s == "F") return sex_category::female;
  if (s == "O") return sex_category::other;
  return sex_category::missing;
}

std::vector<scan_entry> scan_corpus(const std::filesystem::path& root,
                                    const scan_options& options) {
  std::error_code ec;
  std::filesystem::directory_iterator it(root, ec);
  if (ec) {
    throw directory_unreadable("cannot read directory " + root.string() + ": " +
                               ec.message());
  }
  std::vector<std::filesystem::path> files;
  for (const auto end = std::filesystem::directory_iterator(); it != end;
       it.increment(ec)) {
    if (ec) {
      throw directory_unreadable("error listing " + root.string() + ": " +
                                 ec.message());
    }
    std::error_code type_ec;
    if (!it->is_regular_file(type_ec)) continue;
    if (extension_matches(it->path(), options.extensions)) files.push_back(it->path());
  }

  std::vector<scan_entry> entries(files.size());
  auto parse_one = [&](std::size_t i) {
    scan_entry& entry = entries[i];
    entry.path = files[i];
    entry.image_id = files[i].stem().string();
    try {
      entry.result = parse_dicom_file(files[i]);
    } catch (const dicom_parse_error& e) {
      entry.result = scan_failure{e.kind(), e.offset(), e.what()};
    } catch (const std::exception& e) {
      entry.result = scan_failure{dicom_error_kind::io_error, 0, e.what()};
    }
  };

  unsigned threads = options.threads ? options.threads
                                     : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, files.size()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < files.size(); ++i) parse_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < files.size(); i = next++) parse_one(i);
      });
    }
  }

  std::sort(entries.begin(), entries.end(), [](const scan_entry& a, const scan_entry& b) {
    if (a.image_id != b.image_id) return a.image_id < b.image_id;
    return a.path < b.path;
  });
  return entries;
}

header_map headers_by_id(const std::vector<scan_entry>& entries) {
  header_map out;
  for (const auto& entry : entries) {
    if (const auto* h = entry.header()) out.emplace(entry.image_id, *h);
  }
  return out;
}

}  // namespace cxr_audit
