#include "cxr_audit/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>

#include "cxr_audit/metadata_audit.hpp"
#include "cxr_audit/rng.hpp"

namespace cxr_audit::synth {
namespace {

using nlohmann::json;

constexpr std::string_view kBigEndianUid = "1.2.840.10008.1.2.2";
constexpr std::string_view kSopClassUid = "1.2.840.10008.5.1.4.1.1.1.1";
constexpr std::string_view kImplementationUid = "1.2.826.0.1.3680043.10.1099.1";

std::size_t planted_count(double rate, std::size_t n) {
  return static_cast<std::size_t>(std::floor(rate * static_cast<double>(n) + 1e-9));
}

// ---------------------------------------------------------------------------
// Part-10 writer

class dicom_writer {
 public:
  explicit dicom_writer(bool explicit_vr) : explicit_vr_(explicit_vr) {}

  void element(std::uint16_t group, std::uint16_t elem, const char* vr,
               std::vector<std::uint8_t> value) {
    if (value.size() % 2) value.push_back(pad_byte(vr));
    offsets_[(static_cast<std::uint32_t>(group) << 16) | elem] = out_.size();
    header(group, elem, vr, static_cast<std::uint32_t>(value.size()));
    out_.insert(out_.end(), value.begin(), value.end());
  }

  void text(std::uint16_t group, std::uint16_t elem, const char* vr, std::string_view s) {
    element(group, elem, vr, std::vector<std::uint8_t>(s.begin(), s.end()));
  }

  void us(std::uint16_t group, std::uint16_t elem, std::uint16_t v) {
    element(group, elem, "US",
            {static_cast<std::uint8_t>(v & 0xFF), static_cast<std::uint8_t>(v >> 8)});
  }

  // Undefined-length sequence holding one undefined-length item.
  void undefined_sequence(std::uint16_t group, std::uint16_t elem,
                          const dicom_writer& item_body) {
    header(group, elem, "SQ", 0xFFFFFFFFu);
    raw_tag(0xFFFE, 0xE000, 0xFFFFFFFFu);
    out_.insert(out_.end(), item_body.out_.begin(), item_body.out_.end());
    raw_tag(0xFFFE, 0xE00D, 0);
    raw_tag(0xFFFE, 0xE0DD, 0);
  }

  // Defined-length sequence holding one defined-length item.
  void defined_sequence(std::uint16_t group, std::uint16_t elem, const dicom_writer& item_body) {
    const auto body = static_cast<std::uint32_t>(item_body.out_.size());
    header(group, elem, "SQ", body + 8);
    raw_tag(0xFFFE, 0xE000, body);
    out_.insert(out_.end(), item_body.out_.begin(), item_body.out_.end());
  }

  std::vector<std::uint8_t>& bytes() { return out_; }
  std::size_t offset_of(std::uint16_t group, std::uint16_t elem) const {
    return offsets_.at((static_cast<std::uint32_t>(group) << 16) | elem);
  }

 private:
  static std::uint8_t pad_byte(const char* vr) {
    const std::string_view v(vr);
    return (v == "UI" || v == "OB" || v == "OW") ? 0 : ' ';
  }

  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
  }
  void raw_tag(std::uint16_t group, std::uint16_t elem, std::uint32_t len) {
    u16(group);
    u16(elem);
    u32(len);
  }

  void header(std::uint16_t group, std::uint16_t elem, const char* vr, std::uint32_t len) {
    if (!explicit_vr_) {
      raw_tag(group, elem, len);
      return;
    }
    u16(group);
    u16(elem);
    out_.push_back(static_cast<std::uint8_t>(vr[0]));
    out_.push_back(static_cast<std::uint8_t>(vr[1]));
    const std::string_view v(vr);
    if (v == "OB" || v == "OW" || v == "SQ" || v == "UN" || v == "UT") {
      u16(0);
      u32(len);
    } else {
      u16(static_cast<std::uint16_t>(len));
    }
  }

  bool explicit_vr_;
  std::vector<std::uint8_t> out_;
  std::map<std::uint32_t, std::size_t> offsets_;
};

// ---------------------------------------------------------------------------
// Plan

enum class age_kind { absent, empty, malformed, out_of_range, child, adult };
enum class twist { none, dissent, cross_label, coarse_box };
enum class parity_role { none, positive, false_positive };

std::string_view twist_name(twist t) {
  switch (t) {
    case twist::none: return "none";
    case twist::dissent: return "dissent";
    case twist::cross_label: return "cross_label";
    case twist::coarse_box: return "coarse_box";
  }
  return "none";
}

struct planned_lesion {
  class_label label;
  std::vector<bbox> boxes;
};

struct mark {
  class_label label;
  std::optional<bbox> box;
};

struct planned_image {
  std::string id;
  int rows = 0;
  int cols = 0;
  bool explicit_vr = true;
  age_kind age = age_kind::absent;
  std::optional<std::string> age_raw;
  std::optional<int> years;
  sex_category sex = sex_category::missing;
  std::optional<std::string> sex_raw;
  std::optional<std::string> photometric;
  bool finding = false;
  std::vector<planned_lesion> lesions;
  std::vector<std::string> annotators;  // sorted
  twist deviation = twist::none;
  parity_role parity = parity_role::none;
  std::map<std::string, std::vector<mark>> marks;
  std::optional<corruption_kind> corrupt;
};

// Shuffled index list cut into consecutive category blocks; the last
// category gets whatever the counts leave.
std::vector<std::size_t> assign_categories(det_rng& rng, std::size_t n,
                                           const std::vector<std::size_t>& counts) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<std::size_t> category(n, counts.size());
  std::size_t pos = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    for (std::size_t k = 0; k < counts[c]; ++k) category[order[pos++]] = c;
  }
  return category;
}

std::string zero_pad(int v, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%0*d", width, v);
  return buf;
}

template <typename T>
const T& pick(det_rng& rng, const std::vector<T>& items) {
  return items[static_cast<std::size_t>(rng.below(items.size()))];
}

std::vector<bbox> place_boxes(det_rng& rng, placement p, int band, int rows, int cols) {
  if (p == placement::uniform) {
    const int w = cols / 8;
    const int h = rows / 8;
    const auto x0 = static_cast<double>(rng.between(0, cols - w));
    const auto y0 = static_cast<double>(rng.between(0, rows - h));
    return {bbox{x0, y0, x0 + w, y0 + h}};
  }
  const auto r = static_cast<long long>(rows);
  const auto c = static_cast<long long>(cols);
  const long long band_lo = band == 0 ? r * 8 / 100 : r * 54 / 100;
  const long long band_hi = band == 0 ? r * 46 / 100 : r * 92 / 100;
  const long long h = rng.between(r * 8 / 100, r * 30 / 100);
  const long long y0 = rng.between(band_lo, band_hi - h);
  const long long w = rng.between(c * 8 / 100, c * 30 / 100);
  const long long x0 = rng.between(c * 5 / 100, c * 45 / 100 - w);
  const bbox left{static_cast<double>(x0), static_cast<double>(y0), static_cast<double>(x0 + w),
                  static_cast<double>(y0 + h)};
  const bbox right = mirrored(left, cols);
  switch (p) {
    case placement::symmetric: return {left, right};
    case placement::left_only: return {left};
    case placement::right_only: return {right};
    case placement::uniform: break;
  }
  return {left};
}

bbox union_box(const std::vector<bbox>& boxes) {
  bbox u = boxes.front();
  for (const auto& b : boxes) {
    u.x_min = std::min(u.x_min, b.x_min);
    u.y_min = std::min(u.y_min, b.y_min);
    u.x_max = std::max(u.x_max, b.x_max);
    u.y_max = std::max(u.y_max, b.y_max);
  }
  return u;
}

dicom_header planned_header(const planned_image& img) {
  dicom_header h;
  h.image_id = img.id;
  h.patient_age_raw = img.age_raw;
  h.patient_sex_raw = img.sex_raw;
  return h;
}

struct written_dicom {
  std::vector<std::uint8_t> bytes;
  std::size_t syntax_offset = 0;
  std::size_t last_header_element_offset = 0;
};

written_dicom write_dicom(const planned_image& img, std::size_t index, bool bad_syntax) {
  const std::string instance_uid = "1.2.826.0.1.3680043.10.1099.2." + std::to_string(index + 1);

  dicom_writer meta(true);
  meta.element(0x0002, 0x0001, "OB", {0x00, 0x01});
  meta.text(0x0002, 0x0002, "UI", kSopClassUid);
  meta.text(0x0002, 0x0003, "UI", instance_uid);
  const std::string_view syntax_uid =
      bad_syntax ? kBigEndianUid
                 : transfer_syntax_uid(img.explicit_vr ? transfer_syntax::explicit_vr_little_endian
                                                       : transfer_syntax::implicit_vr_little_endian);
  meta.text(0x0002, 0x0010, "UI", syntax_uid);
  meta.text(0x0002, 0x0012, "UI", kImplementationUid);

  written_dicom out;
  auto& bytes = out.bytes;
  bytes.assign(128, 0);
  bytes.insert(bytes.end(), {'D', 'I', 'C', 'M'});
  {
    dicom_writer group_length(true);
    const auto len = static_cast<std::uint32_t>(meta.bytes().size());
    group_length.element(0x0002, 0x0000, "UL",
                         {static_cast<std::uint8_t>(len & 0xFF),
                          static_cast<std::uint8_t>((len >> 8) & 0xFF),
                          static_cast<std::uint8_t>((len >> 16) & 0xFF),
                          static_cast<std::uint8_t>((len >> 24) & 0xFF)});
    bytes.insert(bytes.end(), group_length.bytes().begin(), group_length.bytes().end());
  }
  const std::size_t meta_start = bytes.size();
  out.syntax_offset = meta_start + meta.offset_of(0x0002, 0x0010);
  bytes.insert(bytes.end(), meta.bytes().begin(), meta.bytes().end());

  dicom_writer ds(img.explicit_vr);
  ds.text(0x0008, 0x0016, "UI", kSopClassUid);
  ds.text(0x0008, 0x0018, "UI", instance_uid);
  ds.text(0x0008, 0x0060, "CS", "DX");
  if (index % 3 != 2) {
    dicom_writer item(img.explicit_vr);
    item.text(0x0008, 0x1150, "UI", kSopClassUid);
    item.text(0x0008, 0x1155, "UI", instance_uid + ".0");
    if (index % 3 == 0) {
      ds.undefined_sequence(0x0008, 0x1140, item);
    } else {
      ds.defined_sequence(0x0008, 0x1140, item);
    }
  }
  ds.text(0x0009, 0x0010, "LO", "SYNTHGEN");
  ds.element(0x0009, 0x1001, "OB", {0xDE, 0xAD, 0xBE, 0xEF, 0x00, 0x01});
  ds.text(0x0010, 0x0010, "PN", "ANON^" + img.id);
  ds.text(0x0010, 0x0020, "LO", img.id);
  if (img.sex_raw) ds.text(0x0010, 0x0040, "CS", *img.sex_raw);
  if (img.age_raw) ds.text(0x0010, 0x1010, "AS", *img.age_raw);
  ds.us(0x0028, 0x0002, 1);
  if (img.photometric) ds.text(0x0028, 0x0004, "CS", *img.photometric);
  ds.us(0x0028, 0x0010, static_cast<std::uint16_t>(img.rows));
  ds.us(0x0028, 0x0011, static_cast<std::uint16_t>(img.cols));
  ds.us(0x0028, 0x0100, 16);
  ds.us(0x0028, 0x0101, 12);
  std::vector<std::uint8_t> pixels(kPlaceholderPixelBytes);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    pixels[i] = static_cast<std::uint8_t>((index * 31 + i * 7) & 0xFF);
  }
  ds.element(0x7FE0, 0x0010, "OW", pixels);

  const std::size_t ds_start = bytes.size();
  out.last_header_element_offset = ds_start + ds.offset_of(0x0028, 0x0101);
  bytes.insert(bytes.end(), ds.bytes().begin(), ds.bytes().end());
  return out;
}

json box_json(const bbox& b) { return json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

}  // namespace

// ---------------------------------------------------------------------------
// Spec

std::string_view placement_name(placement p) {
  switch (p) {
    case placement::symmetric: return "symmetric";
    case placement::left_only: return "left-only";
    case placement::right_only: return "right-only";
    case placement::uniform: return "uniform";
  }
  return "symmetric";
}

std::string_view corruption_name(corruption_kind k) {
  switch (k) {
    case corruption_kind::truncate: return "truncate";
    case corruption_kind::bad_magic: return "bad_magic";
    case corruption_kind::bad_syntax: return "bad_syntax";
  }
  return "truncate";
}

placement corpus_spec::placement_of(class_label label) const {
  const auto it = placements.find(label);
  return it == placements.end() ? placement::symmetric : it->second;
}

namespace {

void check_rate(double v, const char* name) {
  if (!(v >= 0 && v <= 1)) {
    throw std::invalid_argument(std::string(name) + " must lie in [0,1]");
  }
}

std::vector<class_label> effective_classes(const corpus_spec& spec) {
  if (!spec.lesion_classes.empty()) return spec.lesion_classes;
  return {lesion_labels().begin(), lesion_labels().end()};
}

}  // namespace

void corpus_spec::validate() const {
  for (auto [v, name] : {std::pair{age_missing_rate, "age_missing_rate"},
                         {age_malformed_rate, "age_malformed_rate"},
                         {age_out_of_range_rate, "age_out_of_range_rate"},
                         {child_rate, "child_rate"},
                         {sex_missing_rate, "sex_missing_rate"},
                         {sex_other_rate, "sex_other_rate"},
                         {sex_male_rate, "sex_male_rate"},
                         {explicit_vr_rate, "explicit_vr_rate"},
                         {finding_rate, "finding_rate"},
                         {second_lesion_rate, "second_lesion_rate"},
                         {dissent_rate, "dissent_rate"},
                         {cross_label_rate, "cross_label_rate"},
                         {coarse_box_rate, "coarse_box_rate"}}) {
    check_rate(v, name);
  }
  if (age_missing_rate + age_malformed_rate + age_out_of_range_rate + child_rate > 1 + 1e-9)
    throw std::invalid_argument("age rates sum above 1");
  if (sex_missing_rate + sex_other_rate + sex_male_rate > 1 + 1e-9)
    throw std::invalid_argument("sex rates sum above 1");
  if (dissent_rate + cross_label_rate + coarse_box_rate > 1 + 1e-9)
    throw std::invalid_argument("deviation rates sum above 1");
  if (photometric_mix.empty()) throw std::invalid_argument("photometric_mix is empty");
  double mix = 0;
  for (const auto& [k, v] : photometric_mix) {
    check_rate(v, "photometric_mix share");
    mix += v;
  }
  if (std::abs(mix - 1) > 1e-9) throw std::invalid_argument("photometric_mix must sum to 1");
  if (image_sizes.empty()) throw std::invalid_argument("image_sizes is empty");
  for (const auto& [r, c] : image_sizes) {
    if (r < 64 || c < 64 || r > 65535 || c > 65535)
      throw std::invalid_argument("image sizes must lie in 64..65535");
  }
  if (n_annotators < 1) throw std::invalid_argument("n_annotators must be >= 1");
  if (annotators_per_image < 1 || annotators_per_image > n_annotators)
    throw std::invalid_argument("annotators_per_image must lie in 1..n_annotators");
  if (annotators_per_image < 2 && (dissent_rate > 0 || cross_label_rate > 0 || coarse_box_rate > 0))
    throw std::invalid_argument("annotator deviations need at least two annotators per image");
  if (age_sd <= 0) throw std::invalid_argument("age_sd must be positive");
  for (class_label c : lesion_classes) {
    if (!is_lesion(c)) throw std::invalid_argument("lesion_classes may not contain 'No finding'");
  }
  if (parity) {
    if (!is_lesion(parity->label)) throw std::invalid_argument("parity class must be a lesion");
    if (taxonomy::default_taxonomy().overlap_partner(parity->label))
      throw std::invalid_argument("parity class may not belong to an overlap pair");
    const auto names = subgroup_names(parity->feature);
    for (const auto& [s, t] : parity->targets) {
      if (std::find(names.begin(), names.end(), s) == names.end())
        throw std::invalid_argument("unknown parity subgroup '" + s + "'");
      check_rate(t.ppv, "parity ppv");
    }
    check_rate(parity->score, "parity score");
  }
  for (const auto& c : corruptions) {
    if (c.image_index >= n_images) throw std::invalid_argument("corruption image_index out of range");
  }
}

corpus_spec corpus_spec::clean() {
  corpus_spec s;
  s.seed = 11;
  s.n_images = 400;
  s.finding_mean_age = 50;
  s.no_finding_mean_age = 50;
  s.age_sd = 15;
  s.sex_male_rate = 0.5;
  s.finding_rate = 0.3;
  return s;
}

corpus_spec corpus_spec::flawed_metadata() {
  corpus_spec s;
  s.seed = 2021;
  s.n_images = 1000;
  s.age_missing_rate = 0.60;
  s.age_malformed_rate = 0.08;
  s.age_out_of_range_rate = 0.07;
  s.child_rate = 0.02;
  s.finding_mean_age = 60;
  s.no_finding_mean_age = 35;
  s.sex_missing_rate = 0.17;
  s.sex_other_rate = 0.34;
  s.sex_male_rate = 0.26;
  s.photometric_mix = {{"MONOCHROME1", 0.17}, {"MONOCHROME2", 0.83}};
  s.finding_rate = 0.3;
  s.dissent_rate = 0.2;
  s.cross_label_rate = 0.3;
  s.coarse_box_rate = 0.1;
  s.placements[class_label::pneumothorax] = placement::left_only;
  return s;
}

corpus_spec corpus_spec::parity_gap() {
  corpus_spec s;
  s.seed = 313;
  s.n_images = 1000;
  s.finding_rate = 0.5;
  s.finding_mean_age = 60;
  s.no_finding_mean_age = 35;
  s.age_sd = 12;
  parity_plant p;
  p.label = class_label::aortic_enlargement;
  p.feature = subgroup_feature::age;
  p.targets["young"] = {0.13, 100};
  p.targets["old"] = {0.74, 100};
  s.parity = p;
  return s;
}

std::optional<corpus_spec> preset(std::string_view name) {
  if (name == "clean") return corpus_spec::clean();
  if (name == "flawed") return corpus_spec::flawed_metadata();
  if (name == "parity") return corpus_spec::parity_gap();
  return std::nullopt;
}

json to_json(const corpus_spec& s) {
  json j;
  j["seed"] = s.seed;
  j["n_images"] = s.n_images;
  j["age_missing_rate"] = s.age_missing_rate;
  j["age_malformed_rate"] = s.age_malformed_rate;
  j["age_out_of_range_rate"] = s.age_out_of_range_rate;
  j["child_rate"] = s.child_rate;
  j["finding_mean_age"] = s.finding_mean_age;
  j["no_finding_mean_age"] = s.no_finding_mean_age;
  j["age_sd"] = s.age_sd;
  j["sex_missing_rate"] = s.sex_missing_rate;
  j["sex_other_rate"] = s.sex_other_rate;
  j["sex_male_rate"] = s.sex_male_rate;
  j["photometric_mix"] = s.photometric_mix;
  j["explicit_vr_rate"] = s.explicit_vr_rate;
  j["image_sizes"] = json::array();
  for (const auto& [r, c] : s.image_sizes) j["image_sizes"].push_back({r, c});
  j["n_annotators"] = s.n_annotators;
  j["annotators_per_image"] = s.annotators_per_image;
  j["finding_rate"] = s.finding_rate;
  j["second_lesion_rate"] = s.second_lesion_rate;
  j["dissent_rate"] = s.dissent_rate;
  j["cross_label_rate"] = s.cross_label_rate;
  j["coarse_box_rate"] = s.coarse_box_rate;
  j["lesion_classes"] = json::array();
  for (auto c : s.lesion_classes) j["lesion_classes"].push_back(label_name(c));
  j["placements"] = json::object();
  for (const auto& [c, p] : s.placements) j["placements"][std::string(label_name(c))] = placement_name(p);
  j["predictions"] = s.predictions == prediction_mode::perfect ? "perfect" : "none";
  if (s.parity) {
    json p;
    p["class"] = label_name(s.parity->label);
    p["feature"] = feature_name(s.parity->feature);
    p["score"] = s.parity->score;
    p["targets"] = json::object();
    for (const auto& [g, t] : s.parity->targets) {
      p["targets"][g] = {{"ppv", t.ppv}, {"predicted_positive", t.predicted_positive}};
    }
    j["parity"] = p;
  } else {
    j["parity"] = nullptr;
  }
  j["corruptions"] = json::array();
  for (const auto& c : s.corruptions) {
    j["corruptions"].push_back({{"image_index", c.image_index}, {"kind", corruption_name(c.kind)}});
  }
  return j;
}

namespace {

class_label label_or_throw(const json& v) {
  const auto label = label_from_name(v.get<std::string>());
  if (!label) throw std::invalid_argument("unknown class '" + v.get<std::string>() + "'");
  return *label;
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> known,
                    const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    if (std::find(known.begin(), known.end(), k) == known.end()) {
      throw std::invalid_argument("unknown key '" + k + "' in " + where);
    }
  }
}

}  // namespace

corpus_spec spec_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("corpus spec must be a JSON object");
  reject_unknown(j,
                 {"preset", "seed", "n_images", "age_missing_rate", "age_malformed_rate",
                  "age_out_of_range_rate", "child_rate", "finding_mean_age",
                  "no_finding_mean_age", "age_sd", "sex_missing_rate", "sex_other_rate",
                  "sex_male_rate", "photometric_mix", "explicit_vr_rate", "image_sizes",
                  "n_annotators", "annotators_per_image", "finding_rate", "second_lesion_rate",
                  "dissent_rate", "cross_label_rate", "coarse_box_rate", "lesion_classes",
                  "placements", "predictions", "parity", "corruptions"},
                 "corpus spec");
  corpus_spec s;
  if (j.contains("preset")) {
    const auto p = preset(j["preset"].get<std::string>());
    if (!p) throw std::invalid_argument("unknown preset '" + j["preset"].get<std::string>() + "'");
    s = *p;
  }
  try {
    auto num = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j[key].get<std::remove_reference_t<decltype(field)>>();
    };
    num("seed", s.seed);
    num("n_images", s.n_images);
    num("age_missing_rate", s.age_missing_rate);
    num("age_malformed_rate", s.age_malformed_rate);
    num("age_out_of_range_rate", s.age_out_of_range_rate);
    num("child_rate", s.child_rate);
    num("finding_mean_age", s.finding_mean_age);
    num("no_finding_mean_age", s.no_finding_mean_age);
    num("age_sd", s.age_sd);
    num("sex_missing_rate", s.sex_missing_rate);
    num("sex_other_rate", s.sex_other_rate);
    num("sex_male_rate", s.sex_male_rate);
    num("explicit_vr_rate", s.explicit_vr_rate);
    num("n_annotators", s.n_annotators);
    num("annotators_per_image", s.annotators_per_image);
    num("finding_rate", s.finding_rate);
    num("second_lesion_rate", s.second_lesion_rate);
    num("dissent_rate", s.dissent_rate);
    num("cross_label_rate", s.cross_label_rate);
    num("coarse_box_rate", s.coarse_box_rate);
    if (j.contains("photometric_mix")) {
      s.photometric_mix = j["photometric_mix"].get<std::map<std::string, double>>();
    }
    if (j.contains("image_sizes")) {
      s.image_sizes.clear();
      for (const auto& rc : j["image_sizes"]) s.image_sizes.emplace_back(rc.at(0).get<int>(), rc.at(1).get<int>());
    }
    if (j.contains("lesion_classes")) {
      s.lesion_classes.clear();
      for (const auto& c : j["lesion_classes"]) s.lesion_classes.push_back(label_or_throw(c));
    }
    if (j.contains("placements")) {
      s.placements.clear();
      for (const auto& [name, p] : j["placements"].items()) {
        const auto label = label_from_name(name);
        if (!label) throw std::invalid_argument("unknown class '" + name + "'");
        const auto ps = p.get<std::string>();
        placement value;
        if (ps == "symmetric") value = placement::symmetric;
        else if (ps == "left-only") value = placement::left_only;
        else if (ps == "right-only") value = placement::right_only;
        else if (ps == "uniform") value = placement::uniform;
        else throw std::invalid_argument("unknown placement '" + ps + "'");
        s.placements[*label] = value;
      }
    }
    if (j.contains("predictions")) {
      const auto m = j["predictions"].get<std::string>();
      if (m == "perfect") s.predictions = prediction_mode::perfect;
      else if (m == "none") s.predictions = prediction_mode::none;
      else throw std::invalid_argument("predictions must be 'perfect' or 'none'");
    }
    if (j.contains("parity")) {
      if (j["parity"].is_null()) {
        s.parity.reset();
      } else {
        const auto& pj = j["parity"];
        reject_unknown(pj, {"class", "feature", "score", "targets"}, "parity");
        parity_plant p;
        p.label = label_or_throw(pj.at("class"));
        const auto f = pj.value("feature", std::string("age"));
        if (f == "age") p.feature = subgroup_feature::age;
        else if (f == "sex") p.feature = subgroup_feature::sex;
        else throw std::invalid_argument("parity feature must be 'age' or 'sex'");
        p.score = pj.value("score", 0.9);
        for (const auto& [g, t] : pj.at("targets").items()) {
          reject_unknown(t, {"ppv", "predicted_positive"}, "parity target");
          p.targets[g] = {t.at("ppv").get<double>(), t.value("predicted_positive", std::size_t{100})};
        }
        s.parity = p;
      }
    }
    if (j.contains("corruptions")) {
      s.corruptions.clear();
      for (const auto& cj : j["corruptions"]) {
        reject_unknown(cj, {"image_index", "kind"}, "corruption");
        corruption c;
        c.image_index = cj.at("image_index").get<std::size_t>();
        const auto k = cj.at("kind").get<std::string>();
        if (k == "truncate") c.kind = corruption_kind::truncate;
        else if (k == "bad_magic") c.kind = corruption_kind::bad_magic;
        else if (k == "bad_syntax") c.kind = corruption_kind::bad_syntax;
        else throw std::invalid_argument("unknown corruption kind '" + k + "'");
        s.corruptions.push_back(c);
      }
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("corpus spec: ") + e.what());
  }
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// Generation

synthetic_corpus build_corpus(const corpus_spec& spec) {
  spec.validate();
  det_rng rng(spec.seed);
  const std::size_t n = spec.n_images;
  const int id_width = std::max<int>(5, static_cast<int>(std::to_string(n).size()));

  std::vector<planned_image> images(n);
  for (std::size_t i = 0; i < n; ++i) {
    images[i].id = "img_" + zero_pad(static_cast<int>(i), id_width);
    const auto& [r, c] = pick(rng, spec.image_sizes);
    images[i].rows = r;
    images[i].cols = c;
  }

  // Transfer syntax.
  {
    const auto cat = assign_categories(rng, n, {planted_count(spec.explicit_vr_rate, n)});
    for (std::size_t i = 0; i < n; ++i) images[i].explicit_vr = cat[i] == 0;
  }

  // Photometric interpretation; last key in map order takes the remainder.
  {
    std::vector<std::string> keys;
    std::vector<std::size_t> counts;
    for (const auto& [k, v] : spec.photometric_mix) {
      keys.push_back(k);
      counts.push_back(planted_count(v, n));
    }
    counts.pop_back();
    const auto cat = assign_categories(rng, n, counts);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& key = keys[cat[i]];
      if (key != "missing") images[i].photometric = key;
    }
  }

  // Sex: missing, other, male, female (remainder).
  {
    const auto cat = assign_categories(rng, n, {planted_count(spec.sex_missing_rate, n),
                                                planted_count(spec.sex_other_rate, n),
                                                planted_count(spec.sex_male_rate, n)});
    std::size_t missing_seen = 0;
    for (std::size_t i = 0; i < n; ++i) {
      switch (cat[i]) {
        case 0:
          images[i].sex = sex_category::missing;
          // Every third missing value is an empty tag rather than no tag.
          if (missing_seen++ % 3 == 2) images[i].sex_raw = "";
          break;
        case 1: images[i].sex = sex_category::other; images[i].sex_raw = "O"; break;
        case 2: images[i].sex = sex_category::male; images[i].sex_raw = "M"; break;
        default: images[i].sex = sex_category::female; images[i].sex_raw = "F"; break;
      }
    }
  }

  // Finding status, independent of the attributes above.
  {
    const auto cat = assign_categories(rng, n, {planted_count(spec.finding_rate, n)});
    for (std::size_t i = 0; i < n; ++i) images[i].finding = cat[i] == 0;
  }

  // Age: missing, malformed, out of range, child, adult (remainder).
  {
    static const std::vector<std::string> kMalformed = {"XXXY", "4A5Y", "AGE", "45 Y", "-45Y", "??"};
    static const std::vector<std::pair<std::string, int>> kOutOfRange = {
        {"000Y", 0}, {"238", 238}, {"120Y", 120}, {"000D", 0}, {"105Y", 105}, {"100Y", 100}};
    const auto cat = assign_categories(rng, n, {planted_count(spec.age_missing_rate, n),
                                                planted_count(spec.age_malformed_rate, n),
                                                planted_count(spec.age_out_of_range_rate, n),
                                                planted_count(spec.child_rate, n)});
    std::size_t missing_seen = 0;
    for (std::size_t i = 0; i < n; ++i) {
      auto& img = images[i];
      switch (cat[i]) {
        case 0:
          if (missing_seen++ % 4 == 3) {
            img.age = age_kind::empty;
            img.age_raw = "";
          } else {
            img.age = age_kind::absent;
          }
          break;
        case 1:
          img.age = age_kind::malformed;
          img.age_raw = pick(rng, kMalformed);
          break;
        case 2: {
          img.age = age_kind::out_of_range;
          const auto& [raw, years] = pick(rng, kOutOfRange);
          img.age_raw = raw;
          img.years = years;
          break;
        }
        case 3:
          img.age = age_kind::child;
          img.years = static_cast<int>(rng.between(1, kChildMaxAge));
          img.age_raw = zero_pad(*img.years, 3) + "Y";
          break;
        default: {
          img.age = age_kind::adult;
          const double mean = img.finding ? spec.finding_mean_age : spec.no_finding_mean_age;
          const double draw = std::round(rng.normal(mean, spec.age_sd));
          img.years = static_cast<int>(std::clamp(draw, 18.0, 99.0));
          const auto style = rng.below(10);
          if (style == 0 && *img.years <= 83) {
            img.age_raw = zero_pad(*img.years * 12, 3) + "M";
          } else if (style == 1) {
            img.age_raw = std::to_string(*img.years);
          } else {
            img.age_raw = zero_pad(*img.years, 3) + "Y";
          }
          break;
        }
      }
    }
  }

  // Parity plant: exact positive and false-positive sets per subgroup.
  const class_label parity_class = spec.parity ? spec.parity->label : class_label::no_finding;
  json parity_manifest = nullptr;
  if (spec.parity) {
    const auto& plant = *spec.parity;
    parity_manifest = {{"class", label_name(plant.label)},
                       {"feature", feature_name(plant.feature)},
                       {"subgroups", json::object()}};
    std::vector<std::string> subgroup(n);
    for (std::size_t i = 0; i < n; ++i) {
      const dicom_header h = planned_header(images[i]);
      subgroup[i] = subgroup_assign(&h, plant.feature);
    }
    for (const auto& [name, target] : plant.targets) {
      const auto tp = static_cast<std::size_t>(
          std::llround(target.ppv * static_cast<double>(target.predicted_positive)));
      const std::size_t fp = target.predicted_positive - tp;
      std::vector<std::size_t> positives, negatives;
      for (std::size_t i = 0; i < n; ++i) {
        if (subgroup[i] != name || images[i].parity != parity_role::none) continue;
        (images[i].finding ? positives : negatives).push_back(i);
      }
      rng.shuffle(positives);
      if (positives.size() < tp) {
        throw std::invalid_argument("parity plant: subgroup '" + name + "' has " +
                                    std::to_string(positives.size()) +
                                    " finding images, needs " + std::to_string(tp));
      }
      for (std::size_t k = 0; k < tp; ++k) images[positives[k]].parity = parity_role::positive;
      // Unused finding images are eligible false positives too.
      negatives.insert(negatives.end(), positives.begin() + static_cast<std::ptrdiff_t>(tp),
                       positives.end());
      std::sort(negatives.begin(), negatives.end());
      rng.shuffle(negatives);
      if (negatives.size() < fp) {
        throw std::invalid_argument("parity plant: subgroup '" + name + "' has too few images for " +
                                    std::to_string(fp) + " false positives");
      }
      for (std::size_t k = 0; k < fp; ++k) images[negatives[k]].parity = parity_role::false_positive;
      parity_manifest["subgroups"][name] = {{"tp", tp}, {"fp", fp},
                                            {"predicted_positive", target.predicted_positive}};
    }
  }

  // Annotator deviations over finding images.
  const taxonomy tax = taxonomy::default_taxonomy();
  {
    std::vector<std::size_t> finding_images;
    for (std::size_t i = 0; i < n; ++i)
      if (images[i].finding) finding_images.push_back(i);
    const std::size_t nf = finding_images.size();
    const std::size_t n_cross = planted_count(spec.cross_label_rate, nf);
    const std::size_t n_coarse = planted_count(spec.coarse_box_rate, nf);
    const std::size_t n_dissent = planted_count(spec.dissent_rate, nf);
    rng.shuffle(finding_images);
    // Structural deviations go to images whose first lesion is free to choose.
    std::vector<std::size_t> free, pinned;
    for (std::size_t i : finding_images) {
      (images[i].parity == parity_role::positive ? pinned : free).push_back(i);
    }
    if (free.size() < n_cross + n_coarse) {
      throw std::invalid_argument("not enough finding images for cross-label and coarse-box deviations");
    }
    std::size_t pos = 0;
    for (std::size_t k = 0; k < n_cross; ++k) images[free[pos++]].deviation = twist::cross_label;
    for (std::size_t k = 0; k < n_coarse; ++k) images[free[pos++]].deviation = twist::coarse_box;
    std::vector<std::size_t> rest(free.begin() + static_cast<std::ptrdiff_t>(pos), free.end());
    rest.insert(rest.end(), pinned.begin(), pinned.end());
    if (rest.size() < n_dissent) throw std::invalid_argument("not enough finding images for dissent");
    for (std::size_t k = 0; k < n_dissent; ++k) images[rest[k]].deviation = twist::dissent;
  }

  // Lesions.
  const auto classes = effective_classes(spec);
  std::vector<class_label> base, cross_candidates, coarse_candidates, second_candidates;
  for (class_label c : classes) {
    if (spec.parity && c == spec.parity->label) continue;
    base.push_back(c);
    if (spec.placement_of(c) != placement::uniform) second_candidates.push_back(c);
    const auto partner = tax.overlap_partner(c);
    if (partner && spec.placement_of(*partner) == spec.placement_of(c)) cross_candidates.push_back(c);
    if (spec.placement_of(c) == placement::symmetric) coarse_candidates.push_back(c);
  }
  for (auto& img : images) {
    if (!img.finding) continue;
    class_label first;
    switch (img.deviation) {
      case twist::cross_label:
        if (cross_candidates.empty()) throw std::invalid_argument("no class eligible for cross-label deviation");
        first = pick(rng, cross_candidates);
        break;
      case twist::coarse_box:
        if (coarse_candidates.empty()) throw std::invalid_argument("no symmetric class for coarse-box deviation");
        first = pick(rng, coarse_candidates);
        break;
      default:
        if (img.parity == parity_role::positive) {
          first = parity_class;
        } else {
          if (base.empty()) throw std::invalid_argument("no lesion classes to plant");
          first = pick(rng, base);
        }
        break;
    }
    img.lesions.push_back({first, place_boxes(rng, spec.placement_of(first), 0, img.rows, img.cols)});
    const bool allow_second = spec.placement_of(first) != placement::uniform;
    if (allow_second && rng.uniform01() < spec.second_lesion_rate) {
      std::vector<class_label> options;
      for (class_label c : second_candidates)
        if (c != first) options.push_back(c);
      if (!options.empty()) {
        const class_label second = pick(rng, options);
        img.lesions.push_back({second, place_boxes(rng, spec.placement_of(second), 1, img.rows, img.cols)});
      }
    }
  }

  // Annotators and their marks.
  std::vector<std::string> rads;
  for (std::size_t r = 1; r <= spec.n_annotators; ++r) rads.push_back("R" + std::to_string(r));
  for (auto& img : images) {
    std::vector<std::string> pool = rads;
    for (std::size_t k = 0; k < spec.annotators_per_image; ++k) {
      const auto j = k + static_cast<std::size_t>(rng.below(pool.size() - k));
      std::swap(pool[k], pool[j]);
    }
    img.annotators.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(spec.annotators_per_image));
    std::sort(img.annotators.begin(), img.annotators.end());
    for (const auto& rad : img.annotators) {
      auto& m = img.marks[rad];
      const bool deviates = rad == img.annotators.back() && img.deviation != twist::none;
      if (!img.finding || (deviates && img.deviation == twist::dissent)) {
        m.push_back({class_label::no_finding, std::nullopt});
        continue;
      }
      for (std::size_t l = 0; l < img.lesions.size(); ++l) {
        const auto& lesion = img.lesions[l];
        if (deviates && l == 0 && img.deviation == twist::cross_label) {
          const class_label partner = *tax.overlap_partner(lesion.label);
          for (const auto& b : lesion.boxes) m.push_back({partner, b});
        } else if (deviates && l == 0 && img.deviation == twist::coarse_box) {
          m.push_back({lesion.label, union_box(lesion.boxes)});
        } else {
          for (const auto& b : lesion.boxes) m.push_back({lesion.label, b});
        }
      }
    }
  }

  for (const auto& c : spec.corruptions) images[c.image_index].corrupt = c.kind;

  // Emit tables.
  synthetic_corpus corpus;
  for (const auto& img : images) {
    for (const auto& [rad, marks] : img.marks) {
      for (const auto& m : marks) corpus.annotations.push_back({img.id, rad, m.label, m.box});
    }
  }
  for (const auto& img : images) {
    if (spec.predictions == prediction_mode::perfect) {
      for (const auto& [rad, marks] : img.marks) {
        for (const auto& m : marks) {
          if (m.box) corpus.predictions.push_back({img.id, m.label, 1.0, *m.box});
        }
      }
    } else if (img.parity == parity_role::positive) {
      for (const auto& b : img.lesions.front().boxes) {
        corpus.predictions.push_back({img.id, parity_class, spec.parity->score, b});
      }
    }
    if (img.parity == parity_role::false_positive) {
      const bbox centre{img.cols * 0.4, img.rows * 0.4, img.cols * 0.6, img.rows * 0.6};
      corpus.predictions.push_back({img.id, parity_class, spec.parity->score, centre});
    }
  }

  // DICOM files and expected parse errors.
  json errors = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& img = images[i];
    written_dicom w = write_dicom(img, i, img.corrupt == corruption_kind::bad_syntax);
    if (img.corrupt) {
      switch (*img.corrupt) {
        case corruption_kind::truncate:
          // Cut inside the value of the last element before pixel data.
          w.bytes.resize(w.last_header_element_offset + 8 + 1);
          errors.push_back({{"image_id", img.id}, {"kind", "Truncated"},
                            {"offset", w.last_header_element_offset}});
          break;
        case corruption_kind::bad_magic:
          w.bytes[131] = 'X';
          errors.push_back({{"image_id", img.id}, {"kind", "MissingMagic"}, {"offset", 128}});
          break;
        case corruption_kind::bad_syntax:
          errors.push_back({{"image_id", img.id}, {"kind", "UnsupportedTransferSyntax"},
                            {"offset", w.syntax_offset}});
          break;
      }
    }
    corpus.dicoms.push_back({img.id, std::move(w.bytes)});
  }

  // Manifest: statistics computed from the plan, not from the emitted files.
  json m;
  m["format"] = "cxr-audit-synth-manifest/1";
  m["spec"] = to_json(spec);
  m["errors"] = errors;

  json image_list = json::array();
  for (const auto& img : images) {
    json ij;
    ij["image_id"] = img.id;
    ij["rows"] = img.rows;
    ij["columns"] = img.cols;
    ij["syntax"] = img.explicit_vr ? "explicit" : "implicit";
    ij["age_raw"] = img.age_raw ? json(*img.age_raw) : json(nullptr);
    ij["sex_raw"] = img.sex_raw ? json(*img.sex_raw) : json(nullptr);
    ij["photometric"] = img.photometric ? json(*img.photometric) : json(nullptr);
    ij["finding"] = img.finding;
    ij["annotators"] = img.annotators;
    ij["deviation"] = twist_name(img.deviation);
    ij["parity_role"] = img.parity == parity_role::positive         ? "positive"
                        : img.parity == parity_role::false_positive ? "false_positive"
                                                                    : "none";
    ij["corruption"] = img.corrupt ? json(corruption_name(*img.corrupt)) : json(nullptr);
    json lesions = json::array();
    for (const auto& l : img.lesions) {
      json boxes = json::array();
      for (const auto& b : l.boxes) boxes.push_back(box_json(b));
      lesions.push_back({{"class", label_name(l.label)}, {"boxes", boxes}});
    }
    ij["lesions"] = lesions;
    image_list.push_back(ij);
  }
  m["images"] = image_list;

  // Metadata as an audit of the files would see it.
  {
    std::size_t valid = 0, oor = 0, malformed = 0, missing = 0, parse_errors = 0;
    std::map<std::string, std::size_t> sex_counts = {{"Male", 0}, {"Female", 0}, {"Other", 0}, {"Missing", 0}};
    std::map<std::string, std::size_t> photometric;
    json children = json::array();
    json out_of_range = json::array();
    for (const auto& img : images) {
      if (img.corrupt) {
        ++parse_errors;
        ++missing;
        ++sex_counts["Missing"];
        ++photometric["missing"];
        continue;
      }
      switch (img.age) {
        case age_kind::absent:
        case age_kind::empty: ++missing; break;
        case age_kind::malformed: ++malformed; break;
        case age_kind::out_of_range:
          ++oor;
          out_of_range.push_back({img.id, *img.years});
          break;
        case age_kind::child:
          ++valid;
          children.push_back(img.id);
          break;
        case age_kind::adult: ++valid; break;
      }
      ++sex_counts[std::string(sex_category_name(img.sex))];
      ++photometric[img.photometric ? *img.photometric : "missing"];
    }
    m["metadata"] = {{"n_images", n},
                     {"n_parse_errors", parse_errors},
                     {"age", {{"valid", valid}, {"out_of_range", oor}, {"malformed", malformed}, {"missing", missing}}},
                     {"sex", sex_counts},
                     {"photometric", photometric},
                     {"children", children},
                     {"out_of_range", out_of_range}};
  }

  // Workload, agreement, no-finding sets.
  {
    json workload = json::object();
    json agreement = json::object();
    std::map<std::string, std::vector<std::string>> no_finding;
    for (const auto& img : images) {
      const std::string sex = img.corrupt ? "Missing" : std::string(sex_category_name(img.sex));
      std::string age = "missing";
      if (!img.corrupt && (img.age == age_kind::child || img.age == age_kind::adult)) {
        age = *img.years < kDefaultAgeSplit ? "young" : "old";
      }
      std::map<std::string, std::set<class_label>> sets;
      for (const auto& [rad, marks] : img.marks) {
        for (const auto& mk : marks) sets[rad].insert(mk.label);
      }
      for (const auto& [rad, labels] : sets) {
        const bool finding = !labels.count(class_label::no_finding);
        auto& w = workload[rad];
        if (w.is_null()) {
          w = {{"total", 0}, {"finding", 0}, {"no_finding", 0},
               {"sex", {{"Male", 0}, {"Female", 0}, {"Other", 0}, {"Missing", 0}}},
               {"age", {{"missing", 0}, {"young", 0}, {"old", 0}}}};
        }
        w["total"] = w["total"].get<std::size_t>() + 1;
        const char* key = finding ? "finding" : "no_finding";
        w[key] = w[key].get<std::size_t>() + 1;
        w["sex"][sex] = w["sex"][sex].get<std::size_t>() + 1;
        w["age"][age] = w["age"][age].get<std::size_t>() + 1;
        if (!finding) no_finding[rad].push_back(img.id);

        bool any = false, all = true;
        for (const auto& [other, other_labels] : sets) {
          if (other == rad) continue;
          if (other_labels == labels) any = true;
          else all = false;
        }
        if (sets.size() == 1) any = true;
        auto& a = agreement[rad];
        if (a.is_null()) a = {{"n_images", 0}, {"n_at_least_one", 0}, {"n_both_all", 0}};
        a["n_images"] = a["n_images"].get<std::size_t>() + 1;
        if (any) a["n_at_least_one"] = a["n_at_least_one"].get<std::size_t>() + 1;
        if (all) a["n_both_all"] = a["n_both_all"].get<std::size_t>() + 1;
      }
    }
    m["workload"] = workload;
    m["agreement"] = agreement;
    m["no_finding"] = no_finding;
  }

  // Co-location and granularity expectations.
  {
    std::size_t cross_events = 0;
    std::map<std::string, std::size_t> per_pair;
    std::size_t conflicts = 0;
    const std::size_t others = spec.annotators_per_image - 1;
    for (const auto& img : images) {
      if (img.deviation == twist::cross_label) {
        const auto& lesion = img.lesions.front();
        const std::size_t events = lesion.boxes.size() * others;
        cross_events += events;
        const auto pair = normalized_pair(lesion.label, *tax.overlap_partner(lesion.label));
        per_pair[std::string(label_name(pair.first)) + "|" + std::string(label_name(pair.second))] += events;
      } else if (img.deviation == twist::coarse_box) {
        conflicts += others;
      }
    }
    m["cooccurrence"] = {{"cross_label_events", cross_events}, {"pairs", per_pair}};
    m["granularity"] = {{"conflicts", conflicts}, {"contained_per_conflict", 2}};
  }

  // Age means per image-level finding group (valid ages of readable files).
  {
    double sum_f = 0, sum_n = 0;
    std::size_t n_f = 0, n_n = 0;
    for (const auto& img : images) {
      if (img.corrupt || !(img.age == age_kind::child || img.age == age_kind::adult)) continue;
      if (img.finding) {
        sum_f += *img.years;
        ++n_f;
      } else {
        sum_n += *img.years;
        ++n_n;
      }
    }
    m["density"] = {{"finding", {{"n", n_f}, {"sample_mean", n_f ? json(sum_f / n_f) : json(nullptr)}}},
                    {"no_finding", {{"n", n_n}, {"sample_mean", n_n ? json(sum_n / n_n) : json(nullptr)}}}};
  }

  // Spatial and detection.
  {
    json placements = json::object();
    for (class_label c : classes) placements[std::string(label_name(c))] = placement_name(spec.placement_of(c));
    m["spatial"] = {{"placements", placements}};
    std::map<std::string, std::size_t> n_gt;
    for (const auto& rec : corpus.annotations) {
      if (rec.box) ++n_gt[std::string(label_name(rec.label))];
    }
    const bool perfect = spec.predictions == prediction_mode::perfect && !spec.parity;
    m["detection"] = {{"n_gt", n_gt},
                      {"expected_map", perfect && !n_gt.empty() ? json(1.0) : json(nullptr)}};
  }
  m["parity"] = parity_manifest;

  corpus.manifest = std::move(m);
  return corpus;
}

nlohmann::json generate_corpus(const corpus_spec& spec, const std::filesystem::path& out) {
  synthetic_corpus corpus = build_corpus(spec);
  std::error_code ec;
  std::filesystem::create_directories(out / "dicom", ec);
  if (ec) throw output_not_writable("cannot create " + (out / "dicom").string() + ": " + ec.message());

  auto write_file = [](const std::filesystem::path& p, const char* data, std::size_t size) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw output_not_writable("cannot write " + p.string());
    f.write(data, static_cast<std::streamsize>(size));
    if (!f) throw output_not_writable("short write to " + p.string());
  };
  for (const auto& d : corpus.dicoms) {
    write_file(out / "dicom" / (d.image_id + ".dicom"), reinterpret_cast<const char*>(d.bytes.data()),
               d.bytes.size());
  }
  const std::string annotations = serialize_annotation_csv(corpus.annotations);
  write_file(out / "annotations.csv", annotations.data(), annotations.size());
  const std::string predictions = serialize_prediction_csv(corpus.predictions);
  write_file(out / "predictions.csv", predictions.data(), predictions.size());
  const std::string manifest = corpus.manifest.dump(2) + "\n";
  write_file(out / "manifest.json", manifest.data(), manifest.size());
  return corpus.manifest;
}

}  // namespace cxr_audit::synth
