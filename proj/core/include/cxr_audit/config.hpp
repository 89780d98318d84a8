#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cxr_audit/spatial.hpp"
#include "cxr_audit/taxonomy.hpp"

namespace cxr_audit {

class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct audit_thresholds {
  double iou = 0.4;
  double colocation = 0.5;
  double containment = 0.9;
  double asymmetry = 0.25;
  double score = 0.5;
  double gap = 0.1;
  std::size_t min_support = 30;
};

struct audit_config {
  taxonomy tax = taxonomy::default_taxonomy();
  audit_thresholds thresholds;
  grid_size grid;
  deposit_mode deposit = deposit_mode::binary;
  std::map<std::string, std::vector<std::string>> annotator_groups;  // group -> rad_ids
  int age_split = 50;
  std::set<class_label> symmetry_exempt = default_symmetry_exempt();
  std::uint64_t seed = 0;
  std::size_t review_n = 10;
  std::vector<std::string> dicom_extensions = {".dicom", ".dcm"};

  // rad_id -> group; throws config_error on a rad listed twice.
  std::map<std::string, std::string> group_of() const;
  // Throws config_error.
  void validate() const;
};

// Missing keys keep their defaults; unknown keys throw config_error.
audit_config config_from_json(const nlohmann::json& j);
audit_config load_config(const std::string& path);
nlohmann::json to_json(const audit_config& c);

// "thresholds.iou=0.5", "seed=7", "symmetry_exempt=[]". The value is read as
// JSON, falling back to a plain string.
void apply_override(audit_config& c, std::string_view assignment);

}  // namespace cxr_audit
