#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cxr_audit/annotations.hpp"
#include "cxr_audit/config.hpp"
#include "cxr_audit/consistency.hpp"
#include "cxr_audit/detection_eval.hpp"
#include "cxr_audit/dicom_meta.hpp"
#include "cxr_audit/fairness.hpp"
#include "cxr_audit/metadata_audit.hpp"
#include "cxr_audit/spatial.hpp"

namespace cxr_audit {

std::string_view tool_version();

inline constexpr std::array<std::string_view, 5> kSectionNames = {
    "metadata", "consistency", "spatial", "detection", "fairness"};

struct report_flag {
  std::string section;
  std::string severity;  // "warning" or "info"
  std::string message;
  nlohmann::json evidence;
};

struct section_result {
  std::string name;
  nlohmann::json body;
  std::vector<report_flag> flags;
};

// `density` may be null (no annotations); `density_skip_reason` is then
// recorded in its place.
section_result metadata_section(std::span<const scan_entry> entries,
                                const age_density_result* density,
                                const std::string& density_skip_reason = "no annotations given");

section_result consistency_section(const image_index& index, const header_map& headers,
                                   const audit_config& config);

// One heatmap per lesion class, id order.
std::vector<heatmap> class_heatmaps(const image_index& index, const header_map& headers,
                                    const audit_config& config);
section_result spatial_section(std::span<const heatmap> maps, const audit_config& config);

section_result detection_section(const detection_result& result);

section_result fairness_section(const parity_report& report, const audit_config& config);

/// Assembles the report document.
///
/// Sections not in `sections` are written as {"status": "skipped"} with the
/// reason from `skip_reasons` (or "not requested"). The flag list is the
/// concatenation of section flags in section order.
nlohmann::json merge_report(std::span<const section_result> sections,
                            const std::map<std::string, std::string>& skip_reasons,
                            const nlohmann::json& config_echo);

std::string render_json(const nlohmann::json& report);
// Every number is printed with the same text as in render_json.
std::string render_markdown(const nlohmann::json& report);

// age,density_finding,density_nofinding on the shared 1..99 grid.
std::string age_density_csv(const age_density_result& density);

}  // namespace cxr_audit
