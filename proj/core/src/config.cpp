#include "cxr_audit/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace cxr_audit {
namespace {

using nlohmann::json;

void reject_unknown(const json& j, std::initializer_list<std::string_view> known,
                    const std::string& where) {
  if (!j.is_object()) throw config_error(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    if (std::find(known.begin(), known.end(), k) == known.end()) {
      throw config_error("unknown config key '" + (where.empty() ? k : where + "." + k) + "'");
    }
  }
}

class_label label_or_throw(const json& v) {
  const auto name = v.get<std::string>();
  const auto label = label_from_name(name);
  if (!label) throw config_error("unknown class name '" + name + "' in config");
  return *label;
}

void check_unit(double v, const char* name, bool open_low) {
  const bool ok = std::isfinite(v) && (open_low ? v > 0 : v >= 0) && v <= 1;
  if (!ok) {
    throw config_error(std::string("thresholds.") + name + " must lie in " +
                       (open_low ? "(0,1]" : "[0,1]"));
  }
}

}  // namespace

std::map<std::string, std::string> audit_config::group_of() const {
  std::map<std::string, std::string> out;
  for (const auto& [group, members] : annotator_groups) {
    for (const auto& rad : members) {
      if (!out.emplace(rad, group).second) {
        throw config_error("rad_id '" + rad + "' listed in more than one annotator group");
      }
    }
  }
  return out;
}

void audit_config::validate() const {
  check_unit(thresholds.iou, "iou", true);
  check_unit(thresholds.colocation, "colocation", true);
  check_unit(thresholds.containment, "containment", true);
  check_unit(thresholds.asymmetry, "asymmetry", false);
  check_unit(thresholds.score, "score", false);
  check_unit(thresholds.gap, "gap", false);
  if (grid.width < 2 || grid.height < 1 || grid.width > 4096 || grid.height > 4096) {
    throw config_error("grid must be 2..4096 wide and 1..4096 high");
  }
  if (age_split < 2 || age_split > 99) throw config_error("age_split must lie in 2..99");
  if (dicom_extensions.empty()) throw config_error("dicom_extensions is empty");
  for (const auto& [group, members] : annotator_groups) {
    if (members.empty()) throw config_error("annotator group '" + group + "' is empty");
  }
  (void)group_of();
  try {
    tax.validate();
  } catch (const std::invalid_argument& e) {
    throw config_error(std::string("taxonomy: ") + e.what());
  }
}

audit_config config_from_json(const json& j) {
  audit_config c;
  try {
    reject_unknown(j,
                   {"taxonomy", "thresholds", "grid", "annotator_groups", "age_split",
                    "symmetry_exempt", "seed", "review_n", "dicom_extensions"},
                   "");
    if (j.contains("taxonomy")) {
      const auto& t = j["taxonomy"];
      reject_unknown(t, {"overlap_pairs", "umbrella_map"}, "taxonomy");
      if (t.contains("overlap_pairs")) {
        c.tax.overlap_pairs.clear();
        for (const auto& p : t["overlap_pairs"]) {
          if (!p.is_array() || p.size() != 2) throw config_error("overlap pairs need two class names");
          c.tax.add_overlap(label_or_throw(p[0]), label_or_throw(p[1]));
        }
      }
      if (t.contains("umbrella_map")) {
        c.tax.umbrella_map.clear();
        for (const auto& [broad, covered] : t["umbrella_map"].items()) {
          auto& dst = c.tax.umbrella_map[label_or_throw(json(broad))];
          for (const auto& n : covered) dst.insert(label_or_throw(n));
        }
      }
    }
    if (j.contains("thresholds")) {
      const auto& t = j["thresholds"];
      reject_unknown(t, {"iou", "colocation", "containment", "asymmetry", "score", "gap", "min_support"},
                     "thresholds");
      auto& th = c.thresholds;
      th.iou = t.value("iou", th.iou);
      th.colocation = t.value("colocation", th.colocation);
      th.containment = t.value("containment", th.containment);
      th.asymmetry = t.value("asymmetry", th.asymmetry);
      th.score = t.value("score", th.score);
      th.gap = t.value("gap", th.gap);
      th.min_support = t.value("min_support", th.min_support);
    }
    if (j.contains("grid")) {
      const auto& g = j["grid"];
      reject_unknown(g, {"width", "height", "deposit"}, "grid");
      c.grid.width = g.value("width", c.grid.width);
      c.grid.height = g.value("height", c.grid.height);
      const auto mode = g.value("deposit", std::string("binary"));
      if (mode == "binary") c.deposit = deposit_mode::binary;
      else if (mode == "area_weighted") c.deposit = deposit_mode::area_weighted;
      else throw config_error("grid.deposit must be 'binary' or 'area_weighted'");
    }
    if (j.contains("annotator_groups")) {
      c.annotator_groups = j["annotator_groups"].get<std::map<std::string, std::vector<std::string>>>();
    }
    c.age_split = j.value("age_split", c.age_split);
    if (j.contains("symmetry_exempt")) {
      c.symmetry_exempt.clear();
      for (const auto& n : j["symmetry_exempt"]) c.symmetry_exempt.insert(label_or_throw(n));
    }
    c.seed = j.value("seed", c.seed);
    c.review_n = j.value("review_n", c.review_n);
    if (j.contains("dicom_extensions")) {
      c.dicom_extensions = j["dicom_extensions"].get<std::vector<std::string>>();
    }
  } catch (const json::exception& e) {
    throw config_error(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

audit_config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw config_error(path + ": " + e.what());
  }
  return config_from_json(j);
}

json to_json(const audit_config& c) {
  json j;
  json pairs = json::array();
  for (const auto& [a, b] : c.tax.overlap_pairs) pairs.push_back({label_name(a), label_name(b)});
  json umbrella = json::object();
  for (const auto& [broad, covered] : c.tax.umbrella_map) {
    json names = json::array();
    for (auto l : covered) names.push_back(label_name(l));
    umbrella[std::string(label_name(broad))] = names;
  }
  j["taxonomy"] = {{"overlap_pairs", pairs}, {"umbrella_map", umbrella}};
  const auto& th = c.thresholds;
  j["thresholds"] = {{"iou", th.iou},     {"colocation", th.colocation},
                     {"containment", th.containment}, {"asymmetry", th.asymmetry},
                     {"score", th.score}, {"gap", th.gap},
                     {"min_support", th.min_support}};
  j["grid"] = {{"width", c.grid.width},
               {"height", c.grid.height},
               {"deposit", c.deposit == deposit_mode::binary ? "binary" : "area_weighted"}};
  j["annotator_groups"] = c.annotator_groups;
  j["age_split"] = c.age_split;
  json exempt = json::array();
  for (auto l : c.symmetry_exempt) exempt.push_back(label_name(l));
  j["symmetry_exempt"] = exempt;
  j["seed"] = c.seed;
  j["review_n"] = c.review_n;
  j["dicom_extensions"] = c.dicom_extensions;
  return j;
}

void apply_override(audit_config& c, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw config_error("override must look like key=value: '" + std::string(assignment) + "'");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json j = to_json(c);
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(part)) {
      throw config_error("unknown config key '" + key + "'");
    }
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = value;
  c = config_from_json(j);
}

}  // namespace cxr_audit
