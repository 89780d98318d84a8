#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <future>
#include <optional>
#include <ostream>

#include "cxr_audit/annotations.hpp"
#include "cxr_audit/config.hpp"
#include "cxr_audit/consistency.hpp"
#include "cxr_audit/detection_eval.hpp"
#include "cxr_audit/dicom_meta.hpp"
#include "cxr_audit/fairness.hpp"
#include "cxr_audit/metadata_audit.hpp"
#include "cxr_audit/report.hpp"
#include "cxr_audit/spatial.hpp"
#include "cxr_audit/synthgen.hpp"

namespace cxr_audit::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// An input could not be read; the message names the file and location.
class input_failure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct options {
  std::string dicom_dir;
  std::string annotations;
  std::string predictions;
  std::string config;
  std::string out_dir;
  std::string format = "both";
  std::vector<std::string> overrides;
  unsigned threads = 0;
  std::string preset;
  std::string spec;
};

audit_config load_effective_config(const options& o) {
  try {
    audit_config c = o.config.empty() ? audit_config{} : load_config(o.config);
    for (const auto& s : o.overrides) apply_override(c, s);
    return c;
  } catch (const config_error& e) {
    throw input_failure(std::string(e.what()) + (o.config.empty() ? "" : " (" + o.config + ")"));
  }
}

image_index load_annotations(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_failure(path + ": cannot open annotations");
  try {
    const auto records = parse_annotation_csv(in);
    return build_image_index(records);
  } catch (const annotation_error& e) {
    throw input_failure(path + ": " + e.what());
  }
}

std::vector<prediction> load_predictions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_failure(path + ": cannot open predictions");
  try {
    return parse_prediction_csv(in);
  } catch (const prediction_error& e) {
    throw input_failure(path + ": " + e.what());
  }
}

std::vector<scan_entry> load_dicoms(const std::string& dir, const audit_config& c, unsigned threads) {
  scan_options so;
  so.extensions = c.dicom_extensions;
  so.threads = threads;
  try {
    return scan_corpus(dir, so);
  } catch (const directory_unreadable& e) {
    throw input_failure(dir + ": " + e.what());
  }
}

void write_text(const fs::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw input_failure(p.string() + ": cannot write");
  f << content;
  if (!f) throw input_failure(p.string() + ": short write");
}

fs::path prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw input_failure(dir + ": cannot create output directory: " + ec.message());
  return dir;
}

void require(const std::string& value, const char* flag, const std::string& command) {
  if (value.empty()) throw input_failure(command + " requires " + flag);
}

// Which sections a subcommand computes.
struct plan {
  bool metadata = false;
  bool consistency = false;
  bool spatial = false;
  bool detection = false;
  bool fairness = false;
};

int run_audit(const std::string& command, const options& o, std::ostream& out) {
  plan p;
  if (command == "audit-metadata") {
    require(o.dicom_dir, "--dicom-dir", command);
    p.metadata = true;
  } else if (command == "audit-consistency") {
    require(o.annotations, "--annotations", command);
    p.consistency = true;
  } else if (command == "audit-spatial") {
    require(o.annotations, "--annotations", command);
    require(o.dicom_dir, "--dicom-dir", command);
    p.spatial = true;
  } else if (command == "eval-detections") {
    require(o.annotations, "--annotations", command);
    require(o.predictions, "--predictions", command);
    p.detection = true;
  } else if (command == "audit-fairness") {
    require(o.annotations, "--annotations", command);
    require(o.predictions, "--predictions", command);
    require(o.dicom_dir, "--dicom-dir", command);
    p.fairness = true;
  } else {
    require(o.dicom_dir, "--dicom-dir", command);
    require(o.annotations, "--annotations", command);
    p = {true, true, true, !o.predictions.empty(), !o.predictions.empty()};
  }
  require(o.out_dir, "--out-dir", command);

  const audit_config config = load_effective_config(o);
  std::map<std::string, std::string> skip_reasons;
  if (command == "full-report" && o.predictions.empty()) {
    skip_reasons["detection"] = "no predictions given";
    skip_reasons["fairness"] = "no predictions given";
  }

  // Inputs are loaded in a fixed order so the first failing one is reported.
  std::vector<scan_entry> entries;
  header_map headers;
  if (!o.dicom_dir.empty()) {
    entries = load_dicoms(o.dicom_dir, config, o.threads);
    headers = headers_by_id(entries);
  }
  std::optional<image_index> index;
  if (!o.annotations.empty()) index = load_annotations(o.annotations);
  std::vector<prediction> preds;
  if (p.detection || p.fairness) preds = load_predictions(o.predictions);
  // Configured groups must name annotators that exist.
  if (p.consistency) {
    try {
      (void)compute_agreement(*index, config.group_of());
    } catch (const consistency_error& e) {
      throw input_failure(std::string(e.what()) + (o.config.empty() ? "" : " (" + o.config + ")"));
    }
  }

  const fs::path out_dir = prepare_out_dir(o.out_dir);

  std::optional<age_density_result> density;
  std::string density_reason = "no annotations given";
  std::vector<heatmap> maps;
  std::vector<std::future<section_result>> jobs;
  if (p.metadata) {
    if (index) {
      try {
        density = age_illness_density(headers, *index);
      } catch (const empty_group_error& e) {
        density_reason = e.what();
      }
    }
    jobs.push_back(std::async(std::launch::async, [&] {
      return metadata_section(entries, density ? &*density : nullptr, density_reason);
    }));
  }
  if (p.consistency) {
    jobs.push_back(std::async(std::launch::async,
                              [&] { return consistency_section(*index, headers, config); }));
  }
  if (p.spatial) {
    maps = class_heatmaps(*index, headers, config);
    jobs.push_back(std::async(std::launch::async, [&] { return spatial_section(maps, config); }));
  }
  if (p.detection) {
    jobs.push_back(std::async(std::launch::async, [&] {
      return detection_section(evaluate_detections(preds, *index, config.thresholds.iou));
    }));
  }
  if (p.fairness) {
    jobs.push_back(std::async(std::launch::async, [&] {
      const auto report = audit_fairness(preds, *index, headers, config.thresholds.score,
                                         config.thresholds.min_support, {config.age_split});
      return fairness_section(report, config);
    }));
  }
  std::vector<section_result> sections;
  for (auto& j : jobs) sections.push_back(j.get());

  const json report = merge_report(sections, skip_reasons, to_json(config));

  if (o.format == "json" || o.format == "both") {
    write_text(out_dir / "report.json", render_json(report));
    out << (out_dir / "report.json").string() << '\n';
  }
  if (o.format == "markdown" || o.format == "both") {
    write_text(out_dir / "report.md", render_markdown(report));
    out << (out_dir / "report.md").string() << '\n';
  }
  if (density) {
    write_text(out_dir / "age_density.csv", age_density_csv(*density));
    out << (out_dir / "age_density.csv").string() << '\n';
  }
  if (p.spatial) {
    const fs::path dir = out_dir / "heatmaps";
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw input_failure(dir.string() + ": cannot create: " + ec.message());
    for (const auto& h : maps) {
      write_text(dir / heatmap_file_name(h.label), render_pgm(h));
      out << (dir / heatmap_file_name(h.label)).string() << '\n';
    }
  }
  if (p.consistency) {
    const auto review = sample_no_finding_review(*index, config.review_n, config.seed);
    write_text(out_dir / "review_worksheet.csv", review.to_csv());
    out << (out_dir / "review_worksheet.csv").string() << '\n';
  }
  return report["flags"].empty() ? kExitClean : kExitFlagged;
}

int run_sample_review(const options& o, std::ostream& out) {
  require(o.annotations, "--annotations", "sample-review");
  require(o.out_dir, "--out-dir", "sample-review");
  const audit_config config = load_effective_config(o);
  const image_index index = load_annotations(o.annotations);
  const fs::path out_dir = prepare_out_dir(o.out_dir);
  const auto review = sample_no_finding_review(index, config.review_n, config.seed);
  write_text(out_dir / "review_worksheet.csv", review.to_csv());
  out << (out_dir / "review_worksheet.csv").string() << '\n';
  return kExitClean;
}

int run_synth(const options& o, std::ostream& out) {
  require(o.out_dir, "--out-dir", "synth");
  if (o.preset.empty() == o.spec.empty()) throw input_failure("synth needs exactly one of --preset or --spec");
  synth::corpus_spec spec;
  try {
    if (!o.preset.empty()) {
      const auto p = synth::preset(o.preset);
      if (!p) throw input_failure("unknown preset '" + o.preset + "' (clean, flawed, parity)");
      spec = *p;
    } else {
      std::ifstream in(o.spec);
      if (!in) throw input_failure(o.spec + ": cannot open spec");
      spec = synth::spec_from_json(json::parse(in));
    }
  } catch (const json::parse_error& e) {
    throw input_failure(o.spec + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw input_failure((o.spec.empty() ? o.preset : o.spec) + ": " + e.what());
  }
  try {
    synth::generate_corpus(spec, o.out_dir);
  } catch (const synth::output_not_writable& e) {
    throw input_failure(std::string("OutputNotWritable: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw input_failure(std::string("cannot plant corpus: ") + e.what());
  }
  out << (fs::path(o.out_dir) / "manifest.json").string() << '\n';
  return kExitClean;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Chest X-ray dataset audit toolkit", "cxr-audit"};
  app.set_version_flag("--version", std::string(tool_version()));
  app.require_subcommand(1);
  options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Audit config JSON");
    sub->add_option("--set", o.overrides, "Config override key=value (repeatable)");
    sub->add_option("--out-dir", o.out_dir, "Output directory");
    sub->add_option("--format", o.format, "json, markdown or both")
        ->check(CLI::IsMember({"json", "markdown", "both"}));
  };
  const std::vector<std::pair<std::string, std::string>> audits = {
      {"audit-metadata", "DICOM header validity"},
      {"audit-consistency", "Annotator workload, agreement and label conflicts"},
      {"audit-spatial", "Per-class heatmaps and left-right symmetry"},
      {"eval-detections", "Per-class AP and mAP of a prediction table"},
      {"audit-fairness", "Subgroup parity of image-level predictions"},
      {"full-report", "Every section in one report"},
  };
  for (const auto& [name, help] : audits) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--dicom-dir", o.dicom_dir, "Directory of DICOM files");
    sub->add_option("--annotations", o.annotations, "Annotation CSV");
    sub->add_option("--predictions", o.predictions, "Prediction CSV");
    sub->add_option("--threads", o.threads, "Header parsing threads (0: all cores)");
    add_common(sub);
  }
  auto* review = app.add_subcommand("sample-review", "No-finding review worksheet");
  review->add_option("--annotations", o.annotations, "Annotation CSV");
  add_common(review);
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth_cmd->add_option("--preset", o.preset, "clean, flawed or parity");
  synth_cmd->add_option("--spec", o.spec, "Corpus spec JSON");
  synth_cmd->add_option("--out-dir", o.out_dir, "Output directory");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitClean;
  } catch (const CLI::CallForVersion&) {
    out << tool_version() << '\n';
    return kExitClean;
  } catch (const CLI::ParseError& e) {
    err << "cxr-audit: " << e.what() << '\n';
    return kExitInputError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (command == "synth") return run_synth(o, out);
    if (command == "sample-review") return run_sample_review(o, out);
    return run_audit(command, o, out);
  } catch (const input_failure& e) {
    err << "cxr-audit " << command << ": " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "cxr-audit " << command << ": " << e.what() << '\n';
    return kExitInputError;
  }
}

}  // namespace cxr_audit::cli
