#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cxr_audit/annotations.hpp"
#include "cxr_audit/dicom_meta.hpp"

namespace cxr_audit {

inline constexpr int kChildMaxAge = 17;
inline constexpr const char* kMissingKey = "missing";

/// Corpus-level metadata validity. Images are the unit of observation;
/// unparsable files count as missing on every attribute.
struct metadata_report {
  std::size_t n_images = 0;
  std::size_t n_parse_errors = 0;

  std::size_t age_valid = 0;
  std::size_t age_out_of_range = 0;
  std::size_t age_malformed = 0;
  std::size_t age_missing = 0;  // absent or empty tag, or unparsable file

  std::array<std::size_t, kNumSexCategories> sex_counts{};
  std::map<std::string, std::size_t> photometric_counts;  // kMissingKey for none

  std::vector<std::string> children;  // valid age in 1..17, sorted
  std::vector<std::pair<std::string, int>> out_of_range_ages;  // sorted by id

  // Headline "missing" merges malformed with missing.
  std::optional<double> missing_age_frac() const;
  std::optional<double> valid_age_frac() const;
  std::optional<double> out_of_range_frac() const;
  std::optional<double> missing_sex_frac() const;
  std::optional<double> sex_fraction(sex_category s) const;
  std::optional<double> photometric_fraction(const std::string& key) const;
};

metadata_report metadata_validity_report(std::span<const scan_entry> entries);

class empty_group_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gaussian KDE evaluated on the integer ages lo..hi.
///
/// The curve is rescaled so its trapezoidal integral over the grid is 1.
struct density_curve {
  std::vector<int> ages;
  std::vector<double> density;
  double bandwidth = 0;
  std::size_t n_samples = 0;
  double sample_mean = 0;

  double integral() const;  // trapezoidal
  double mean() const;      // trapezoidal first moment
  int argmax() const;
};

/// Silverman's rule: 0.9 * min(sd, IQR/1.34) * n^(-1/5).
///
/// When one spread estimate is zero the other is used; when both are zero
/// (a single sample, or all equal) the bandwidth falls back to 1 year.
double silverman_bandwidth(std::span<const double> samples);

density_curve gaussian_kde_on_grid(std::span<const double> samples, int lo = kMinValidAge,
                                   int hi = kMaxValidAge);

struct age_histogram {
  static constexpr int kBinWidth = 5;
  std::array<std::size_t, 20> counts{};  // [0,5), [5,10), ..., [95,100)
};

struct age_density_result {
  density_curve finding;
  density_curve no_finding;
  age_histogram finding_histogram;
  age_histogram no_finding_histogram;
  std::size_t excluded_invalid_age = 0;
};

// Images of the index split by whether any annotator marked a lesion.
// Throws empty_group_error when a group has no valid ages.
age_density_result age_illness_density(const header_map& headers, const image_index& index);

}  // namespace cxr_audit
