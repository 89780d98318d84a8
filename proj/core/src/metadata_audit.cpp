#include "cxr_audit/metadata_audit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace cxr_audit {
namespace {

std::optional<double> frac(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::optional<std::string_view> view(const std::optional<std::string>& s) {
  if (!s) return std::nullopt;
  return std::string_view(*s);
}

// Linear-interpolated quantile of sorted data.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double t = pos - static_cast<double>(lo);
  return sorted[lo] + t * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::optional<double> metadata_report::missing_age_frac() const {
  return frac(age_missing + age_malformed, n_images);
}
std::optional<double> metadata_report::valid_age_frac() const {
  return frac(age_valid, n_images);
}
std::optional<double> metadata_report::out_of_range_frac() const {
  return frac(age_out_of_range, n_images);
}
std::optional<double> metadata_report::missing_sex_frac() const {
  return frac(sex_counts[static_cast<std::size_t>(sex_category::missing)], n_images);
}
std::optional<double> metadata_report::sex_fraction(sex_category s) const {
  return frac(sex_counts[static_cast<std::size_t>(s)], n_images);
}
std::optional<double> metadata_report::photometric_fraction(const std::string& key) const {
  const auto it = photometric_counts.find(key);
  return frac(it == photometric_counts.end() ? 0 : it->second, n_images);
}

metadata_report metadata_validity_report(std::span<const scan_entry> entries) {
  metadata_report r;
  for (const auto& entry : entries) {
    ++r.n_images;
    const dicom_header* h = entry.header();
    if (!h) {
      ++r.n_parse_errors;
      ++r.age_missing;
      ++r.sex_counts[static_cast<std::size_t>(sex_category::missing)];
      ++r.photometric_counts[kMissingKey];
      continue;
    }
    const age_parse age = parse_age(view(h->patient_age_raw));
    switch (age.validity) {
      case age_validity::valid:
        ++r.age_valid;
        if (*age.years <= kChildMaxAge) r.children.push_back(entry.image_id);
        break;
      case age_validity::out_of_range:
        ++r.age_out_of_range;
        r.out_of_range_ages.emplace_back(entry.image_id, *age.years);
        break;
      case age_validity::malformed: ++r.age_malformed; break;
      case age_validity::missing: ++r.age_missing; break;
    }
    ++r.sex_counts[static_cast<std::size_t>(normalize_sex(view(h->patient_sex_raw)))];
    const bool has_photometric = h->photometric && !h->photometric->empty();
    ++r.photometric_counts[has_photometric ? *h->photometric : std::string(kMissingKey)];
  }
  std::sort(r.children.begin(), r.children.end());
  std::sort(r.out_of_range_ages.begin(), r.out_of_range_ages.end());
  return r;
}

double density_curve::integral() const {
  double s = 0;
  for (std::size_t i = 1; i < ages.size(); ++i) {
    s += 0.5 * (density[i] + density[i - 1]) * (ages[i] - ages[i - 1]);
  }
  return s;
}

double density_curve::mean() const {
  double s = 0;
  for (std::size_t i = 1; i < ages.size(); ++i) {
    s += 0.5 * (density[i] * ages[i] + density[i - 1] * ages[i - 1]) * (ages[i] - ages[i - 1]);
  }
  return s;
}

int density_curve::argmax() const {
  const auto it = std::max_element(density.begin(), density.end());
  return ages[static_cast<std::size_t>(it - density.begin())];
}

double silverman_bandwidth(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 2) return 1.0;
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(n);
  double ss = 0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = (quantile(sorted, 0.75) - quantile(sorted, 0.25)) / 1.34;
  double spread = 0;
  if (sd > 0 && iqr > 0) spread = std::min(sd, iqr);
  else spread = std::max(sd, iqr);
  if (spread <= 0) return 1.0;
  return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

density_curve gaussian_kde_on_grid(std::span<const double> samples, int lo, int hi) {
  density_curve c;
  c.n_samples = samples.size();
  c.bandwidth = silverman_bandwidth(samples);
  c.sample_mean = samples.empty() ? 0.0
                                  : std::accumulate(samples.begin(), samples.end(), 0.0) /
                                        static_cast<double>(samples.size());
  const double norm = 1.0 / (static_cast<double>(samples.size()) * c.bandwidth *
                             std::sqrt(2.0 * std::numbers::pi));
  for (int age = lo; age <= hi; ++age) {
    double s = 0;
    for (double x : samples) {
      const double z = (age - x) / c.bandwidth;
      s += std::exp(-0.5 * z * z);
    }
    c.ages.push_back(age);
    c.density.push_back(s * norm);
  }
  const double area = c.integral();
  if (area > 0) {
    for (double& d : c.density) d /= area;
  }
  return c;
}

age_density_result age_illness_density(const header_map& headers, const image_index& index) {
  age_density_result result;
  std::vector<double> finding_ages;
  std::vector<double> no_finding_ages;
  for (const auto& [id, image] : index) {
    const auto it = headers.find(id);
    if (it == headers.end()) {
      ++result.excluded_invalid_age;
      continue;
    }
    const age_parse age = parse_age(view(it->second.patient_age_raw));
    if (age.validity != age_validity::valid) {
      ++result.excluded_invalid_age;
      continue;
    }
    const bool finding = image.any_lesion();
    (finding ? finding_ages : no_finding_ages).push_back(*age.years);
    auto& hist = finding ? result.finding_histogram : result.no_finding_histogram;
    ++hist.counts[static_cast<std::size_t>(*age.years / age_histogram::kBinWidth)];
  }
  if (finding_ages.empty()) throw empty_group_error("EmptyGroup: no valid ages among finding images");
  if (no_finding_ages.empty()) throw empty_group_error("EmptyGroup: no valid ages among no-finding images");
  result.finding = gaussian_kde_on_grid(finding_ages);
  result.no_finding = gaussian_kde_on_grid(no_finding_ages);
  return result;
}

}  // namespace cxr_audit
