#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "distcap/gronwall.hpp"
#include "distcap/kernel_table.hpp"

namespace distcap {

// fixed %.17g formatting keeps outputs byte-identical across runs
std::string format_double(double v);

void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

std::vector<std::vector<double>> read_csv(const std::filesystem::path& path,
                                          std::vector<std::string>* header = nullptr);

// FNV-1a content hash, hex encoded
std::string digest_bytes(const std::string& bytes);
std::string digest_file(const std::filesystem::path& path);

// KernelTable round trip: CSV {t,value,smooth_factor} + JSON sidecar.
// Reading restores grid/values/sigma/provenance; moment evaluators are not
// serialized and must be re-derived from the weight when needed.
void write_kernel_table(const KernelTable& tab, const std::filesystem::path& csv_path,
                        const std::filesystem::path& json_path);
KernelTable read_kernel_table(const std::filesystem::path& csv_path,
                              const std::filesystem::path& json_path);

void write_trajectory(const SampledTrajectory& f, const std::filesystem::path& path);
SampledTrajectory read_trajectory(const std::filesystem::path& path, double grading);

void write_gronwall_bound(const GronwallBound& b, const std::filesystem::path& path);

}  // namespace distcap
