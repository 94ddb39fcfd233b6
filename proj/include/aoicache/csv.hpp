#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aoicache/run_record.hpp"

namespace aoicache {

inline constexpr std::string_view kRunCsvHeader =
    "epoch,rep,reward,cost,aoi,energy_j,action,epsilon,loss";

// 17 significant digits, enough to round-trip any double.
std::string format_double(double value);

void write_run_csv(const std::filesystem::path& path,
                   std::span<const RunRecord> records);
// Throws std::runtime_error on a header or row that does not match the schema.
std::vector<RunRecord> read_run_csv(const std::filesystem::path& path);

}  // namespace aoicache
