#pragma once

// Machine-readable experiment reports: one CSV per split with a header row,
// plus a JSON summary of the final rows.

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "faery/meta.hpp"

namespace faery::report {

inline constexpr int kReportVersion = 1;

/// Formats a double with round-trip precision; NaN becomes the empty field
/// and the worst sentinel becomes "-inf".
std::string format_number(double v);

std::string train_header();
std::string test_header();
std::string train_row(const meta::MetaGenReport& r);
/// Empty when the report has no test measurement.
std::optional<std::string> test_row(const meta::MetaGenReport& r);

/// Meta-generation index of a data row, or nullopt for the header.
std::optional<std::size_t> row_generation(const std::string& line);

/// Append-only writer for train.csv and test.csv in a directory. Opening with
/// resume_from = k keeps rows of meta-generations < k and drops the rest, so
/// a resumed run reproduces the files of an uninterrupted one.
class ReportWriter {
public:
    ReportWriter(const std::filesystem::path& dir, std::optional<std::size_t> resume_from);

    /// Writes and flushes the rows of one meta-generation.
    void append(const meta::MetaGenReport& r);

    const std::filesystem::path& train_path() const { return train_path_; }
    const std::filesystem::path& test_path() const { return test_path_; }

private:
    std::filesystem::path train_path_;
    std::filesystem::path test_path_;
    std::ofstream train_;
    std::ofstream test_;
};

/// Summary of the last train and test rows plus run metadata.
nlohmann::json summary_json(const std::vector<meta::MetaGenReport>& rows, std::uint64_t master_seed,
                            std::size_t g_outer);

/// Rebuilds reports from the CSV files written by ReportWriter.
std::vector<meta::MetaGenReport> read_reports(const std::filesystem::path& dir);

nlohmann::json split_json(const meta::SplitStats& s);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

} // namespace faery::report
