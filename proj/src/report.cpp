#include "faery/report.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "faery/error.hpp"

namespace faery::report {

namespace {

constexpr const char* kSplitColumns = "tasks,solved,solved_ratio,mean_generations_over_solved,count_unsolved,evaluations";
constexpr const char* kScoreColumns = "f0_mean,f0_max,with_solutions,f1_best,f1_mean_finite";

std::string split_fields(const meta::SplitStats& s) {
    std::ostringstream os;
    os << s.tasks << ',' << s.solved << ',' << format_number(s.solved_ratio) << ','
       << format_number(s.mean_generations_over_solved) << ',' << s.count_unsolved << ',' << s.evaluations;
    return os.str();
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& s) {
    if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw Error("report: bad number '" + s + "'");
    return v;
}

std::uint64_t parse_count(const std::string& s) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw Error("report: bad count '" + s + "'");
    return v;
}

meta::SplitStats parse_split(const std::vector<std::string>& f, std::size_t at) {
    meta::SplitStats s;
    s.tasks = parse_count(f.at(at));
    s.solved = parse_count(f.at(at + 1));
    s.solved_ratio = parse_number(f.at(at + 2));
    s.mean_generations_over_solved = parse_number(f.at(at + 3));
    s.count_unsolved = parse_count(f.at(at + 4));
    s.evaluations = parse_count(f.at(at + 5));
    return s;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::vector<std::string> lines;
    std::ifstream in(path);
    if (!in) return lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

/// Rewrites `path` keeping the header and rows with generation < limit.
void truncate_rows(const std::filesystem::path& path, const std::string& header, std::size_t limit) {
    const auto lines = read_lines(path);
    std::ofstream out(path, std::ios::trunc);
    out << header << '\n';
    for (const auto& line : lines) {
        auto g = row_generation(line);
        if (g && *g < limit) out << line << '\n';
    }
    if (!out) throw Error("report: cannot rewrite " + path.string());
}

nlohmann::json number_json(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
    return v;
}

} // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "";
    if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw Error("report: cannot format number");
    return std::string(buf, ptr);
}

std::string train_header() {
    return std::string("meta_generation,split,") + kSplitColumns + "," + kScoreColumns;
}

std::string test_header() { return std::string("meta_generation,split,") + kSplitColumns; }

std::string train_row(const meta::MetaGenReport& r) {
    std::ostringstream os;
    os << r.meta_generation << ",train," << split_fields(r.train) << ',' << format_number(r.scores.f0_mean) << ','
       << r.scores.f0_max << ',' << r.scores.with_solutions << ',' << format_number(r.scores.f1_best) << ','
       << format_number(r.scores.f1_mean_finite);
    return os.str();
}

std::optional<std::string> test_row(const meta::MetaGenReport& r) {
    if (!r.test) return std::nullopt;
    return std::to_string(r.meta_generation) + ",test," + split_fields(*r.test);
}

std::optional<std::size_t> row_generation(const std::string& line) {
    const auto comma = line.find(',');
    const std::string first = line.substr(0, comma);
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(first.data(), first.data() + first.size(), v);
    if (first.empty() || ec != std::errc{} || ptr != first.data() + first.size()) return std::nullopt;
    return v;
}

ReportWriter::ReportWriter(const std::filesystem::path& dir, std::optional<std::size_t> resume_from)
    : train_path_(dir / "train.csv"), test_path_(dir / "test.csv") {
    std::filesystem::create_directories(dir);
    if (resume_from) {
        truncate_rows(train_path_, train_header(), *resume_from);
        truncate_rows(test_path_, test_header(), *resume_from);
        train_.open(train_path_, std::ios::app);
        test_.open(test_path_, std::ios::app);
    } else {
        train_.open(train_path_, std::ios::trunc);
        test_.open(test_path_, std::ios::trunc);
        train_ << train_header() << '\n';
        test_ << test_header() << '\n';
    }
    if (!train_ || !test_) throw Error("report: cannot open report files in " + dir.string());
    train_.flush();
    test_.flush();
}

void ReportWriter::append(const meta::MetaGenReport& r) {
    train_ << train_row(r) << '\n';
    if (auto row = test_row(r)) test_ << *row << '\n';
    train_.flush();
    test_.flush();
    if (!train_ || !test_) throw Error("report: write failed");
}

nlohmann::json split_json(const meta::SplitStats& s) {
    return {{"tasks", s.tasks},
            {"solved", s.solved},
            {"solved_ratio", number_json(s.solved_ratio)},
            {"mean_generations_over_solved", number_json(s.mean_generations_over_solved)},
            {"count_unsolved", s.count_unsolved},
            {"evaluations", s.evaluations}};
}

nlohmann::json summary_json(const std::vector<meta::MetaGenReport>& rows, std::uint64_t master_seed,
                            std::size_t g_outer) {
    nlohmann::json doc;
    doc["format_version"] = kReportVersion;
    doc["master_seed"] = master_seed;
    doc["g_outer"] = g_outer;
    doc["meta_generations_completed"] = rows.size();
    doc["final_train"] = nullptr;
    doc["final_test"] = nullptr;
    if (!rows.empty()) {
        const auto& last = rows.back();
        auto train = split_json(last.train);
        train["meta_generation"] = last.meta_generation;
        train["f0_mean"] = number_json(last.scores.f0_mean);
        train["f0_max"] = last.scores.f0_max;
        train["f1_best"] = number_json(last.scores.f1_best);
        doc["final_train"] = std::move(train);
    }
    for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
        if (it->test) {
            auto test = split_json(*it->test);
            test["meta_generation"] = it->meta_generation;
            doc["final_test"] = std::move(test);
            break;
        }
    }
    return doc;
}

std::vector<meta::MetaGenReport> read_reports(const std::filesystem::path& dir) {
    std::vector<meta::MetaGenReport> rows;
    for (const auto& line : read_lines(dir / "train.csv")) {
        auto g = row_generation(line);
        if (!g) continue;
        const auto f = split_csv(line);
        if (f.size() != 13) throw Error("report: malformed train row '" + line + "'");
        meta::MetaGenReport r;
        r.meta_generation = *g;
        r.train = parse_split(f, 2);
        r.scores.f0_mean = parse_number(f[8]);
        r.scores.f0_max = parse_count(f[9]);
        r.scores.with_solutions = parse_count(f[10]);
        r.scores.f1_best = parse_number(f[11]);
        r.scores.f1_mean_finite = parse_number(f[12]);
        rows.push_back(r);
    }
    for (const auto& line : read_lines(dir / "test.csv")) {
        auto g = row_generation(line);
        if (!g) continue;
        const auto f = split_csv(line);
        if (f.size() != 8) throw Error("report: malformed test row '" + line + "'");
        for (auto& r : rows) {
            if (r.meta_generation == *g) r.test = parse_split(f, 2);
        }
    }
    return rows;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
    std::ofstream out(path, std::ios::trunc);
    out << doc.dump(2) << '\n';
    if (!out) throw Error("cannot write " + path.string());
}

} // namespace faery::report
