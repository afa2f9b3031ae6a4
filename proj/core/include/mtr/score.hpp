#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mtr {

struct AlignmentCounts {
    int64_t substitutions = 0;
    int64_t deletions = 0;
    int64_t insertions = 0;
    int64_t correct = 0;

    int64_t reference_length() const { return substitutions + deletions + correct; }
    int64_t errors() const { return substitutions + deletions + insertions; }

    AlignmentCounts& operator+=(const AlignmentCounts& o) {
        substitutions += o.substitutions;
        deletions += o.deletions;
        insertions += o.insertions;
        correct += o.correct;
        return *this;
    }
    bool operator==(const AlignmentCounts&) const = default;
};

inline constexpr std::string_view kDefaultPunctuation =
    "!\"#$%&()*+,-./:;<=>?@[\\]^_`{|}~";  // apostrophes stay inside words

// Lowercases, removes punctuation characters and tokenizes on whitespace.
std::vector<std::string> normalize_transcript(std::string_view text,
                                              std::string_view punctuation = kDefaultPunctuation);

// Minimum-edit-distance alignment with unit costs. Cost ties are broken
// preferring substitution over insertion over deletion, so the counts,
// not just their sum, are reproducible.
AlignmentCounts align(std::span<const std::string> ref, std::span<const std::string> hyp);

// 100 * (S + D + I) / N. Throws EmptyReference when N = 0. Not clamped:
// insertion-heavy hypotheses can exceed 100%.
double wer(const AlignmentCounts& counts);

struct SeedAggregate {
    std::vector<double> per_seed_wer;
    double mean = 0.0;
    double std_error = 0.0;  // sample stddev / sqrt(n); 0 when n = 1
};

SeedAggregate aggregate_seeds(std::span<const double> per_seed,
                              bool population_stddev = false);

// 100 * (base - new) / base; negative when the new system is worse.
// Throws ZeroBaseline.
double relative_improvement(double base_wer, double new_wer);

struct ReportRow {
    std::string model;
    int dataset_size = 1;
    std::vector<std::pair<std::string, SeedAggregate>> cells;  // column -> value
};

struct Report {
    std::string text_table;
    std::string csv;
};

// Renders "mean +- SE" cells with two decimals in the column order of the
// first row. Throws ColumnMismatch when rows disagree on columns.
Report report_table(std::span<const ReportRow> rows);

}  // namespace mtr
