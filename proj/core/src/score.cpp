#include "mtr/score.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

#include "mtr/errors.hpp"

namespace mtr {

std::vector<std::string> normalize_transcript(std::string_view text,
                                              std::string_view punctuation) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!current.empty()) {
                tokens.push_back(std::move(current));
                current.clear();
            }
            continue;
        }
        if (punctuation.find(c) != std::string_view::npos)
            continue;
        current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (!current.empty())
        tokens.push_back(std::move(current));
    return tokens;
}

AlignmentCounts align(std::span<const std::string> ref, std::span<const std::string> hyp) {
    const std::size_t n = ref.size();
    const std::size_t m = hyp.size();

    // cost[i][j] = edits to align ref[i..n) with hyp[j..m)
    std::vector<int32_t> cost((n + 1) * (m + 1));
    auto at = [m](std::size_t i, std::size_t j) { return i * (m + 1) + j; };

    for (std::size_t j = 0; j <= m; ++j)
        cost[at(n, j)] = static_cast<int32_t>(m - j);
    for (std::size_t i = n; i-- > 0;) {
        cost[at(i, m)] = static_cast<int32_t>(n - i);
        for (std::size_t j = m; j-- > 0;) {
            int32_t sub = cost[at(i + 1, j + 1)] + (ref[i] == hyp[j] ? 0 : 1);
            int32_t ins = cost[at(i, j + 1)] + 1;
            int32_t del = cost[at(i + 1, j)] + 1;
            cost[at(i, j)] = std::min(sub, std::min(ins, del));
        }
    }

    // walk from the front; on equal-cost continuations prefer substitution,
    // then insertion, then deletion
    AlignmentCounts counts;
    std::size_t i = 0, j = 0;
    while (i < n || j < m) {
        int32_t target = cost[at(i, j)];
        if (i < n && j < m && (ref[i] == hyp[j] ? 0 : 1) + cost[at(i + 1, j + 1)] == target) {
            if (ref[i] == hyp[j]) ++counts.correct;
            else ++counts.substitutions;
            ++i;
            ++j;
        } else if (j < m && 1 + cost[at(i, j + 1)] == target) {
            ++counts.insertions;
            ++j;
        } else {
            ++counts.deletions;
            ++i;
        }
    }
    return counts;
}

double wer(const AlignmentCounts& counts) {
    const int64_t n = counts.reference_length();
    if (n == 0)
        throw_format("EmptyReference", "WER undefined for an empty reference");
    return 100.0 * static_cast<double>(counts.errors()) / static_cast<double>(n);
}

SeedAggregate aggregate_seeds(std::span<const double> per_seed, bool population_stddev) {
    if (per_seed.empty())
        throw_format("EmptyList", "no per-seed WERs to aggregate");
    SeedAggregate agg;
    agg.per_seed_wer.assign(per_seed.begin(), per_seed.end());

    const double n = static_cast<double>(per_seed.size());
    double sum = 0.0;
    for (double v : per_seed) sum += v;
    agg.mean = sum / n;

    if (per_seed.size() > 1) {
        double sq = 0.0;
        for (double v : per_seed) sq += (v - agg.mean) * (v - agg.mean);
        double denom = population_stddev ? n : n - 1.0;
        agg.std_error = std::sqrt(sq / denom) / std::sqrt(n);
    }
    return agg;
}

double relative_improvement(double base_wer, double new_wer) {
    if (base_wer == 0.0)
        throw_format("ZeroBaseline", "relative improvement undefined for a 0% baseline");
    return 100.0 * (base_wer - new_wer) / base_wer;
}

namespace {

std::string format_cell(const SeedAggregate& agg) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f ± %.2f", agg.mean, agg.std_error);
    return buf;
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

Report report_table(std::span<const ReportRow> rows) {
    std::vector<std::string> columns;
    if (!rows.empty())
        for (const auto& [name, agg] : rows.front().cells)
            columns.push_back(name);

    for (const auto& row : rows) {
        if (row.cells.size() != columns.size())
            throw_format("ColumnMismatch", "row '" + row.model + "' has " +
                                               std::to_string(row.cells.size()) +
                                               " cells, expected " +
                                               std::to_string(columns.size()));
        for (std::size_t c = 0; c < columns.size(); ++c)
            if (row.cells[c].first != columns[c])
                throw_format("ColumnMismatch", "row '" + row.model + "' column '" +
                                                   row.cells[c].first + "' does not match '" +
                                                   columns[c] + "'");
    }

    // column widths for the text rendering
    std::vector<std::string> headers = {"Model", "Size"};
    headers.insert(headers.end(), columns.begin(), columns.end());
    std::vector<std::size_t> widths(headers.size());
    for (std::size_t c = 0; c < headers.size(); ++c) widths[c] = headers[c].size();

    std::vector<std::vector<std::string>> body;
    for (const auto& row : rows) {
        std::vector<std::string> line = {row.model, std::to_string(row.dataset_size)};
        for (const auto& [name, agg] : row.cells)
            line.push_back(format_cell(agg));
        for (std::size_t c = 0; c < line.size(); ++c) {
            // the +- sign is two bytes of UTF-8 but one column
            std::size_t display = line[c].size() - (c >= 2 ? 1 : 0);
            widths[c] = std::max(widths[c], display);
        }
        body.push_back(std::move(line));
    }

    std::string text;
    for (std::size_t c = 0; c < headers.size(); ++c) {
        text += headers[c];
        if (c + 1 < headers.size())
            text.append(widths[c] - headers[c].size() + 2, ' ');
    }
    text += '\n';
    for (const auto& line : body) {
        for (std::size_t c = 0; c < line.size(); ++c) {
            text += line[c];
            if (c + 1 < line.size()) {
                std::size_t display = line[c].size() - (c >= 2 ? 1 : 0);
                text.append(widths[c] - display + 2, ' ');
            }
        }
        text += '\n';
    }

    std::string csv = "model,size";
    for (const auto& col : columns)
        csv += "," + csv_quote(col + " mean") + "," + csv_quote(col + " se");
    csv += '\n';
    for (const auto& row : rows) {
        csv += csv_quote(row.model) + "," + std::to_string(row.dataset_size);
        for (const auto& [name, agg] : row.cells) {
            char buf[64];
            std::snprintf(buf, sizeof buf, ",%.2f,%.2f", agg.mean, agg.std_error);
            csv += buf;
        }
        csv += '\n';
    }

    return {std::move(text), std::move(csv)};
}

}  // namespace mtr
