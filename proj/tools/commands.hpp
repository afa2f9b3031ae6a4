#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mtr::cli {

// Exit code partition: 0 success, 1 usage, then one class per failure kind.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitFormat = 4;
constexpr int kExitThreshold = 5;

struct PipelineConfig {
    uint64_t seed = 0;
    bool seed_set = false;
    int workers = 1;
    int64_t max_errors = 0;
    std::filesystem::path output_root;
    std::map<std::string, std::filesystem::path> noise_corpora;
    std::vector<std::filesystem::path> dataset_files;
    std::string config_hash;  // FNV-1a of the raw config bytes, hex
};

PipelineConfig load_pipeline_config(const std::filesystem::path& file);

struct TranscodeArgs {
    std::filesystem::path input;
    std::filesystem::path output;
    std::string codec;  // "wav49" or "pcm"
    std::optional<int> rate;
};

struct MaterializeArgs {
    std::filesystem::path config;
    std::string dataset;
    std::optional<uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::filesystem::path> output_root;
};

struct ScoreArgs {
    std::filesystem::path reference;
    std::vector<std::filesystem::path> hypotheses;
    std::filesystem::path output;  // report stem; .txt and .csv are added
    std::optional<double> baseline_wer;
    bool missing_as_deletion = false;
};

int cmd_transcode(const TranscodeArgs& args);
int cmd_materialize(const MaterializeArgs& args);
int cmd_score(const ScoreArgs& args);
int cmd_inspect(const std::filesystem::path& file);

}  // namespace mtr::cli
