#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mtr/audio.hpp"

namespace mtr {

struct UtteranceRecord {
    std::string utterance_id;
    std::string audio_path;  // relative to the manifest location
    int sample_rate = 0;
    double duration_s = 0.0;
    std::string transcript;
};

using Manifest = std::vector<UtteranceRecord>;

enum class CorpusLayout {
    flat,          // <id>.wav next to <id>.txt, any directory depth
    librispeech,   // speaker/chapter/<id>.wav with <spk>-<chap>.trans.txt
};

// Builds a manifest from a corpus directory, ordered by utterance_id.
// Throws MissingTranscript or DuplicateUtteranceId.
Manifest scan_corpus(const std::filesystem::path& root, CorpusLayout layout);

// Manifest file: UTF-8, one record per line, tab-separated:
// utterance_id, relative audio path, sample_rate, duration_s (6 decimals),
// transcript.
std::string render_manifest(const Manifest& manifest);
Manifest parse_manifest(std::string_view text);
Manifest load_manifest(const std::filesystem::path& file);
void save_manifest(const std::filesystem::path& file, const Manifest& manifest);

// ---------------------------------------------------------------------
// Style algebra: one StyleSpec describes how one full corpus copy is
// perturbed; a DatasetSpec is an ordered union of such copies.

struct NoiseStyle {
    std::string corpus;  // noise corpus name, resolved via configuration
    double snr_db = 5.0;

    bool operator==(const NoiseStyle&) const = default;
};

struct StyleSpec {
    std::optional<int> resample_to;     // Hz
    std::optional<NoiseStyle> noise;
    std::optional<double> speed;        // magnitude, e.g. 0.10 for +-10%
    std::optional<double> volume;       // magnitude, e.g. 0.20 for +-20%
    bool encode = false;                // WAV49

    bool operator==(const StyleSpec&) const = default;
};

// Style token grammar: plain | e | s | v | sv | 8k | 16k |
// noise(<corpus>,<snr>) | s(<magnitude>) | v(<magnitude>).
// Bare s and v use the 0.1 / 0.2 presets.
StyleSpec apply_style_token(const StyleSpec& base, std::string_view token);
std::string render_style(const StyleSpec& style);   // canonical form
StyleSpec parse_style(std::string_view text);       // accepts '+'-joined tokens

struct DatasetSpec {
    std::string name;
    std::string base_manifest;       // path, relative to the dataset spec file
    std::vector<StyleSpec> copies;   // copy 0 is the base style

    std::size_t size() const { return copies.size(); }
    bool operator==(const DatasetSpec&) const = default;
};

// Union semantics: the styled base is copy 1, every token appends one
// more perturbed copy. Throws UnknownStyleToken.
DatasetSpec compose_dataset(const std::string& name, const std::string& base_manifest,
                            const StyleSpec& base_style,
                            std::span<const std::string> tokens);

// Key-value serialization; render + parse round-trip byte-identically.
std::string render_dataset_spec(const DatasetSpec& spec);
DatasetSpec parse_dataset_spec(std::string_view text);

// ---------------------------------------------------------------------
// Materialization.

struct MaterializeOptions {
    std::filesystem::path output_root;
    uint64_t seed = 0;
    int workers = 1;
    int64_t max_errors = 0;  // fail the pipeline above this many per-utterance errors
    // noise corpus name -> directory of mono WAV files
    std::map<std::string, std::filesystem::path> noise_corpora;
    std::filesystem::path manifest_base;  // resolves relative audio paths
};

struct CopyMetrics {
    std::string style;
    int64_t utterances = 0;
    int64_t clipped_samples = 0;
    double duration_s = 0.0;
};

struct MaterializeResult {
    Manifest manifest;
    std::vector<CopyMetrics> per_copy;
    int64_t clipped_samples = 0;
    // one TSV line per output: output id, source id, copy index, style,
    // noise file, noise offset, speed factor, volume factor, clipped
    std::vector<std::string> provenance;
    std::vector<std::string> errors;  // per-utterance error ledger
};

// Writes one audio tree per copy plus manifest.tsv under
// options.output_root / spec.name. Fully deterministic for a fixed seed:
// every utterance derives its own RNG stream from (seed, output id), so
// the worker count cannot change any output byte.
MaterializeResult materialize(const DatasetSpec& spec, const Manifest& base,
                              const MaterializeOptions& options);

}  // namespace mtr
