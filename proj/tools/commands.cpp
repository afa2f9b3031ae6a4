#include "commands.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <variant>

#include <json.hpp>

#include "mtr/audio.hpp"
#include "mtr/augment.hpp"
#include "mtr/corpus.hpp"
#include "mtr/errors.hpp"
#include "mtr/io.hpp"
#include "mtr/resample.hpp"
#include "mtr/score.hpp"
#include "mtr/wav49.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace mtr::cli {

namespace {

std::string fnv1a_hex(const std::string& bytes) {
    uint64_t h = 0xCBF29CE484222325ull;
    for (char c : bytes) {
        h ^= static_cast<uint8_t>(c);
        h *= 0x100000001B3ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

int resolved_workers(int configured) {
    if (const char* env = std::getenv("MTR_WORKERS")) {
        int value = std::atoi(env);
        if (value > 0) return value;
    }
    return configured;
}

AudioClip to_pcm_clip(ParsedWav parsed) {
    if (std::holds_alternative<AudioClip>(parsed))
        return std::get<AudioClip>(std::move(parsed));
    return wav49_decode_payload(std::get<Wav49Payload>(parsed));
}

}  // namespace

PipelineConfig load_pipeline_config(const fs::path& file) {
    const std::string text = read_text_file(file);
    const fs::path base = file.has_parent_path() ? file.parent_path() : fs::path(".");

    PipelineConfig config;
    config.config_hash = fnv1a_hex(text);

    std::istringstream lines(text);
    std::string line;
    int line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream fields(line);
        std::string key;
        fields >> key;
        auto fail = [&](const std::string& why) {
            throw_config("ConfigError",
                         file.string() + ":" + std::to_string(line_no) + ": " + why);
        };
        if (key == "seed") {
            uint64_t v;
            if (!(fields >> v)) fail("seed needs an unsigned integer");
            config.seed = v;
            config.seed_set = true;
        } else if (key == "workers") {
            if (!(fields >> config.workers) || config.workers < 1)
                fail("workers needs a positive integer");
        } else if (key == "max_errors") {
            if (!(fields >> config.max_errors) || config.max_errors < 0)
                fail("max_errors needs a non-negative integer");
        } else if (key == "output_root") {
            std::string path;
            if (!(fields >> path)) fail("output_root needs a path");
            config.output_root = base / path;
        } else if (key == "noise_corpus") {
            std::string name, path;
            if (!(fields >> name >> path)) fail("noise_corpus needs a name and a path");
            config.noise_corpora[name] = base / path;
        } else if (key == "dataset") {
            std::string path;
            if (!(fields >> path)) fail("dataset needs a path");
            config.dataset_files.push_back(base / path);
        } else {
            fail("unknown key '" + key + "'");
        }
    }
    if (config.output_root.empty()) config.output_root = base / "out";
    return config;
}

int cmd_transcode(const TranscodeArgs& args) {
    auto bytes = read_file(args.input);
    auto [parsed, meta] = parse_wav(bytes);

    std::vector<uint8_t> out_bytes;
    double in_duration, out_duration;
    uint32_t pcm_bytes = 0, payload_bytes = 0;

    AudioClip clip = to_pcm_clip(std::move(parsed));
    in_duration = meta.format_tag == kFormatGsm610
                      ? static_cast<double>(meta.fact_samples.value_or(0)) / meta.sample_rate
                      : clip.duration_seconds();

    if (args.codec == "wav49") {
        clip = downmix_to_mono(clip);
        int rate = args.rate.value_or(8000);
        if (rate != 8000)
            throw_config("ConfigError", "WAV49 output is 8 kHz only");
        if (clip.sample_rate != 8000) clip = resample(clip, 8000);
        pcm_bytes = static_cast<uint32_t>(clip.samples.size() * 2);
        out_bytes = wav49_encode(clip);
        auto [reparsed, out_meta] = parse_wav(out_bytes);
        payload_bytes = out_meta.data_bytes;
        out_duration = clip.duration_seconds();
    } else if (args.codec == "pcm") {
        if (args.rate && *args.rate != clip.sample_rate) {
            clip = downmix_to_mono(clip);
            clip = resample(clip, *args.rate);
        }
        out_bytes = write_wav(clip);
        out_duration = clip.duration_seconds();
        pcm_bytes = static_cast<uint32_t>(clip.samples.size() * 2);
        payload_bytes = meta.format_tag == kFormatGsm610 ? meta.data_bytes : 0;
    } else {
        throw_config("ConfigError", "codec must be 'wav49' or 'pcm'");
    }

    write_file(args.output, out_bytes);

    std::printf("input:    %s (%zu bytes, %.3f s)\n", args.input.c_str(), bytes.size(),
                in_duration);
    std::printf("output:   %s (%zu bytes, %.3f s)\n", args.output.c_str(), out_bytes.size(),
                out_duration);
    if (payload_bytes > 0)
        std::printf("ratio:    %.3f:1 (PCM %u bytes vs GSM payload %u bytes)\n",
                    static_cast<double>(pcm_bytes) / payload_bytes, pcm_bytes, payload_bytes);
    return kExitOk;
}

int cmd_materialize(const MaterializeArgs& args) {
    PipelineConfig config = load_pipeline_config(args.config);
    if (args.seed) {
        config.seed = *args.seed;
        config.seed_set = true;
    }
    if (args.workers) config.workers = *args.workers;
    if (args.output_root) config.output_root = *args.output_root;
    if (!config.seed_set)
        throw_config("ConfigError", "a seed is required: set 'seed' or pass --seed");

    std::optional<DatasetSpec> spec;
    fs::path spec_dir;
    for (const auto& file : config.dataset_files) {
        DatasetSpec candidate = parse_dataset_spec(read_text_file(file));
        if (candidate.name == args.dataset) {
            spec = std::move(candidate);
            spec_dir = file.has_parent_path() ? file.parent_path() : fs::path(".");
            break;
        }
    }
    if (!spec)
        throw_config("ConfigError",
                     "dataset '" + args.dataset + "' is not defined by the config");

    const fs::path manifest_path = spec_dir / spec->base_manifest;
    Manifest base = load_manifest(manifest_path);

    // validate every referenced path before any work starts
    const fs::path audio_base =
        manifest_path.has_parent_path() ? manifest_path.parent_path() : fs::path(".");
    for (const auto& rec : base)
        if (!fs::exists(audio_base / rec.audio_path))
            throw_io("IoError", "audio for utterance '" + rec.utterance_id +
                                    "' missing: " + (audio_base / rec.audio_path).string());
    for (const auto& copy : spec->copies)
        if (copy.noise && !config.noise_corpora.count(copy.noise->corpus))
            throw_config("ConfigError",
                         "noise corpus '" + copy.noise->corpus + "' is not configured");

    MaterializeOptions options;
    options.output_root = config.output_root;
    options.seed = config.seed;
    options.workers = resolved_workers(config.workers);
    options.noise_corpora = config.noise_corpora;
    options.manifest_base =
        manifest_path.has_parent_path() ? manifest_path.parent_path() : fs::path(".");
    options.max_errors = std::numeric_limits<int64_t>::max();  // ledger first, verdict below

    MaterializeResult result = materialize(*spec, base, options);

    const fs::path dataset_root = config.output_root / spec->name;
    json metrics;
    metrics["dataset"] = spec->name;
    metrics["seed"] = config.seed;
    metrics["config_hash"] = config.config_hash;
    metrics["utterances"] = result.manifest.size();
    metrics["clipped_samples"] = result.clipped_samples;
    metrics["copies"] = json::array();
    for (const auto& copy : result.per_copy)
        metrics["copies"].push_back({{"style", copy.style},
                                     {"utterances", copy.utterances},
                                     {"clipped_samples", copy.clipped_samples},
                                     {"duration_s", copy.duration_s}});
    metrics["errors"] = result.errors;
    write_text_file(dataset_root / "metrics.json", metrics.dump(2) + "\n");

    std::string provenance =
        "output_id\tsource_id\tcopy\tstyle\tnoise_file\tnoise_offset\tspeed\tvolume\tclipped\n";
    for (const auto& line : result.provenance) provenance += line + "\n";
    write_text_file(dataset_root / "provenance.tsv", provenance);

    std::printf("dataset:  %s (%zu copies, %zu utterances)\n", spec->name.c_str(),
                spec->copies.size(), result.manifest.size());
    for (const auto& copy : result.per_copy)
        std::printf("  %-40s %6" PRId64 " utts  %9.2f s  %8" PRId64 " clipped\n",
                    copy.style.c_str(), copy.utterances, copy.duration_s,
                    copy.clipped_samples);
    std::printf("manifest: %s\n", (dataset_root / "manifest.tsv").c_str());

    if (static_cast<int64_t>(result.errors.size()) > config.max_errors) {
        std::fprintf(stderr, "ErrorThreshold: %zu utterances failed (limit %" PRId64 ")\n",
                     result.errors.size(), config.max_errors);
        for (const auto& e : result.errors) std::fprintf(stderr, "  %s\n", e.c_str());
        return kExitThreshold;
    }
    return kExitOk;
}

namespace {

std::map<std::string, std::string> load_transcripts(const fs::path& file) {
    std::map<std::string, std::string> out;
    std::istringstream lines(read_text_file(file));
    std::string line;
    int line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto first_tab = line.find('\t');
        if (first_tab == std::string::npos || first_tab == 0)
            throw_format("MalformedManifest", file.string() + ":" + std::to_string(line_no) +
                                                  ": expected id<TAB>...<TAB>transcript");
        auto last_tab = line.rfind('\t');
        out[line.substr(0, first_tab)] = line.substr(last_tab + 1);
    }
    return out;
}

}  // namespace

int cmd_score(const ScoreArgs& args) {
    if (args.hypotheses.empty())
        throw_config("ConfigError", "at least one hypothesis file is required");

    auto ref = load_transcripts(args.reference);
    if (ref.empty())
        throw_format("EmptyReference", "no utterances in " + args.reference.string());

    std::vector<double> per_seed;
    std::string text, csv = "hypothesis,wer,substitutions,deletions,insertions,reference_words\n";
    for (const auto& hyp_file : args.hypotheses) {
        auto hyp = load_transcripts(hyp_file);
        AlignmentCounts total;
        for (const auto& [id, ref_text] : ref) {
            auto it = hyp.find(id);
            if (it == hyp.end() && !args.missing_as_deletion)
                throw_format("MissingUtterance",
                             "utterance '" + id + "' missing from " + hyp_file.string() +
                                 " (use --missing-as-deletion to score it as deleted)");
            auto ref_tokens = normalize_transcript(ref_text);
            auto hyp_tokens =
                it == hyp.end() ? std::vector<std::string>{} : normalize_transcript(it->second);
            total += align(ref_tokens, hyp_tokens);
        }
        double seed_wer = wer(total);
        per_seed.push_back(seed_wer);

        char buf[256];
        std::snprintf(buf, sizeof buf, "%-30s WER %6.2f%%  (S %" PRId64 "  D %" PRId64
                                       "  I %" PRId64 "  N %" PRId64 ")\n",
                      hyp_file.filename().c_str(), seed_wer, total.substitutions,
                      total.deletions, total.insertions, total.reference_length());
        text += buf;
        std::snprintf(buf, sizeof buf, "%s,%.4f,%" PRId64 ",%" PRId64 ",%" PRId64 ",%" PRId64 "\n",
                      hyp_file.filename().c_str(), seed_wer, total.substitutions,
                      total.deletions, total.insertions, total.reference_length());
        csv += buf;
    }

    auto agg = aggregate_seeds(per_seed);
    char buf[160];
    std::snprintf(buf, sizeof buf, "aggregate over %zu seed%s: %.2f ± %.2f\n",
                  per_seed.size(), per_seed.size() == 1 ? "" : "s", agg.mean, agg.std_error);
    text += buf;
    std::snprintf(buf, sizeof buf, "aggregate,%.4f,,,,\naggregate_se,%.4f,,,,\n", agg.mean,
                  agg.std_error);
    csv += buf;

    if (args.baseline_wer) {
        double rel = relative_improvement(*args.baseline_wer, agg.mean);
        std::snprintf(buf, sizeof buf, "relative improvement vs %.2f baseline: %.1f%%\n",
                      *args.baseline_wer, rel);
        text += buf;
        std::snprintf(buf, sizeof buf, "relative_improvement,%.4f,,,,\n", rel);
        csv += buf;
    }

    std::fputs(text.c_str(), stdout);
    write_text_file(fs::path(args.output.string() + ".txt"), text);
    write_text_file(fs::path(args.output.string() + ".csv"), csv);
    return kExitOk;
}

int cmd_inspect(const fs::path& file) {
    auto bytes = read_file(file);
    auto [parsed, meta] = parse_wav(bytes);

    const char* kind = meta.format_tag == kFormatPcm ? "PCM" : "GSM 6.10 (WAV49)";
    std::printf("file:             %s\n", file.c_str());
    std::printf("format_tag:       0x%04x (%s)\n", meta.format_tag, kind);
    std::printf("channels:         %d\n", meta.channels);
    std::printf("sample_rate:      %d\n", meta.sample_rate);
    std::printf("bits_per_sample:  %d\n", meta.bits_per_sample);
    std::printf("block_align:      %d\n", meta.block_align);
    std::printf("data_bytes:       %u\n", meta.data_bytes);
    if (meta.fact_samples)
        std::printf("fact_samples:     %u\n", *meta.fact_samples);
    std::printf("trailing_chunks:  %d\n", meta.trailing_chunks);
    if (std::holds_alternative<AudioClip>(parsed)) {
        const auto& clip = std::get<AudioClip>(parsed);
        std::printf("duration_s:       %.6f\n", clip.duration_seconds());
    } else {
        const auto& payload = std::get<Wav49Payload>(parsed);
        std::printf("blocks:           %zu\n", payload.blocks.size() / kWav49BlockBytes);
        std::printf("duration_s:       %.6f\n",
                    static_cast<double>(payload.fact_samples) / payload.sample_rate);
    }
    return kExitOk;
}

}  // namespace mtr::cli
