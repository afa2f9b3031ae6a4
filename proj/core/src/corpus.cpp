#include "mtr/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <thread>
#include <variant>

#include "mtr/augment.hpp"
#include "mtr/errors.hpp"
#include "mtr/io.hpp"
#include "mtr/resample.hpp"
#include "mtr/wav49.hpp"

namespace fs = std::filesystem;

namespace mtr {

namespace {

std::string collapse_whitespace(std::string_view text) {
    std::string out;
    bool in_space = true;  // also trims leading whitespace
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty()) out += ' ';
        in_space = false;
        out += c;
    }
    return out;
}

std::pair<int, double> probe_audio(const fs::path& file) {
    auto bytes = read_file(file);
    auto [parsed, meta] = parse_wav(bytes);
    if (std::holds_alternative<AudioClip>(parsed)) {
        const auto& clip = std::get<AudioClip>(parsed);
        return {clip.sample_rate, clip.duration_seconds()};
    }
    const auto& payload = std::get<Wav49Payload>(parsed);
    return {payload.sample_rate,
            static_cast<double>(payload.fact_samples) / payload.sample_rate};
}

void check_duplicates(const Manifest& manifest) {
    for (std::size_t i = 1; i < manifest.size(); ++i)
        if (manifest[i].utterance_id == manifest[i - 1].utterance_id)
            throw_format("DuplicateUtteranceId",
                         "utterance id '" + manifest[i].utterance_id + "' appears twice");
}

Manifest scan_flat(const fs::path& root) {
    Manifest manifest;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".wav")
            continue;
        fs::path txt = entry.path();
        txt.replace_extension(".txt");
        if (!fs::exists(txt))
            throw_io("MissingTranscript", "no transcript next to " + entry.path().string());
        UtteranceRecord rec;
        rec.utterance_id = entry.path().stem().string();
        rec.audio_path = fs::relative(entry.path(), root).generic_string();
        rec.transcript = collapse_whitespace(read_text_file(txt));
        std::tie(rec.sample_rate, rec.duration_s) = probe_audio(entry.path());
        manifest.push_back(std::move(rec));
    }
    return manifest;
}

Manifest scan_librispeech(const fs::path& root) {
    // <speaker>/<chapter>/<id>.wav with transcripts collected in
    // <speaker>-<chapter>.trans.txt, one "<id> <words...>" line each
    std::map<std::string, std::string> transcripts;
    std::vector<fs::path> wavs;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        const auto name = entry.path().filename().string();
        if (entry.path().extension() == ".wav") {
            wavs.push_back(entry.path());
        } else if (name.size() > 10 && name.ends_with(".trans.txt")) {
            std::istringstream lines(read_text_file(entry.path()));
            std::string line;
            while (std::getline(lines, line)) {
                auto space = line.find(' ');
                if (space == std::string::npos || space == 0) continue;
                transcripts[line.substr(0, space)] =
                    collapse_whitespace(line.substr(space + 1));
            }
        }
    }
    Manifest manifest;
    for (const auto& wav : wavs) {
        UtteranceRecord rec;
        rec.utterance_id = wav.stem().string();
        auto it = transcripts.find(rec.utterance_id);
        if (it == transcripts.end())
            throw_io("MissingTranscript",
                     "no .trans.txt entry for utterance '" + rec.utterance_id + "'");
        rec.audio_path = fs::relative(wav, root).generic_string();
        rec.transcript = it->second;
        std::tie(rec.sample_rate, rec.duration_s) = probe_audio(wav);
        manifest.push_back(std::move(rec));
    }
    return manifest;
}

}  // namespace

Manifest scan_corpus(const fs::path& root, CorpusLayout layout) {
    if (!fs::is_directory(root))
        throw_io("IoError", root.string() + " is not a readable directory");
    Manifest manifest =
        layout == CorpusLayout::flat ? scan_flat(root) : scan_librispeech(root);
    std::sort(manifest.begin(), manifest.end(),
              [](const auto& a, const auto& b) { return a.utterance_id < b.utterance_id; });
    check_duplicates(manifest);
    return manifest;
}

std::string render_manifest(const Manifest& manifest) {
    std::string out;
    char buf[64];
    for (const auto& rec : manifest) {
        std::snprintf(buf, sizeof buf, "%d\t%.6f", rec.sample_rate, rec.duration_s);
        out += rec.utterance_id;
        out += '\t';
        out += rec.audio_path;
        out += '\t';
        out += buf;
        out += '\t';
        out += rec.transcript;
        out += '\n';
    }
    return out;
}

Manifest parse_manifest(std::string_view text) {
    Manifest manifest;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos < text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (line.empty()) continue;

        std::vector<std::string> fields;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == '\t') {
                fields.emplace_back(line.substr(start, i - start));
                start = i + 1;
            }
        }
        if (fields.size() != 5)
            throw_format("MalformedManifest", "line " + std::to_string(line_no) + " has " +
                                                  std::to_string(fields.size()) +
                                                  " fields, expected 5");
        UtteranceRecord rec;
        rec.utterance_id = fields[0];
        rec.audio_path = fields[1];
        try {
            rec.sample_rate = std::stoi(fields[2]);
            rec.duration_s = std::stod(fields[3]);
        } catch (const std::exception&) {
            throw_format("MalformedManifest",
                         "line " + std::to_string(line_no) + " has non-numeric fields");
        }
        rec.transcript = fields[4];
        manifest.push_back(std::move(rec));
    }
    Manifest sorted = manifest;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.utterance_id < b.utterance_id; });
    check_duplicates(sorted);
    return manifest;
}

Manifest load_manifest(const fs::path& file) { return parse_manifest(read_text_file(file)); }

void save_manifest(const fs::path& file, const Manifest& manifest) {
    write_text_file(file, render_manifest(manifest));
}

// ---------------------------------------------------------------------
// Style algebra.

namespace {

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

double parse_number(std::string_view s, std::string_view what) {
    try {
        std::size_t used = 0;
        double v = std::stod(std::string(s), &used);
        if (used != s.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw_config("UnknownStyleToken",
                     "cannot parse " + std::string(what) + " in '" + std::string(s) + "'");
    }
}

}  // namespace

StyleSpec apply_style_token(const StyleSpec& base, std::string_view token) {
    StyleSpec out = base;
    if (token == "plain") return out;
    if (token == "e") {
        out.encode = true;
        return out;
    }
    if (token == "8k") {
        out.resample_to = 8000;
        return out;
    }
    if (token == "16k") {
        out.resample_to = 16000;
        return out;
    }
    if (token == "s" || token == "v" || token == "sv" || token.starts_with("s(") ||
        token.starts_with("v(")) {
        if (token == "sv") {
            out.speed = 0.1;
            out.volume = 0.2;
            return out;
        }
        double magnitude = token[0] == 's' ? 0.1 : 0.2;
        if (token.size() > 1) {
            if (!token.ends_with(")"))
                throw_config("UnknownStyleToken", "unbalanced '" + std::string(token) + "'");
            magnitude = parse_number(token.substr(2, token.size() - 3), "magnitude");
        }
        if (!(magnitude > 0.0 && magnitude <= 0.5))
            throw_config("UnknownStyleToken",
                         "magnitude in '" + std::string(token) + "' must be in (0, 0.5]");
        if (token[0] == 's')
            out.speed = magnitude;
        else
            out.volume = magnitude;
        return out;
    }
    if (token.starts_with("noise(") && token.ends_with(")")) {
        std::string_view body = token.substr(6, token.size() - 7);
        auto comma = body.find(',');
        if (comma == std::string_view::npos || comma == 0)
            throw_config("UnknownStyleToken",
                         "'" + std::string(token) + "' needs noise(corpus,snr)");
        NoiseStyle noise;
        noise.corpus = std::string(body.substr(0, comma));
        noise.snr_db = parse_number(body.substr(comma + 1), "SNR");
        out.noise = noise;
        return out;
    }
    throw_config("UnknownStyleToken", "'" + std::string(token) + "'");
}

std::string render_style(const StyleSpec& style) {
    std::vector<std::string> parts;
    if (style.resample_to) {
        if (*style.resample_to == 8000)
            parts.push_back("8k");
        else if (*style.resample_to == 16000)
            parts.push_back("16k");
    }
    if (style.noise)
        parts.push_back("noise(" + style.noise->corpus + "," + format_number(style.noise->snr_db) +
                        ")");
    if (style.speed) parts.push_back("s(" + format_number(*style.speed) + ")");
    if (style.volume) parts.push_back("v(" + format_number(*style.volume) + ")");
    if (style.encode) parts.push_back("e");
    if (parts.empty()) return "plain";
    std::string out = parts[0];
    for (std::size_t i = 1; i < parts.size(); ++i) out += "+" + parts[i];
    return out;
}

StyleSpec parse_style(std::string_view text) {
    StyleSpec style;
    std::size_t pos = 0;
    int depth = 0;
    std::size_t start = 0;
    for (; pos <= text.size(); ++pos) {
        if (pos == text.size() || (text[pos] == '+' && depth == 0)) {
            std::string_view token = text.substr(start, pos - start);
            if (token.empty())
                throw_config("UnknownStyleToken", "empty token in '" + std::string(text) + "'");
            style = apply_style_token(style, token);
            start = pos + 1;
            continue;
        }
        if (text[pos] == '(') ++depth;
        if (text[pos] == ')') --depth;
    }
    return style;
}

DatasetSpec compose_dataset(const std::string& name, const std::string& base_manifest,
                            const StyleSpec& base_style, std::span<const std::string> tokens) {
    DatasetSpec spec;
    spec.name = name;
    spec.base_manifest = base_manifest;
    spec.copies.push_back(base_style);
    for (const auto& token : tokens)
        spec.copies.push_back(apply_style_token(base_style, token));
    return spec;
}

std::string render_dataset_spec(const DatasetSpec& spec) {
    std::string out;
    out += "name " + spec.name + "\n";
    out += "base " + spec.base_manifest + "\n";
    for (const auto& copy : spec.copies)
        out += "copy " + render_style(copy) + "\n";
    return out;
}

DatasetSpec parse_dataset_spec(std::string_view text) {
    DatasetSpec spec;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos < text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (line.empty() || line[0] == '#') continue;

        auto space = line.find(' ');
        if (space == std::string_view::npos)
            throw_config("ConfigError",
                         "dataset spec line " + std::to_string(line_no) + " has no value");
        std::string_view key = line.substr(0, space);
        std::string_view value = line.substr(space + 1);
        if (key == "name")
            spec.name = std::string(value);
        else if (key == "base")
            spec.base_manifest = std::string(value);
        else if (key == "copy")
            spec.copies.push_back(parse_style(value));
        else
            throw_config("ConfigError", "unknown dataset spec key '" + std::string(key) + "'");
    }
    if (spec.name.empty())
        throw_config("ConfigError", "dataset spec must set a name");
    if (spec.copies.empty())
        throw_config("ConfigError", "dataset spec '" + spec.name + "' has no copies");
    return spec;
}

// ---------------------------------------------------------------------
// Materialization.

namespace {

// deterministic id suffix for copy k: the tokens it adds over copy 0
std::string style_delta_token(const StyleSpec& base, const StyleSpec& copy) {
    std::vector<std::string> parts;
    if (copy.resample_to != base.resample_to && copy.resample_to)
        parts.push_back(*copy.resample_to == 16000 ? "16k" : "8k");
    if (copy.noise != base.noise && copy.noise)
        parts.push_back("noise(" + copy.noise->corpus + "," +
                        format_number(copy.noise->snr_db) + ")");
    bool added_speed = copy.speed && copy.speed != base.speed;
    bool added_volume = copy.volume && copy.volume != base.volume;
    if (added_speed && added_volume)
        parts.push_back("sv");
    else if (added_speed)
        parts.push_back("s");
    else if (added_volume)
        parts.push_back("v");
    if (copy.encode && !base.encode) parts.push_back("e");
    if (parts.empty()) return "plain";
    std::string out = parts[0];
    for (std::size_t i = 1; i < parts.size(); ++i) out += "+" + parts[i];
    return out;
}

bool is_passthrough(const StyleSpec& style) {
    return !style.resample_to && !style.noise && !style.speed && !style.volume && !style.encode;
}

struct NoiseBank {
    std::vector<std::string> names;   // file names, sorted
    std::vector<AudioClip> clips;
};

struct UtteranceOutput {
    UtteranceRecord row;
    std::string provenance;  // one TSV line, empty when the task failed
    std::string error;
    int64_t clipped = 0;
    int copy_index = 0;
};

}  // namespace

MaterializeResult materialize(const DatasetSpec& spec, const Manifest& base,
                              const MaterializeOptions& options) {
    const fs::path dataset_root = options.output_root / spec.name;
    fs::create_directories(dataset_root);

    // preload every noise corpus referenced by some copy
    std::map<std::string, NoiseBank> banks;
    for (const auto& copy : spec.copies) {
        if (!copy.noise || banks.count(copy.noise->corpus)) continue;
        auto it = options.noise_corpora.find(copy.noise->corpus);
        if (it == options.noise_corpora.end())
            throw_config("ConfigError",
                         "noise corpus '" + copy.noise->corpus + "' is not configured");
        NoiseBank bank;
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(it->second))
            if (entry.is_regular_file() && entry.path().extension() == ".wav")
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            auto [parsed, meta] = parse_wav(read_file(f));
            if (!std::holds_alternative<AudioClip>(parsed))
                throw_config("ConfigError", "noise file " + f.string() + " is not PCM");
            bank.clips.push_back(std::get<AudioClip>(std::move(parsed)));
            bank.names.push_back(f.filename().string());
        }
        if (bank.clips.empty())
            throw_config("ConfigError",
                         "noise corpus '" + copy.noise->corpus + "' has no wav files");
        banks.emplace(copy.noise->corpus, std::move(bank));
    }

    std::vector<std::string> suffixes(spec.copies.size());
    for (std::size_t k = 1; k < spec.copies.size(); ++k) {
        suffixes[k] = "#" + style_delta_token(spec.copies[0], spec.copies[k]);
        for (std::size_t p = 1; p < k; ++p)
            if (suffixes[p] == suffixes[k])
                suffixes[k] += "~" + std::to_string(k);  // duplicate style copies
    }
    for (std::size_t k = 0; k < spec.copies.size(); ++k)
        fs::create_directories(dataset_root / ("copy" + std::to_string(k)));

    const std::size_t total = spec.copies.size() * base.size();
    std::vector<UtteranceOutput> outputs(total);
    std::atomic<std::size_t> next{0};

    auto run_task = [&](std::size_t task) {
        const std::size_t k = task / base.size();
        const UtteranceRecord& src = base[task % base.size()];
        const StyleSpec& style = spec.copies[k];
        UtteranceOutput& out = outputs[task];
        out.copy_index = static_cast<int>(k);

        const std::string out_id = src.utterance_id + suffixes[k];
        const fs::path out_rel =
            fs::path("copy" + std::to_string(k)) / (src.utterance_id + ".wav");
        const fs::path out_abs = dataset_root / out_rel;

        try {
            const fs::path in_path = options.manifest_base / src.audio_path;
            auto bytes = read_file(in_path);

            std::string noise_file = "-";
            std::string noise_offset = "-";
            std::string speed_factor = "-";
            std::string volume_factor = "-";

            if (is_passthrough(style)) {
                write_file(out_abs, bytes);
                auto [rate, duration] = probe_audio(in_path);
                out.row = {out_id, out_rel.generic_string(), rate, duration, src.transcript};
            } else {
                auto [parsed, meta] = parse_wav(bytes);
                AudioClip clip = std::holds_alternative<AudioClip>(parsed)
                                     ? std::get<AudioClip>(std::move(parsed))
                                     : wav49_decode_payload(std::get<Wav49Payload>(parsed));
                clip = downmix_to_mono(clip);

                Rng rng(derive_stream_seed(options.seed, out_id));

                if (style.resample_to)
                    clip = resample(clip, *style.resample_to);
                if (style.noise) {
                    const NoiseBank& bank = banks.at(style.noise->corpus);
                    uint64_t pick = rng.next_below(bank.clips.size());
                    auto mixed = mix_noise(clip, bank.clips[pick],
                                           SnrTarget{style.noise->snr_db}, rng);
                    clip = std::move(mixed.clip);
                    out.clipped += mixed.clipped;
                    noise_file = bank.names[pick];
                    noise_offset = std::to_string(mixed.noise_offset);
                }
                if (style.speed && style.volume) {
                    // fused: one rounding for the pair, speed-then-volume order
                    double sf = rng.next_bool() ? 1.0 + *style.speed : 1.0 - *style.speed;
                    double vf = rng.next_bool() ? 1.0 + *style.volume : 1.0 - *style.volume;
                    auto fused = perturb_speed_volume(clip, sf, vf);
                    clip = std::move(fused.clip);
                    out.clipped += fused.clipped;
                    speed_factor = format_number(sf);
                    volume_factor = format_number(vf);
                } else if (style.speed) {
                    double factor = rng.next_bool() ? 1.0 + *style.speed : 1.0 - *style.speed;
                    clip = perturb_speed(clip, factor);
                    speed_factor = format_number(factor);
                } else if (style.volume) {
                    double factor = rng.next_bool() ? 1.0 + *style.volume : 1.0 - *style.volume;
                    auto gained = perturb_volume(clip, factor);
                    clip = std::move(gained.clip);
                    out.clipped += gained.clipped;
                    volume_factor = format_number(factor);
                }

                std::vector<uint8_t> encoded;
                int out_rate = clip.sample_rate;
                double duration;
                if (style.encode) {
                    if (clip.sample_rate != 8000) clip = resample(clip, 8000);
                    out_rate = 8000;
                    duration = clip.duration_seconds();
                    encoded = wav49_encode(clip);
                } else {
                    duration = clip.duration_seconds();
                    encoded = write_wav(clip);
                }
                write_file(out_abs, encoded);
                out.row = {out_id, out_rel.generic_string(), out_rate, duration, src.transcript};
            }

            out.provenance = out_id + "\t" + src.utterance_id + "\t" + std::to_string(k) + "\t" +
                             render_style(style) + "\t" + noise_file + "\t" + noise_offset +
                             "\t" + speed_factor + "\t" + volume_factor + "\t" +
                             std::to_string(out.clipped);
        } catch (const std::exception& e) {
            out.error = out_id + ": " + e.what();
        }
    };

    const int workers = std::max(1, options.workers);
    if (workers == 1) {
        for (std::size_t t = 0; t < total; ++t) run_task(t);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t t = next.fetch_add(1); t < total; t = next.fetch_add(1))
                    run_task(t);
            });
        for (auto& th : pool) th.join();
    }

    MaterializeResult result;
    result.per_copy.resize(spec.copies.size());
    for (std::size_t k = 0; k < spec.copies.size(); ++k)
        result.per_copy[k].style = render_style(spec.copies[k]);

    for (auto& out : outputs) {
        if (!out.error.empty()) {
            result.errors.push_back(out.error);
            continue;
        }
        auto& metrics = result.per_copy[out.copy_index];
        ++metrics.utterances;
        metrics.clipped_samples += out.clipped;
        metrics.duration_s += out.row.duration_s;
        result.clipped_samples += out.clipped;
        result.manifest.push_back(std::move(out.row));
        result.provenance.push_back(std::move(out.provenance));
    }
    std::sort(result.manifest.begin(), result.manifest.end(),
              [](const auto& a, const auto& b) { return a.utterance_id < b.utterance_id; });
    std::sort(result.provenance.begin(), result.provenance.end());
    std::sort(result.errors.begin(), result.errors.end());

    for (const auto& rec : result.manifest)
        if (rec.sample_rate != result.manifest.front().sample_rate)
            throw_config("MixedRateDataset",
                         "dataset '" + spec.name + "' mixes " +
                             std::to_string(result.manifest.front().sample_rate) + " and " +
                             std::to_string(rec.sample_rate) + " Hz copies");

    save_manifest(dataset_root / "manifest.tsv", result.manifest);

    if (static_cast<int64_t>(result.errors.size()) > options.max_errors) {
        std::string detail = result.errors.front();
        throw Error(ErrorKind::threshold,
                    "ErrorThreshold",
                    std::to_string(result.errors.size()) + " utterances failed, first: " + detail);
    }
    return result;
}

}  // namespace mtr
