// mtr: corpus preparation for multi-style ASR training data.
// Subcommands: transcode, materialize, score, inspect.

#include <cstdio>
#include <exception>

#include <CLI11.hpp>

#include "commands.hpp"
#include "mtr/errors.hpp"

namespace {

int exit_code_for(const mtr::Error& e) {
    switch (e.kind()) {
        case mtr::ErrorKind::config: return mtr::cli::kExitConfig;
        case mtr::ErrorKind::io: return mtr::cli::kExitIo;
        case mtr::ErrorKind::format: return mtr::cli::kExitFormat;
        case mtr::ErrorKind::threshold: return mtr::cli::kExitThreshold;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-style training data pipeline"};
    app.require_subcommand(1);

    mtr::cli::TranscodeArgs transcode;
    auto* cmd_transcode = app.add_subcommand("transcode", "convert between PCM and WAV49");
    cmd_transcode->add_option("input", transcode.input, "input WAV file")->required();
    cmd_transcode->add_option("output", transcode.output, "output WAV file")->required();
    cmd_transcode->add_option("--to", transcode.codec, "target codec: wav49 or pcm")
        ->required()
        ->check(CLI::IsMember({"wav49", "pcm"}));
    int transcode_rate = 0;
    cmd_transcode->add_option("--rate", transcode_rate, "output sample rate (pcm only)");

    mtr::cli::MaterializeArgs materialize;
    auto* cmd_materialize =
        app.add_subcommand("materialize", "build one dataset from a pipeline config");
    cmd_materialize->add_option("--config", materialize.config, "pipeline config file")
        ->required();
    cmd_materialize->add_option("--dataset", materialize.dataset, "dataset name")->required();
    uint64_t seed = 0;
    auto* seed_opt = cmd_materialize->add_option("--seed", seed, "override the config seed");
    int workers = 0;
    auto* workers_opt =
        cmd_materialize->add_option("--workers", workers, "worker threads (MTR_WORKERS wins)");
    std::string out_override;
    auto* out_opt = cmd_materialize->add_option("--out", out_override, "override output root");

    mtr::cli::ScoreArgs score;
    auto* cmd_score = app.add_subcommand("score", "WER against a reference, multi-seed");
    cmd_score->add_option("--ref", score.reference, "reference transcripts (TSV)")->required();
    cmd_score->add_option("--hyp", score.hypotheses, "hypothesis file, repeat per seed")
        ->required();
    cmd_score->add_option("--out", score.output, "report stem (.txt/.csv added)")->required();
    double baseline = 0.0;
    auto* baseline_opt =
        cmd_score->add_option("--baseline", baseline, "baseline WER for relative improvement");
    cmd_score->add_flag("--missing-as-deletion", score.missing_as_deletion,
                        "score utterances missing from a hypothesis as deleted");

    std::filesystem::path inspect_file;
    auto* cmd_inspect = app.add_subcommand("inspect", "dump WAV/WAV49 header fields");
    cmd_inspect->add_option("file", inspect_file, "WAV file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_transcode->parsed()) {
            if (transcode_rate != 0) transcode.rate = transcode_rate;
            return mtr::cli::cmd_transcode(transcode);
        }
        if (cmd_materialize->parsed()) {
            if (*seed_opt) materialize.seed = seed;
            if (*workers_opt) materialize.workers = workers;
            if (*out_opt) materialize.output_root = out_override;
            return mtr::cli::cmd_materialize(materialize);
        }
        if (cmd_score->parsed()) {
            if (*baseline_opt) score.baseline_wer = baseline;
            return mtr::cli::cmd_score(score);
        }
        if (cmd_inspect->parsed())
            return mtr::cli::cmd_inspect(inspect_file);
    } catch (const mtr::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return 70;
    }
    return 1;
}
