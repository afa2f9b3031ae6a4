// Acceptance suite. Each test checks one release criterion end to end and
// prints a single PASS/FAIL line with the measured numbers.

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <variant>

#include "align_oracle.hpp"
#include "mtr/audio.hpp"
#include "mtr/augment.hpp"
#include "mtr/corpus.hpp"
#include "mtr/errors.hpp"
#include "mtr/gsm0610.hpp"
#include "mtr/io.hpp"
#include "mtr/resample.hpp"
#include "mtr/score.hpp"
#include "mtr/wav49.hpp"
#include "testutil.hpp"

#if MTR_HAVE_REFERENCE_GSM
extern "C" {
typedef struct gsm_state* gsm;
gsm gsm_create(void);
void gsm_destroy(gsm);
void gsm_encode(gsm, short*, unsigned char*);
int gsm_decode(gsm, unsigned char*, short*);
}
#endif

namespace fs = std::filesystem;

namespace {

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(clock::now() - start_).count();
    }

private:
    using clock = std::chrono::steady_clock;
    clock::time_point start_ = clock::now();
};

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("[criterion %d] %s: %s\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
    EXPECT_TRUE(pass) << detail;
}

TEST(Acceptance, Criterion1CompressionRatio) {
    Stopwatch timer;
    auto clip = mtr::test::make_speechlike(1, 8000, 80000);  // 10 s
    auto file = mtr::wav49_encode(clip);
    auto [parsed, meta] = mtr::parse_wav(file);
    const auto& payload = std::get<mtr::Wav49Payload>(parsed);

    const double pcm_bytes = 160000.0;
    const double payload_bytes = static_cast<double>(payload.blocks.size());
    const double ratio = pcm_bytes / payload_bytes;
    const double elapsed = timer.seconds();

    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "payload %zu bytes vs PCM 160000, ratio %.3f:1 (10:1 +-5%%), %.2f s",
                  payload.blocks.size(), ratio, elapsed);
    report(1, payload.blocks.size() == 16250 && std::abs(ratio / 10.0 - 1.0) <= 0.05 &&
                  elapsed < 1.0,
           buf);
}

TEST(Acceptance, Criterion2SnrFidelity) {
    Stopwatch timer;
    double worst = 0.0;
    int64_t clipped = 0;
    int pairs = 0;
    for (int i = 0; i < 50; ++i) {
        auto signal = mtr::test::make_speechlike(100 + i, 8000, 6000 + (i % 5) * 800);
        auto noise = mtr::test::make_noise_clip(200 + i, 8000, 2000 + (i % 7) * 700, 9000);
        for (double target : {5.0, 10.0, 15.0, 20.0}) {
            mtr::Rng rng(mtr::derive_stream_seed(7, "pair-" + std::to_string(i)));
            auto mix = mtr::mix_noise(signal, noise, mtr::SnrTarget{target}, rng);
            clipped += mix.clipped;

            // pre-clamp SNR from the drawn offset and applied scale
            double e_signal = mtr::signal_energy(signal);
            double e_scaled = 0.0;
            for (std::size_t k = 0; k < signal.samples.size(); ++k) {
                double n = noise.samples[(mix.noise_offset + k) % noise.samples.size()] / 32768.0;
                e_scaled += (mix.noise_scale * n) * (mix.noise_scale * n);
            }
            e_scaled /= static_cast<double>(signal.samples.size());
            double measured = 10.0 * std::log10(e_signal / e_scaled);
            worst = std::max(worst, std::abs(measured - target));
            ++pairs;
        }
    }
    double elapsed = timer.seconds();
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "%d mixes, worst |SNR error| %.4f dB (limit 0.1), %lld clipped samples, %.2f s",
                  pairs, worst, static_cast<long long>(clipped), elapsed);
    report(2, worst <= 0.1 && elapsed < 10.0, buf);
}

#if MTR_HAVE_REFERENCE_GSM
TEST(Acceptance, Criterion3CodecInteroperability) {
    using mtr::gsm::kFrameSamples;
    double worst_ours_to_ref = 1.0, worst_ref_to_ours = 1.0;
    int bit_exact = 0, total_frames = 0;

    for (int c = 0; c < 10; ++c) {
        auto clip = mtr::test::make_speechlike(300 + c, 8000, kFrameSamples * 50);
        const std::size_t frames = clip.samples.size() / kFrameSamples;

        mtr::gsm::CodecState our_enc, our_dec;
        gsm ref_enc = gsm_create(), ref_dec = gsm_create();
        std::vector<int16_t> ref_decoded, our_decoded;
        for (std::size_t f = 0; f < frames; ++f) {
            mtr::gsm::PcmFrame frame;
            std::copy_n(clip.samples.begin() + f * kFrameSamples, kFrameSamples, frame.begin());

            // ours -> reference
            mtr::gsm::FrameBytes ours = mtr::gsm::encode_frame(our_enc, frame);
            mtr::gsm::PcmFrame ref_out{};
            std::array<uint8_t, 33> coded;
            std::copy(ours.begin(), ours.end(), coded.begin());
            gsm_decode(ref_dec, coded.data(), ref_out.data());
            ref_decoded.insert(ref_decoded.end(), ref_out.begin(), ref_out.end());

            // reference -> ours
            std::array<uint8_t, 33> theirs{};
            mtr::gsm::PcmFrame copy = frame;
            gsm_encode(ref_enc, copy.data(), theirs.data());
            ++total_frames;
            if (std::equal(ours.begin(), ours.end(), theirs.begin())) ++bit_exact;
            mtr::gsm::FrameBytes their_bytes{};
            std::copy(theirs.begin(), theirs.end(), their_bytes.begin());
            mtr::gsm::PcmFrame our_out = mtr::gsm::decode_frame(our_dec, their_bytes);
            our_decoded.insert(our_decoded.end(), our_out.begin(), our_out.end());
        }
        gsm_destroy(ref_enc);
        gsm_destroy(ref_dec);

        worst_ours_to_ref = std::min(
            worst_ours_to_ref, mtr::test::correlation_with_lag(clip.samples, ref_decoded, 4));
        worst_ref_to_ours = std::min(
            worst_ref_to_ours, mtr::test::correlation_with_lag(clip.samples, our_decoded, 4));
    }

    // tone round trip through our own encoder/decoder
    auto tone = mtr::test::make_tone(1000.0, 8000, kFrameSamples * 20);
    mtr::gsm::CodecState enc, dec;
    std::vector<int16_t> tone_out;
    for (std::size_t f = 0; f < 20; ++f) {
        mtr::gsm::PcmFrame frame;
        std::copy_n(tone.samples.begin() + f * kFrameSamples, kFrameSamples, frame.begin());
        auto decoded = mtr::gsm::decode_frame(dec, mtr::gsm::encode_frame(enc, frame));
        tone_out.insert(tone_out.end(), decoded.begin(), decoded.end());
    }
    double tone_corr = mtr::test::correlation_with_lag(
        std::span(tone.samples).subspan(2 * kFrameSamples),
        std::span<const int16_t>(tone_out).subspan(2 * kFrameSamples), 4);

    char buf[240];
    std::snprintf(buf, sizeof buf,
                  "10-clip corr ours->ref %.4f, ref->ours %.4f (limit 0.95); tone corr %.4f "
                  "(limit 0.8); bit-exact frames %d/%d",
                  worst_ours_to_ref, worst_ref_to_ours, tone_corr, bit_exact, total_frames);
    report(3, worst_ours_to_ref >= 0.95 && worst_ref_to_ours >= 0.95 && tone_corr >= 0.8, buf);
}
#else
TEST(Acceptance, Criterion3CodecInteroperability) {
    report(3, false, "no reference GSM 06.10 transcoder available in this environment");
}
#endif

TEST(Acceptance, Criterion4WerOracleEquivalence) {
    Stopwatch timer;
    auto sequences = mtr::test::all_sequences(6);
    ASSERT_EQ(sequences.size(), 1093u);  // 1 + 3 + ... + 3^6

    long long pairs = 0, mismatches = 0;
    for (const auto& ref : sequences) {
        for (const auto& hyp : sequences) {
            mtr::AlignmentCounts expect = mtr::test::AlignOracle(ref, hyp).counts();
            mtr::AlignmentCounts got = mtr::align(ref, hyp);
            if (!(got == expect)) ++mismatches;
            ++pairs;
        }
    }
    double elapsed = timer.seconds();
    char buf[160];
    std::snprintf(buf, sizeof buf, "%lld pairs enumerated, %lld count mismatches, %.1f s (limit 60)",
                  pairs, mismatches, elapsed);
    report(4, mismatches == 0 && elapsed < 60.0, buf);
}

TEST(Acceptance, Criterion5ReportedArithmetic) {
    auto round1 = [](double v) { return std::round(v * 10.0) / 10.0; };
    bool rel_ok = round1(mtr::relative_improvement(36.92, 24.54)) == 33.5 &&
                  round1(mtr::relative_improvement(28.06, 23.30)) == 17.0 &&
                  round1(mtr::relative_improvement(11.44, 11.21)) == 2.0;

    auto agg = mtr::aggregate_seeds(std::vector<double>{10.0, 12.0, 14.0});
    bool agg_ok = std::abs(agg.mean - 12.0) < 5e-3 && std::abs(agg.std_error - 1.15) < 5e-3;

    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "relative improvements %.1f/%.1f/%.1f (want 33.5/17.0/2.0); "
                  "aggregate %.2f +- %.2f (want 12.00 +- 1.15)",
                  round1(mtr::relative_improvement(36.92, 24.54)),
                  round1(mtr::relative_improvement(28.06, 23.30)),
                  round1(mtr::relative_improvement(11.44, 11.21)), agg.mean, agg.std_error);
    report(5, rel_ok && agg_ok, buf);
}

TEST(Acceptance, Criterion6DatasetMatrix) {
    const fs::path presets = fs::path(MTR_PRESETS_DIR) / "datasets";
    const char* training[] = {"train-clean",        "train-clean-8k",     "train-clean-e",
                              "train-noisy-e-5",    "train-clean-e-s",    "train-clean-e-v",
                              "train-clean-e-sv",   "train-musan-e-5",    "train-musan-e-10",
                              "train-musan-e-15",   "train-musan-e-20",   "train-musan-e-15-s",
                              "train-musan-e-15-v", "train-musan-e-15-sv"};
    const char* eval[] = {"dev-clean-e", "dev-noisy-e-5", "test-noisy-e-5"};

    int expressible = 0;
    bool round_trips = true;
    auto check_file = [&](const std::string& name) {
        std::string text = mtr::read_text_file(presets / (name + ".dataset"));
        mtr::DatasetSpec spec = mtr::parse_dataset_spec(text);
        if (spec.name == name && spec.size() >= 1) ++expressible;
        if (mtr::render_dataset_spec(mtr::parse_dataset_spec(mtr::render_dataset_spec(spec))) !=
            mtr::render_dataset_spec(spec))
            round_trips = false;
    };
    for (const char* name : training) check_file(name);
    for (const char* name : eval) check_file(name);

    mtr::StyleSpec base = mtr::parse_style("noise(musan,15)+e");
    std::vector<std::string> tokens = {"s", "v", "sv"};
    auto unioned = mtr::compose_dataset("train-musan-e-15-s-v-sv", "train.tsv", base, tokens);

    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "%d/17 matrix specs expressible, serialization round-trips %s, "
                  "'train-musan-e-15 + s + v + sv' size %zu (want 4)",
                  expressible, round_trips ? "byte-identically" : "BROKEN", unioned.size());
    report(6, expressible == 17 && round_trips && unioned.size() == 4, buf);
}

TEST(Acceptance, Criterion7Determinism) {
    Stopwatch timer;
    mtr::test::TempDir tmp("acceptance-det");

    auto corpus_dir = tmp.path() / "corpus";
    fs::create_directories(corpus_dir);
    mtr::Manifest base;
    for (int i = 0; i < 20; ++i) {
        char id[16];
        std::snprintf(id, sizeof id, "utt-%02d", i);
        auto clip =
            mtr::test::make_speechlike(static_cast<uint32_t>(500 + i), 8000, 4000 + i * 100);
        mtr::write_file(corpus_dir / (std::string(id) + ".wav"), mtr::write_wav(clip));
        base.push_back({id, std::string(id) + ".wav", 8000, clip.duration_seconds(), "words"});
    }
    auto noise_dir = tmp.path() / "noise";
    fs::create_directories(noise_dir);
    for (int i = 0; i < 3; ++i)
        mtr::write_file(noise_dir / ("n" + std::to_string(i) + ".wav"),
                        mtr::write_wav(mtr::test::make_noise_clip(600 + i, 8000, 3500, 9000)));

    mtr::StyleSpec styled = mtr::parse_style("noise(toy,15)+e");
    std::vector<std::string> tokens = {"s", "v"};
    mtr::DatasetSpec spec = mtr::compose_dataset("det", "unused", styled, tokens);

    auto snapshot = [](const fs::path& root) {
        std::map<std::string, std::vector<uint8_t>> tree;
        for (const auto& entry : fs::recursive_directory_iterator(root))
            if (entry.is_regular_file())
                tree[fs::relative(entry.path(), root).generic_string()] =
                    mtr::read_file(entry.path());
        return tree;
    };

    std::map<std::string, std::vector<uint8_t>> reference;
    bool identical = true;
    int runs = 0;
    for (int repeat = 0; repeat < 2; ++repeat) {
        for (int workers : {1, 4, 8}) {
            mtr::MaterializeOptions options;
            options.output_root = tmp.path() / ("out-" + std::to_string(runs++));
            options.manifest_base = corpus_dir;
            options.seed = 20260811;
            options.workers = workers;
            options.noise_corpora["toy"] = noise_dir;
            auto result = mtr::materialize(spec, base, options);
            if (!result.errors.empty()) identical = false;
            auto tree = snapshot(options.output_root);
            if (reference.empty())
                reference = tree;
            else if (tree != reference)
                identical = false;
        }
    }
    double elapsed = timer.seconds();
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "6 runs (workers 1/4/8, two repeats), trees byte-identical: %s, %.1f s (limit 30)",
                  identical ? "yes" : "NO", elapsed);
    report(7, identical && elapsed < 30.0, buf);
}

TEST(Acceptance, Criterion8ResamplingSemantics) {
    auto wide = mtr::test::make_noise_clip(900, 16000, 16000, 12000);
    auto chain = mtr::resample(mtr::resample(wide, 8000), 16000);
    double high_fraction = mtr::test::energy_fraction_above(
        std::span(chain.samples).subspan(200, 8192), 4000.0, 16000);

    auto tone = mtr::test::make_tone(3000.0, 16000, 16000);
    auto down = mtr::resample(tone, 8000);
    double in_db = mtr::test::tone_magnitude_db(
        std::span(tone.samples).subspan(2000, 12000), 3000.0, 16000);
    double out_db = mtr::test::tone_magnitude_db(
        std::span(down.samples).subspan(1000, 6000), 3000.0, 8000);

    auto sped = mtr::perturb_speed(mtr::test::make_noise_clip(901, 16000, 16000), 1.1);
    auto speed_len = static_cast<long long>(sped.samples.size());

    char buf[220];
    std::snprintf(buf, sizeof buf,
                  "chain energy >4 kHz %.2e of total (limit 1e-4); 3 kHz tone %.2f -> %.2f dB "
                  "(limit +-1); speed 1.1 length %lld (want 14545 +-2)",
                  high_fraction, in_db, out_db, speed_len);
    report(8, high_fraction <= 1e-4 && std::abs(out_db - in_db) <= 1.0 &&
                  std::llabs(speed_len - 14545) <= 2,
           buf);
}

}  // namespace
