#include "mtr/gsm0610.hpp"

#include <bit>
#include <cstdlib>

#include "mtr/bitio.hpp"
#include "mtr/errors.hpp"

// ETSI GSM 06.10 fixed-point reference arithmetic. Word operations
// saturate at 16 bits, longword operations at 32 bits; deviating from the
// exact rounding of these primitives breaks bit-exactness with other
// conforming transcoders.

namespace mtr::gsm {

namespace {

using word = int16_t;
using longword = int32_t;

constexpr word kMaxWord = 32767;
constexpr word kMinWord = -32768;

inline word sat16(longword x) {
    return x > kMaxWord ? kMaxWord : (x < kMinWord ? kMinWord : static_cast<word>(x));
}

inline word add(word a, word b) { return sat16(static_cast<longword>(a) + b); }
inline word sub(word a, word b) { return sat16(static_cast<longword>(a) - b); }

inline word gsm_abs(word a) { return a == kMinWord ? kMaxWord : static_cast<word>(std::abs(a)); }

inline word mult(word a, word b) {
    if (a == kMinWord && b == kMinWord) return kMaxWord;
    return static_cast<word>((static_cast<longword>(a) * b) >> 15);
}

inline word mult_r(word a, word b) {
    if (a == kMinWord && b == kMinWord) return kMaxWord;
    return static_cast<word>((static_cast<longword>(a) * b + 16384) >> 15);
}

inline longword l_add(longword a, longword b) {
    int64_t s = static_cast<int64_t>(a) + b;
    if (s > INT32_MAX) return INT32_MAX;
    if (s < INT32_MIN) return INT32_MIN;
    return static_cast<longword>(s);
}

// Left shifts needed to normalize a nonzero longword into
// [2^30, 2^31) or (-2^31, -2^30].
inline word gsm_norm(longword a) {
    if (a < 0) {
        if (a <= -1073741824) return 0;
        a = ~a;
    }
    return static_cast<word>(std::countl_zero(static_cast<uint32_t>(a)) - 1);
}

inline word gsm_asr(word a, int n) {
    if (n >= 16) return static_cast<word>(a < 0 ? -1 : 0);
    if (n <= -16) return 0;
    if (n < 0) return static_cast<word>(static_cast<uint16_t>(a) << -n);
    return static_cast<word>(a >> n);
}

inline word gsm_asl(word a, int n) {
    if (n >= 16) return 0;
    if (n <= -16) return static_cast<word>(a < 0 ? -1 : 0);
    if (n < 0) return gsm_asr(a, -n);
    return static_cast<word>(static_cast<uint16_t>(a) << n);
}

// Fractional division: num >= 0, denom >= num, result is a 15-bit fraction.
inline word gsm_div(word num, word denom) {
    if (num == 0) return 0;
    longword l_num = num;
    longword l_denom = denom;
    word div = 0;
    for (int k = 15; k--;) {
        div = static_cast<word>(div << 1);
        l_num <<= 1;
        if (l_num >= l_denom) {
            l_num -= l_denom;
            ++div;
        }
    }
    return div;
}

// LAR quantizer scaling, offset and code range per coefficient.
constexpr word kLarA[8] = {20480, 20480, 20480, 20480, 13964, 15360, 8534, 9036};
constexpr word kLarB[8] = {0, 0, 2048, -2560, 94, -1792, -341, -1144};
constexpr word kLarMic[8] = {-32, -32, -16, -16, -8, -8, -4, -4};
constexpr word kLarMac[8] = {31, 31, 15, 15, 7, 7, 3, 3};
constexpr word kLarInvA[8] = {13107, 13107, 13107, 13107, 19223, 17476, 31454, 29708};

// LTP gain quantizer decision and reconstruction levels.
constexpr word kDlb[4] = {6554, 16384, 26214, 32767};
constexpr word kQlb[4] = {3277, 11469, 21299, 32767};

// RPE weighting filter impulse response, scaled by 8192.
constexpr word kWeightH[11] = {-134, -374, 0, 2054, 5741, 8192, 5741, 2054, 0, -374, -134};

// Block amplitude normalized inverse mantissa and reconstruction factor.
constexpr word kNrfac[8] = {29128, 26215, 23832, 21846, 20165, 18725, 17476, 16384};
constexpr word kFac[8] = {18431, 20479, 22527, 24575, 26623, 28671, 30719, 32767};

// ---------------------------------------------------------------------
// Preprocessing: downscale, offset compensation, pre-emphasis.

void preprocess(CodecState::Encoder& st, const PcmFrame& in, word* so) {
    word z1 = st.z1;
    longword l_z2 = st.l_z2;
    word mp = st.mp;

    for (int k = 0; k < kFrameSamples; ++k) {
        word s0 = static_cast<word>((in[k] >> 3) << 2);

        // offset compensation, 31-bit recursive high-pass
        word s1 = static_cast<word>(s0 - z1);
        z1 = s0;

        longword l_s2 = static_cast<longword>(s1) << 15;
        word msp = static_cast<word>(l_z2 >> 15);
        word lsp = static_cast<word>(l_z2 - (static_cast<longword>(msp) << 15));
        l_s2 += mult_r(lsp, 32735);
        l_z2 = l_add(l_s2, static_cast<longword>(msp) * 32735);

        longword l_temp = l_add(l_z2, 16384);

        // pre-emphasis
        word e = mult_r(mp, -28180);
        mp = static_cast<word>(l_temp >> 15);
        so[k] = add(mp, e);
    }
    st.z1 = z1;
    st.l_z2 = l_z2;
    st.mp = mp;
}

// ---------------------------------------------------------------------
// LPC analysis: autocorrelation, Schur recursion, LAR quantization.

void autocorrelation(word* s, longword* l_acf) {
    word smax = 0;
    for (int k = 0; k < kFrameSamples; ++k) {
        word t = gsm_abs(s[k]);
        if (t > smax) smax = t;
    }
    int scalauto = 0;
    if (smax > 0)
        scalauto = 4 - gsm_norm(static_cast<longword>(smax) << 16);

    if (scalauto > 0) {
        word scale = static_cast<word>(16384 >> (scalauto - 1));
        for (int k = 0; k < kFrameSamples; ++k)
            s[k] = mult_r(s[k], scale);
    }

    for (int j = 0; j <= 8; ++j) {
        longword sum = 0;
        for (int k = j; k < kFrameSamples; ++k)
            sum += static_cast<longword>(s[k]) * s[k - j];
        l_acf[j] = sum << 1;
    }

    if (scalauto > 0)
        for (int k = 0; k < kFrameSamples; ++k)
            s[k] = static_cast<word>(static_cast<uint16_t>(s[k]) << scalauto);
}

void reflection_coefficients(const longword* l_acf, word* r) {
    if (l_acf[0] == 0) {
        for (int i = 0; i < 8; ++i) r[i] = 0;
        return;
    }
    word shift = gsm_norm(l_acf[0]);
    word acf[9], p[9], k[9];
    for (int i = 0; i <= 8; ++i)
        acf[i] = static_cast<word>((l_acf[i] << shift) >> 16);

    for (int i = 1; i <= 7; ++i) k[9 - i] = acf[i];
    for (int i = 0; i <= 8; ++i) p[i] = acf[i];

    for (int n = 1; n <= 8; ++n, ++r) {
        word t = gsm_abs(p[1]);
        if (p[0] < t) {
            for (int i = n; i <= 8; ++i) *r++ = 0;
            return;
        }
        *r = gsm_div(t, p[0]);
        if (p[1] > 0) *r = static_cast<word>(-*r);
        if (n == 8) return;

        p[0] = add(p[0], mult_r(p[1], *r));
        for (int m = 1; m <= 8 - n; ++m) {
            p[m] = add(p[m + 1], mult_r(k[9 - m], *r));
            k[9 - m] = add(k[9 - m], mult_r(p[m + 1], *r));
        }
    }
}

void transform_to_lar(word* r) {
    // segment scaling differs: r is Q15, LAR is Q14 in [-1.625, 1.625];
    // the steep segment relies on 16-bit wraparound to stay continuous
    for (int i = 0; i < 8; ++i) {
        word t = gsm_abs(r[i]);
        if (t < 22118) {
            t = static_cast<word>(t >> 1);
        } else if (t < 31130) {
            t = static_cast<word>(t - 11059);
        } else {
            t = static_cast<word>(static_cast<uint16_t>(t) << 2);
            t = static_cast<word>(t + 26624);
        }
        r[i] = r[i] < 0 ? static_cast<word>(-t) : t;
    }
}

void quantize_lar(word* lar) {
    for (int i = 0; i < 8; ++i) {
        word t = mult(kLarA[i], lar[i]);
        t = add(t, kLarB[i]);
        t = add(t, 256);
        t = static_cast<word>(t >> 9);
        lar[i] = t > kLarMac[i]   ? static_cast<word>(kLarMac[i] - kLarMic[i])
                 : t < kLarMic[i] ? 0
                                  : static_cast<word>(t - kLarMic[i]);
    }
}

// ---------------------------------------------------------------------
// Short-term filtering, shared LAR decode and interpolation.

void decode_lar(const word* larc, word* larpp) {
    for (int i = 0; i < 8; ++i) {
        word t1 = static_cast<word>(add(larc[i], kLarMic[i]) << 10);
        word t2 = static_cast<word>(kLarB[i] << 1);
        t1 = sub(t1, t2);
        t1 = mult_r(kLarInvA[i], t1);
        larpp[i] = add(t1, t1);
    }
}

enum class Zone { k0_12, k13_26, k27_39, k40_159 };

void interpolate_lar(Zone zone, const word* prev, const word* cur, word* larp) {
    switch (zone) {
        case Zone::k0_12:
            for (int i = 0; i < 8; ++i)
                larp[i] = add(add(gsm_asr(prev[i], 2), gsm_asr(cur[i], 2)), gsm_asr(prev[i], 1));
            break;
        case Zone::k13_26:
            for (int i = 0; i < 8; ++i)
                larp[i] = add(gsm_asr(prev[i], 1), gsm_asr(cur[i], 1));
            break;
        case Zone::k27_39:
            for (int i = 0; i < 8; ++i)
                larp[i] = add(add(gsm_asr(prev[i], 2), gsm_asr(cur[i], 2)), gsm_asr(cur[i], 1));
            break;
        case Zone::k40_159:
            for (int i = 0; i < 8; ++i) larp[i] = cur[i];
            break;
    }
}

void lar_to_reflection(word* larp) {
    for (int i = 0; i < 8; ++i) {
        word t;
        if (larp[i] < 0) {
            t = larp[i] == kMinWord ? kMaxWord : static_cast<word>(-larp[i]);
            larp[i] = static_cast<word>(-(t < 11059   ? t << 1
                                          : t < 20070 ? t + 11059
                                                      : add(static_cast<word>(t >> 2), 26112)));
        } else {
            t = larp[i];
            larp[i] = t < 11059   ? static_cast<word>(t << 1)
                      : t < 20070 ? static_cast<word>(t + 11059)
                                  : add(static_cast<word>(t >> 2), 26112);
        }
    }
}

void analysis_filter(std::array<word, 8>& u, const word* rp, word* s, int n) {
    for (int k = 0; k < n; ++k) {
        word di = s[k];
        word sav = di;
        for (int i = 0; i < 8; ++i) {
            word ui = u[i];
            word rpi = rp[i];
            u[i] = sav;
            sav = add(ui, mult_r(rpi, di));
            di = add(di, mult_r(rpi, ui));
        }
        s[k] = di;
    }
}

void synthesis_filter(std::array<word, 9>& v, const word* rrp, const word* wt, word* sr, int n) {
    for (int k = 0; k < n; ++k) {
        word sri = wt[k];
        for (int i = 7; i >= 0; --i) {
            sri = sub(sri, mult_r(rrp[i], v[i]));
            v[i + 1] = add(v[i], mult_r(rrp[i], sri));
        }
        sr[k] = v[0] = sri;
    }
}

template <typename Filter>
void run_short_term(const std::array<int16_t, 8>& larc, std::array<int16_t, 8>& larpp_prev,
                    Filter&& filter) {
    word larpp[8];
    decode_lar(larc.data(), larpp);

    static constexpr struct {
        Zone zone;
        int offset, count;
    } kZones[4] = {{Zone::k0_12, 0, 13},
                   {Zone::k13_26, 13, 14},
                   {Zone::k27_39, 27, 13},
                   {Zone::k40_159, 40, 120}};

    for (const auto& z : kZones) {
        word larp[8];
        interpolate_lar(z.zone, larpp_prev.data(), larpp, larp);
        lar_to_reflection(larp);
        filter(larp, z.offset, z.count);
    }
    for (int i = 0; i < 8; ++i) larpp_prev[i] = larpp[i];
}

// ---------------------------------------------------------------------
// Long-term predictor.

void ltp_parameters(const word* d, const word* dp, word* bc_out, word* nc_out) {
    word dmax = 0;
    for (int k = 0; k < 40; ++k) {
        word t = gsm_abs(d[k]);
        if (t > dmax) dmax = t;
    }
    word temp = 0;
    if (dmax != 0) temp = gsm_norm(static_cast<longword>(dmax) << 16);
    word scal = temp > 6 ? 0 : static_cast<word>(6 - temp);

    word wt[40];
    for (int k = 0; k < 40; ++k) wt[k] = static_cast<word>(d[k] >> scal);

    longword l_max = 0;
    word nc = 40;
    for (int lambda = 40; lambda <= 120; ++lambda) {
        longword acc = 0;
        for (int k = 0; k < 40; ++k)
            acc += static_cast<longword>(wt[k]) * dp[k - lambda];
        if (acc > l_max) {
            nc = static_cast<word>(lambda);
            l_max = acc;
        }
    }
    *nc_out = nc;

    l_max <<= 1;
    l_max = l_max >> (6 - scal);

    longword l_power = 0;
    for (int k = 0; k < 40; ++k) {
        longword t = dp[k - nc] >> 3;
        l_power += t * t;
    }
    l_power <<= 1;

    if (l_max <= 0) {
        *bc_out = 0;
        return;
    }
    if (l_max >= l_power) {
        *bc_out = 3;
        return;
    }

    temp = gsm_norm(l_power);
    word r = static_cast<word>((l_max << temp) >> 16);
    word s = static_cast<word>((l_power << temp) >> 16);

    word bc = 0;
    for (; bc <= 2; ++bc)
        if (r <= mult(s, kDlb[bc])) break;
    *bc_out = bc;
}

void ltp_analysis_filter(word bc, word nc, const word* dp, const word* d, word* dpp, word* e) {
    word bp = kQlb[bc];
    for (int k = 0; k < 40; ++k) {
        dpp[k] = mult_r(bp, dp[k - nc]);
        e[k] = sub(d[k], dpp[k]);
    }
}

// ---------------------------------------------------------------------
// RPE encoding.

void weighting_filter(const word* e /* [-5..44] */, word* x) {
    for (int k = 0; k < 40; ++k) {
        longword acc = 4096;  // rounding for the >>13 below
        for (int i = 0; i <= 10; ++i)
            acc += static_cast<longword>(e[k + i - 5]) * kWeightH[i];
        acc >>= 13;
        x[k] = sat16(acc);
    }
}

void grid_selection(const word* x, word* xm, word* mc_out) {
    longword em = 0;
    word mc = 0;
    for (word m = 0; m <= 3; ++m) {
        longword acc = 0;
        for (int i = 0; i <= 12; ++i) {
            longword t = x[m + 3 * i] >> 2;
            acc += t * t;
        }
        acc <<= 1;
        if (acc > em) {
            mc = m;
            em = acc;
        }
    }
    for (int i = 0; i <= 12; ++i) xm[i] = x[mc + 3 * i];
    *mc_out = mc;
}

void exp_and_mant(word xmaxc, word* exp_out, word* mant_out) {
    word exp = 0;
    if (xmaxc > 15) exp = static_cast<word>((xmaxc >> 3) - 1);
    word mant = static_cast<word>(xmaxc - (exp << 3));

    if (mant == 0) {
        exp = -4;
        mant = 7;
    } else {
        while (mant <= 7) {
            mant = static_cast<word>(mant << 1 | 1);
            --exp;
        }
        mant = static_cast<word>(mant - 8);
    }
    *exp_out = exp;
    *mant_out = mant;
}

void apcm_quantize(const word* xm, word* xmc, word* mant_out, word* exp_out, word* xmaxc_out) {
    word xmax = 0;
    for (int i = 0; i <= 12; ++i) {
        word t = gsm_abs(xm[i]);
        if (t > xmax) xmax = t;
    }

    word exp = 0;
    word temp = static_cast<word>(xmax >> 9);
    word itest = 0;
    for (int i = 0; i <= 5; ++i) {
        itest = static_cast<word>(itest | (temp <= 0 ? 1 : 0));
        temp = static_cast<word>(temp >> 1);
        if (itest == 0) ++exp;
    }
    word xmaxc = add(static_cast<word>(xmax >> (exp + 5)), static_cast<word>(exp << 3));

    word mant;
    exp_and_mant(xmaxc, &exp, &mant);

    word shift = static_cast<word>(6 - exp);
    word inv = kNrfac[mant];
    for (int i = 0; i <= 12; ++i) {
        word t = static_cast<word>(static_cast<uint16_t>(xm[i]) << shift);
        t = mult(t, inv);
        t = static_cast<word>(t >> 12);
        xmc[i] = static_cast<word>(t + 4);  // shift into 0..7
    }

    *mant_out = mant;
    *exp_out = exp;
    *xmaxc_out = xmaxc;
}

void apcm_dequantize(const word* xmc, word mant, word exp, word* xmp) {
    word t1 = kFac[mant];
    word t2 = sub(6, exp);
    word t3 = gsm_asl(1, sub(t2, 1));
    for (int i = 0; i <= 12; ++i) {
        word t = static_cast<word>((xmc[i] << 1) - 7);
        t = static_cast<word>(t << 12);
        t = mult_r(t1, t);
        t = add(t, t3);
        xmp[i] = gsm_asr(t, t2);
    }
}

void grid_position(word mc, const word* xmp, word* ep) {
    for (int k = 0; k < 40; ++k) ep[k] = 0;
    for (int i = 0; i <= 12; ++i) ep[mc + 3 * i] = xmp[i];
}

// RPE encode one subframe: e[0..39] in, reconstructed residual out in-place.
void rpe_encode(word* e, word* xmaxc, word* mc, word* xmc) {
    word padded[50] = {};
    for (int k = 0; k < 40; ++k) padded[k + 5] = e[k];

    word x[40], xm[13], xmp[13];
    weighting_filter(padded + 5, x);
    grid_selection(x, xm, mc);

    word mant, exp;
    apcm_quantize(xm, xmc, &mant, &exp, xmaxc);
    apcm_dequantize(xmc, mant, exp, xmp);
    grid_position(*mc, xmp, e);
}

}  // namespace

// ---------------------------------------------------------------------

FrameParams encode_frame_params(CodecState& state, const PcmFrame& pcm) {
    auto& st = state.enc;
    FrameParams out;

    word s[kFrameSamples];
    preprocess(st, pcm, s);

    longword l_acf[9];
    word larc[8];
    autocorrelation(s, l_acf);
    reflection_coefficients(l_acf, larc);
    transform_to_lar(larc);
    quantize_lar(larc);
    for (int i = 0; i < 8; ++i) out.larc[i] = larc[i];

    run_short_term(out.larc, st.larpp_prev, [&](const word* rp, int offset, int count) {
        analysis_filter(st.u, rp, s + offset, count);
    });

    word* dp = st.dp0.data() + 120;
    for (int j = 0; j < kSubframes; ++j) {
        word nc, bc;
        ltp_parameters(s + j * 40, dp, &bc, &nc);

        word dpp[40], e[40];
        ltp_analysis_filter(bc, nc, dp, s + j * 40, dpp, e);

        word xmaxc, mc;
        word xmc[13];
        rpe_encode(e, &xmaxc, &mc, xmc);

        for (int k = 0; k < 40; ++k)
            dp[k] = add(e[k], dpp[k]);
        dp += 40;

        out.ltp_lag[j] = nc;
        out.ltp_gain[j] = bc;
        out.grid_position[j] = mc;
        out.block_amplitude[j] = xmaxc;
        for (int i = 0; i < 13; ++i) out.pulses[j][i] = xmc[i];
    }
    // keep the last 120 reconstructed residual samples as history
    for (int i = 0; i < 120; ++i) st.dp0[i] = st.dp0[i + 160];
    return out;
}

PcmFrame decode_frame_params(CodecState& state, const FrameParams& params) {
    auto& st = state.dec;
    word wt[kFrameSamples];
    word* drp = st.drp.data() + 120;

    for (int j = 0; j < kSubframes; ++j) {
        word exp, mant;
        exp_and_mant(params.block_amplitude[j], &exp, &mant);

        word xmp[13], erp[40];
        word xmc[13];
        for (int i = 0; i < 13; ++i) xmc[i] = params.pulses[j][i];
        apcm_dequantize(xmc, mant, exp, xmp);
        grid_position(params.grid_position[j], xmp, erp);

        // long-term synthesis; an out-of-range lag falls back to the last
        // valid one so corrupt frames cannot index outside the history
        word ncr = params.ltp_lag[j];
        word nr = (ncr < 40 || ncr > 120) ? st.nrp : ncr;
        st.nrp = nr;
        word brp = kQlb[params.ltp_gain[j] & 3];
        for (int k = 0; k < 40; ++k)
            drp[k] = add(erp[k], mult_r(brp, drp[k - nr]));
        for (int k = 0; k < 40; ++k) wt[j * 40 + k] = drp[k];

        for (int k = 0; k < 120; ++k)
            st.drp[k] = st.drp[k + 40];
    }

    PcmFrame out;
    word sr[kFrameSamples];
    run_short_term(params.larc, st.larpp_prev, [&](const word* rrp, int offset, int count) {
        synthesis_filter(st.v, rrp, wt + offset, sr + offset, count);
    });

    // de-emphasis, upscaling, 13-bit truncation
    word msr = st.msr;
    for (int k = 0; k < kFrameSamples; ++k) {
        msr = add(sr[k], mult_r(msr, 28180));
        out[k] = static_cast<word>(add(msr, msr) & ~7);
    }
    st.msr = msr;
    return out;
}

namespace {

constexpr int kFieldBitsSubframe[4] = {7, 2, 2, 6};  // lag, gain, grid, amplitude

template <typename Writer>
void write_params(Writer& w, const FrameParams& p) {
    static constexpr int kLarBits[8] = {6, 6, 5, 5, 4, 4, 3, 3};
    for (int i = 0; i < 8; ++i)
        w.put(static_cast<uint32_t>(p.larc[i]), kLarBits[i]);
    for (int j = 0; j < kSubframes; ++j) {
        w.put(static_cast<uint32_t>(p.ltp_lag[j]), 7);
        w.put(static_cast<uint32_t>(p.ltp_gain[j]), 2);
        w.put(static_cast<uint32_t>(p.grid_position[j]), 2);
        w.put(static_cast<uint32_t>(p.block_amplitude[j]), 6);
        for (int i = 0; i < 13; ++i)
            w.put(static_cast<uint32_t>(p.pulses[j][i]), 3);
    }
}

template <typename Reader>
FrameParams read_params(Reader& r) {
    static constexpr int kLarBits[8] = {6, 6, 5, 5, 4, 4, 3, 3};
    FrameParams p;
    for (int i = 0; i < 8; ++i)
        p.larc[i] = static_cast<int16_t>(r.get(kLarBits[i]));
    for (int j = 0; j < kSubframes; ++j) {
        p.ltp_lag[j] = static_cast<int16_t>(r.get(7));
        p.ltp_gain[j] = static_cast<int16_t>(r.get(2));
        p.grid_position[j] = static_cast<int16_t>(r.get(2));
        p.block_amplitude[j] = static_cast<int16_t>(r.get(6));
        for (int i = 0; i < 13; ++i)
            p.pulses[j][i] = static_cast<int16_t>(r.get(3));
    }
    return p;
}

}  // namespace

FrameBytes pack_frame(const FrameParams& params) {
    MsbBitWriter w;
    w.put(kFrameSignature, 4);
    write_params(w, params);
    FrameBytes out{};
    const auto& b = w.bytes();
    std::copy(b.begin(), b.end(), out.begin());
    return out;
}

FrameParams unpack_frame(const FrameBytes& bytes) {
    if ((bytes[0] >> 4) != kFrameSignature)
        throw_format("BadSignature", "frame does not start with the 0xD signature nibble");
    MsbBitReader r(bytes);
    r.get(4);
    return read_params(r);
}

FrameBytes encode_frame(CodecState& state, const PcmFrame& pcm) {
    return pack_frame(encode_frame_params(state, pcm));
}

PcmFrame decode_frame(CodecState& state, const FrameBytes& bytes) {
    return decode_frame_params(state, unpack_frame(bytes));
}

}  // namespace mtr::gsm
