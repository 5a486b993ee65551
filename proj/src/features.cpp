#include "trifuse/features.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "trifuse/rng.hpp"

namespace trifuse {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// iterative radix-2 Cooley-Tukey, in place
void fft_radix2(std::vector<std::complex<Scalar>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const Scalar ang = -2.0 * std::numbers::pi / static_cast<Scalar>(len);
        const std::complex<Scalar> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<Scalar> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                std::complex<Scalar> u = a[i + k];
                std::complex<Scalar> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// direct DFT fallback for non power-of-two sizes
std::vector<std::complex<Scalar>> dft(const std::vector<std::complex<Scalar>>& a) {
    const std::size_t n = a.size();
    std::vector<std::complex<Scalar>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<Scalar> acc(0.0, 0.0);
        for (std::size_t t = 0; t < n; ++t) {
            Scalar ang = -2.0 * std::numbers::pi * static_cast<Scalar>(k * t) / static_cast<Scalar>(n);
            acc += a[t] * std::complex<Scalar>(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
    return out;
}

void validate_mel_config(const MelConfig& cfg, int sample_rate) {
    if (sample_rate <= 0) throw UsageError("mel: sample rate must be positive");
    if (cfg.n_fft < 4 || cfg.n_fft % 2 != 0) throw UsageError("mel: n_fft must be even and at least 4");
    if (cfg.hop <= 0) throw UsageError("mel: hop must be positive");
    if (cfg.n_mels < 1) throw UsageError("mel: n_mels must be positive");
    if (cfg.fmin < 0) throw UsageError("mel: fmin must be nonnegative");
    if (cfg.fmax <= cfg.fmin) throw UsageError("mel: fmax must exceed fmin");
    if (cfg.fmax > static_cast<Scalar>(sample_rate) / 2.0)
        throw UsageError("mel: fmax " + std::to_string(cfg.fmax) + " Hz is above the Nyquist frequency " +
                         std::to_string(sample_rate / 2.0) + " Hz");
}

}  // namespace

Scalar hz_to_mel(Scalar hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

Scalar mel_to_hz(Scalar mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<Scalar> mel_center_frequencies(const MelConfig& cfg) {
    const Scalar lo = hz_to_mel(cfg.fmin), hi = hz_to_mel(cfg.fmax);
    std::vector<Scalar> centers(static_cast<std::size_t>(cfg.n_mels));
    for (int m = 0; m < cfg.n_mels; ++m)
        centers[static_cast<std::size_t>(m)] =
            mel_to_hz(lo + (hi - lo) * static_cast<Scalar>(m + 1) / static_cast<Scalar>(cfg.n_mels + 1));
    return centers;
}

Matrix mel_filterbank(const MelConfig& cfg, int sample_rate) {
    validate_mel_config(cfg, sample_rate);
    const Index n_bins = cfg.n_fft / 2 + 1;
    const Scalar lo = hz_to_mel(cfg.fmin), hi = hz_to_mel(cfg.fmax);
    std::vector<Scalar> edges(static_cast<std::size_t>(cfg.n_mels) + 2);
    for (std::size_t i = 0; i < edges.size(); ++i)
        edges[i] = mel_to_hz(lo + (hi - lo) * static_cast<Scalar>(i) / static_cast<Scalar>(cfg.n_mels + 1));

    Matrix fb = Matrix::Zero(cfg.n_mels, n_bins);
    for (Index m = 0; m < cfg.n_mels; ++m) {
        const Scalar left = edges[static_cast<std::size_t>(m)];
        const Scalar center = edges[static_cast<std::size_t>(m) + 1];
        const Scalar right = edges[static_cast<std::size_t>(m) + 2];
        for (Index k = 0; k < n_bins; ++k) {
            const Scalar f = static_cast<Scalar>(k) * static_cast<Scalar>(sample_rate) /
                             static_cast<Scalar>(cfg.n_fft);
            if (f > left && f < center)
                fb(m, k) = (f - left) / (center - left);
            else if (f >= center && f < right)
                fb(m, k) = (right - f) / (right - center);
        }
        const Scalar peak = fb.row(m).maxCoeff();
        if (peak <= 0.0)
            throw UsageError("mel: filter " + std::to_string(m) +
                             " has no FFT bin support; lower n_mels or raise n_fft");
        fb.row(m) /= peak;
    }
    return fb;
}

MelSpectrogram mel_spectrogram(const AudioBuffer& audio, const MelConfig& cfg) {
    validate_mel_config(cfg, audio.sample_rate);
    const std::size_t n_fft = static_cast<std::size_t>(cfg.n_fft);
    if (audio.samples.size() < n_fft)
        throw DataError("mel: audio has " + std::to_string(audio.samples.size()) + " samples, need at least " +
                        std::to_string(n_fft));

    const Index n_frames =
        1 + static_cast<Index>((audio.samples.size() - n_fft) / static_cast<std::size_t>(cfg.hop));
    const Index n_bins = cfg.n_fft / 2 + 1;

    // periodic Hann
    std::vector<Scalar> window(n_fft);
    for (std::size_t i = 0; i < n_fft; ++i)
        window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<Scalar>(i) /
                                         static_cast<Scalar>(n_fft));

    Matrix power(n_bins, n_frames);
    std::vector<std::complex<Scalar>> buf(n_fft);
    for (Index t = 0; t < n_frames; ++t) {
        const std::size_t off = static_cast<std::size_t>(t) * static_cast<std::size_t>(cfg.hop);
        for (std::size_t i = 0; i < n_fft; ++i)
            buf[i] = std::complex<Scalar>(audio.samples[off + i] * window[i], 0.0);
        if (is_pow2(n_fft)) {
            fft_radix2(buf);
        } else {
            buf = dft(buf);
        }
        for (Index k = 0; k < n_bins; ++k) power(k, t) = std::norm(buf[static_cast<std::size_t>(k)]);
    }

    MelSpectrogram mel;
    mel.config = cfg;
    mel.sample_rate = audio.sample_rate;
    mel.values = ((mel_filterbank(cfg, audio.sample_rate) * power).array() + kLogFloor).log().matrix();
    if (!mel.values.allFinite()) throw DataError("mel: non-finite spectrogram values");
    return mel;
}

FrameStack make_frame_stack(Tensor data) {
    if (data.rank() != 4)
        throw DataError("frame stack must be rank 4 (frames, channels, height, width), got " +
                        shape_str(data.shape()));
    if (data.shape()[1] != 3)
        throw DataError("frame stack must have 3 channels, got " + std::to_string(data.shape()[1]));
    if (!data.all_finite()) throw DataError("frame stack holds non-finite values");
    if ((data.flat() < 0.0).any() || (data.flat() > 1.0).any())
        throw DataError("frame stack values must lie in [0, 1]");
    return FrameStack{std::move(data)};
}

FeatureVector audio_features(const MelSpectrogram& mel) {
    if (mel.n_frames() < 1) throw DataError("audio_features: empty spectrogram");
    const Index n = mel.n_mels();
    const Scalar frames = static_cast<Scalar>(mel.n_frames());
    Vector out(2 * n);
    for (Index b = 0; b < n; ++b) {
        Scalar sum = 0;
        for (Index t = 0; t < mel.n_frames(); ++t) sum += mel.values(b, t);
        const Scalar mean = sum / frames;
        Scalar var = 0;
        for (Index t = 0; t < mel.n_frames(); ++t) {
            const Scalar d = mel.values(b, t) - mean;
            var += d * d;
        }
        out[b] = mean;
        out[n + b] = std::sqrt(var / frames);
    }
    return FeatureVector{ModalityId::Audio, std::move(out), FeatureSource::Builtin};
}

FeatureVector video_features(const FrameStack& fs) {
    const Index f = fs.frames(), c = fs.channels(), h = fs.height(), w = fs.width();
    if (f < 2) throw DataError("video_features: need at least 2 frames, got " + std::to_string(f));
    const Scalar* p = fs.data.data();
    const Index plane = h * w;
    const Index frame_sz = c * plane;
    auto at = [&](Index fi, Index ci, Index px) { return p[fi * frame_sz + ci * plane + px]; };

    Vector out = Vector::Zero(kVideoFeatureDim);

    // per-channel global mean/std over all frames and pixels
    for (Index ci = 0; ci < c; ++ci) {
        Scalar sum = 0;
        for (Index fi = 0; fi < f; ++fi)
            for (Index px = 0; px < plane; ++px) sum += at(fi, ci, px);
        const Scalar mean = sum / static_cast<Scalar>(f * plane);
        Scalar var = 0;
        for (Index fi = 0; fi < f; ++fi)
            for (Index px = 0; px < plane; ++px) {
                const Scalar d = at(fi, ci, px) - mean;
                var += d * d;
            }
        out[ci] = mean;
        out[3 + ci] = std::sqrt(var / static_cast<Scalar>(f * plane));
    }

    // per-frame mean absolute inter-frame difference
    std::vector<Scalar> diffs(static_cast<std::size_t>(f - 1));
    for (Index fi = 0; fi + 1 < f; ++fi) {
        Scalar sum = 0;
        for (Index k = 0; k < frame_sz; ++k)
            sum += std::abs(p[(fi + 1) * frame_sz + k] - p[fi * frame_sz + k]);
        diffs[static_cast<std::size_t>(fi)] = sum / static_cast<Scalar>(frame_sz);
    }

    // 16 uniform bins on [0,1]; a diff of exactly 1 lands in the last bin
    for (Scalar d : diffs) {
        Index bin = std::min<Index>(15, static_cast<Index>(std::floor(d * 16.0)));
        out[6 + bin] += 1.0 / static_cast<Scalar>(diffs.size());
    }

    Scalar dsum = 0;
    for (Scalar d : diffs) dsum += d;
    const Scalar dmean = dsum / static_cast<Scalar>(diffs.size());
    Scalar dvar = 0;
    for (Scalar d : diffs) dvar += (d - dmean) * (d - dmean);
    out[22] = dmean;
    out[23] = std::sqrt(dvar / static_cast<Scalar>(diffs.size()));

    return FeatureVector{ModalityId::Video, std::move(out), FeatureSource::Builtin};
}

FeatureVector text_features(std::string_view transcript, Index dim) {
    if (dim < 2) throw UsageError("text_features: dim must be at least 2");
    Vector out = Vector::Zero(dim);
    std::string token;
    auto flush = [&] {
        if (token.empty()) return;
        const std::uint64_t h = fnv1a64(token);
        const Index bucket = static_cast<Index>(h % static_cast<std::uint64_t>(dim));
        out[bucket] += (h >> 63) ? -1.0 : 1.0;
        token.clear();
    };
    for (char ch : transcript) {
        const unsigned char c = static_cast<unsigned char>(ch);
        if ((c >= '0' && c <= '9') || (c >= 'a' && c <= 'z')) {
            token.push_back(ch);
        } else if (c >= 'A' && c <= 'Z') {
            token.push_back(static_cast<char>(c + 32));
        } else {
            flush();
        }
    }
    flush();
    const Scalar norm = out.norm();
    if (norm > 0.0) out /= norm;
    return FeatureVector{ModalityId::Language, std::move(out), FeatureSource::Builtin};
}

}  // namespace trifuse
