#pragma once

#include <string_view>
#include <vector>

#include "trifuse/modality.hpp"
#include "trifuse/tensor.hpp"

namespace trifuse {

// Mono PCM audio, samples in [-1, 1].
struct AudioBuffer {
    int sample_rate = 0;
    std::vector<Scalar> samples;
};

struct MelConfig {
    int n_fft = 1024;
    int hop = 512;
    int n_mels = 64;
    Scalar fmin = 0.0;
    Scalar fmax = 8000.0;
};

// Log-power mel filterbank energies, n_mels x n_frames.
struct MelSpectrogram {
    Matrix values;
    MelConfig config;
    int sample_rate = 0;
    Index n_mels() const { return values.rows(); }
    Index n_frames() const { return values.cols(); }
};

// floor added before the log so digital silence stays finite
inline constexpr Scalar kLogFloor = 1e-10;

// Triangular filters on the HTK mel scale, m = 2595 log10(1 + f/700),
// rows peak-normalized to 1. Shape n_mels x (n_fft/2 + 1).
Matrix mel_filterbank(const MelConfig& cfg, int sample_rate);

// center frequency (Hz) of each mel filter, in row order; the independent
// handle tests use to predict argmax bins
std::vector<Scalar> mel_center_frequencies(const MelConfig& cfg);

Scalar hz_to_mel(Scalar hz);
Scalar mel_to_hz(Scalar mel);

// Hann-windowed magnitude-squared STFT -> mel filterbank -> log(x + 1e-10).
// Frames lie fully inside the signal: n_frames = 1 + (len - n_fft)/hop.
MelSpectrogram mel_spectrogram(const AudioBuffer& audio, const MelConfig& cfg = {});

// num_frames x 3 x height x width, values in [0, 1]
struct FrameStack {
    Tensor data;  // rank 4
    Index frames() const { return data.shape()[0]; }
    Index channels() const { return data.shape()[1]; }
    Index height() const { return data.shape()[2]; }
    Index width() const { return data.shape()[3]; }
};

// validates rank, channel count and value range
FrameStack make_frame_stack(Tensor data);

enum class FeatureSource { Builtin, ExternalFile };

struct FeatureVector {
    ModalityId modality = ModalityId::Video;
    Vector values;
    FeatureSource source = FeatureSource::Builtin;
    Index dim() const { return values.size(); }
};

// concat(per-bin temporal mean, per-bin temporal standard deviation),
// population std, canonical bin order -> 2*n_mels values
FeatureVector audio_features(const MelSpectrogram& mel);

// 24 values: per-channel global mean (3), per-channel global std (3),
// 16-bin histogram of per-frame mean absolute inter-frame difference with
// fixed uniform bin edges on [0,1], then mean and std of those differences
FeatureVector video_features(const FrameStack& frames);
inline constexpr Index kVideoFeatureDim = 24;

// signed hashing trick: lowercase, split on non-alphanumeric (ASCII), hash
// tokens with 64-bit FNV-1a, bucket = hash mod dim signed by hash bit 63,
// then L2-normalize; the empty transcript maps to the zero vector
FeatureVector text_features(std::string_view transcript, Index dim = 256);

}  // namespace trifuse
