#include "trifuse/io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace trifuse {

namespace {

using nlohmann::json;

std::string read_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path.string());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::uint16_t u16le(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

std::uint32_t u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16le(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

constexpr char kFrameMagic[8] = {'T', 'R', 'I', 'F', 'R', 'A', 'M', 'E'};

}  // namespace

AudioBuffer read_wav(const std::filesystem::path& path) {
    const std::string bytes = read_binary(path);
    const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (bytes.size() < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0)
        throw DataError(path.string() + ": not a RIFF/WAVE file");

    bool have_fmt = false;
    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t sample_rate = 0;
    std::size_t data_off = 0, data_len = 0;

    std::size_t off = 12;
    while (off + 8 <= bytes.size()) {
        const char* id = bytes.data() + off;
        const std::uint32_t len = u32le(p + off + 4);
        const std::size_t body = off + 8;
        if (body + len > bytes.size()) throw DataError(path.string() + ": truncated chunk");
        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (len < 16) throw DataError(path.string() + ": short fmt chunk");
            format = u16le(p + body);
            channels = u16le(p + body + 2);
            sample_rate = u32le(p + body + 4);
            bits = u16le(p + body + 14);
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            data_off = body;
            data_len = len;
        }
        off = body + len + (len % 2);  // chunks are word-aligned
    }
    if (!have_fmt) throw DataError(path.string() + ": missing fmt chunk");
    if (data_off == 0) throw DataError(path.string() + ": missing data chunk");
    if (format != 1) throw DataError(path.string() + ": only PCM WAV is supported (format tag " +
                                     std::to_string(format) + ")");
    if (channels != 1)
        throw DataError(path.string() + ": expected mono audio, got " + std::to_string(channels) + " channels");
    if (bits != 16) throw DataError(path.string() + ": expected 16-bit samples, got " + std::to_string(bits));
    if (sample_rate == 0) throw DataError(path.string() + ": zero sample rate");

    AudioBuffer out;
    out.sample_rate = static_cast<int>(sample_rate);
    const std::size_t n = data_len / 2;
    out.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::int16_t s = static_cast<std::int16_t>(u16le(p + data_off + 2 * i));
        out.samples[i] = static_cast<Scalar>(s) / 32768.0;
    }
    return out;
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& audio) {
    if (audio.sample_rate <= 0) throw UsageError("write_wav: sample rate must be positive");
    std::string body;
    body.reserve(audio.samples.size() * 2);
    for (Scalar s : audio.samples) {
        // symmetric 1/32768 quantization so 16-bit-exact samples round-trip
        const long q = std::lround(std::min(1.0, std::max(-1.0, s)) * 32768.0);
        const auto clamped = static_cast<std::int16_t>(std::min(32767l, std::max(-32768l, q)));
        put_u16le(body, static_cast<std::uint16_t>(clamped));
    }
    std::string out;
    out += "RIFF";
    put_u32le(out, static_cast<std::uint32_t>(36 + body.size()));
    out += "WAVE";
    out += "fmt ";
    put_u32le(out, 16);
    put_u16le(out, 1);  // PCM
    put_u16le(out, 1);  // mono
    put_u32le(out, static_cast<std::uint32_t>(audio.sample_rate));
    put_u32le(out, static_cast<std::uint32_t>(audio.sample_rate * 2));
    put_u16le(out, 2);
    put_u16le(out, 16);
    out += "data";
    put_u32le(out, static_cast<std::uint32_t>(body.size()));
    out += body;

    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open for writing: " + path.string());
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw DataError("failed writing " + path.string());
}

FrameStack read_frame_stack(const std::filesystem::path& path) {
    const std::string bytes = read_binary(path);
    const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (bytes.size() < 24 || std::memcmp(bytes.data(), kFrameMagic, 8) != 0)
        throw DataError(path.string() + ": not a frame stack file (bad magic)");
    Shape shape(4);
    for (int i = 0; i < 4; ++i) {
        shape[static_cast<std::size_t>(i)] = static_cast<Index>(u32le(p + 8 + 4 * i));
        if (shape[static_cast<std::size_t>(i)] <= 0)
            throw DataError(path.string() + ": nonpositive extent in header");
    }
    const std::size_t count = static_cast<std::size_t>(shape[0] * shape[1] * shape[2] * shape[3]);
    if (bytes.size() != 24 + count * 4)
        throw DataError(path.string() + ": payload size does not match header extents");
    Array data(static_cast<Index>(count));
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint32_t raw = u32le(p + 24 + 4 * i);
        float f;
        std::memcpy(&f, &raw, 4);
        data[static_cast<Index>(i)] = static_cast<Scalar>(f);
    }
    try {
        return make_frame_stack(Tensor::from_flat(std::move(shape), std::move(data)));
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void write_frame_stack(const std::filesystem::path& path, const FrameStack& fs) {
    std::string out(kFrameMagic, 8);
    for (int i = 0; i < 4; ++i) put_u32le(out, static_cast<std::uint32_t>(fs.data.shape()[static_cast<std::size_t>(i)]));
    for (Index i = 0; i < fs.data.size(); ++i) {
        const float f = static_cast<float>(fs.data.flat()[i]);
        std::uint32_t raw;
        std::memcpy(&raw, &f, 4);
        put_u32le(out, raw);
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open for writing: " + path.string());
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw DataError("failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) { return read_binary(path); }

void write_feature_file(const std::filesystem::path& path, const std::string& segment_id,
                        const FeatureVector& fv) {
    json j;
    j["segment_id"] = segment_id;
    j["modality"] = std::string(to_string(fv.modality));
    j["dim"] = fv.dim();
    j["values"] = std::vector<Scalar>(fv.values.data(), fv.values.data() + fv.values.size());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open for writing: " + path.string());
    f << j.dump(1) << "\n";
    if (!f) throw DataError("failed writing " + path.string());
}

FeatureFile read_feature_file(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_binary(path));
        FeatureFile out;
        out.segment_id = j.at("segment_id").get<std::string>();
        out.feature.modality = parse_modality(j.at("modality").get<std::string>());
        const Index dim = j.at("dim").get<Index>();
        std::vector<Scalar> vals = j.at("values").get<std::vector<Scalar>>();
        if (dim != static_cast<Index>(vals.size()))
            throw DataError(path.string() + ": dim field " + std::to_string(dim) + " does not match " +
                            std::to_string(vals.size()) + " values");
        out.feature.values = Vector(static_cast<Index>(vals.size()));
        for (Index i = 0; i < out.feature.values.size(); ++i)
            out.feature.values[i] = vals[static_cast<std::size_t>(i)];
        if (!out.feature.values.array().isFinite().all())
            throw DataError(path.string() + ": non-finite feature values");
        out.feature.source = FeatureSource::ExternalFile;
        return out;
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": malformed feature file: " + e.what());
    }
}

FeatureVector load_feature_file(const std::filesystem::path& path, ModalityId expected, Index expected_dim) {
    FeatureFile file = read_feature_file(path);
    if (file.feature.modality != expected)
        throw DataError(path.string() + ": modality is " + std::string(to_string(file.feature.modality)) +
                        ", expected " + std::string(to_string(expected)));
    if (expected_dim >= 0 && file.feature.dim() != expected_dim)
        throw DataError(path.string() + ": expected dim " + std::to_string(expected_dim) + ", found " +
                        std::to_string(file.feature.dim()));
    return std::move(file.feature);
}

std::string feature_filename(const std::string& segment_id, ModalityId modality) {
    return segment_id + "." + std::string(to_string(modality)) + ".json";
}

}  // namespace trifuse
