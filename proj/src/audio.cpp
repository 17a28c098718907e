#include "svs/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "svs/common.hpp"

namespace svs {

namespace {

uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

uint16_t read_u16(std::istream& in) {
    unsigned char b[2];
    in.read(reinterpret_cast<char*>(b), 2);
    return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

void write_u32(std::ostream& out, uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                                static_cast<unsigned char>((v >> 8) & 0xff),
                                static_cast<unsigned char>((v >> 16) & 0xff),
                                static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void write_u16(std::ostream& out, uint16_t v) {
    const unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                                static_cast<unsigned char>((v >> 8) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 2);
}

}  // namespace

Wav read_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open wav file: " + path.string());

    char tag[4];
    in.read(tag, 4);
    if (std::memcmp(tag, "RIFF", 4) != 0) throw DataError("not a RIFF file: " + path.string());
    read_u32(in);  // riff size
    in.read(tag, 4);
    if (std::memcmp(tag, "WAVE", 4) != 0) throw DataError("not a WAVE file: " + path.string());

    Wav wav;
    uint16_t channels = 0;
    uint16_t bits = 0;
    bool have_fmt = false;

    while (in.read(tag, 4)) {
        const uint32_t chunk_size = read_u32(in);
        if (std::memcmp(tag, "fmt ", 4) == 0) {
            const uint16_t format = read_u16(in);
            channels = read_u16(in);
            wav.sample_rate = static_cast<int>(read_u32(in));
            read_u32(in);  // byte rate
            read_u16(in);  // block align
            bits = read_u16(in);
            if (chunk_size > 16) in.seekg(chunk_size - 16, std::ios::cur);
            if (format != 1 || bits != 16) {
                throw DataError("unsupported wav encoding (want 16-bit PCM): " + path.string());
            }
            have_fmt = true;
        } else if (std::memcmp(tag, "data", 4) == 0) {
            if (!have_fmt) throw DataError("wav data chunk before fmt: " + path.string());
            const size_t n_samples = chunk_size / 2;
            std::vector<int16_t> raw(n_samples);
            in.read(reinterpret_cast<char*>(raw.data()),
                    static_cast<std::streamsize>(chunk_size));
            if (!in) throw DataError("truncated wav data: " + path.string());
            const size_t frames = channels > 0 ? n_samples / channels : 0;
            wav.samples.resize(frames);
            for (size_t i = 0; i < frames; ++i) {
                // downmix to mono
                int acc = 0;
                for (int c = 0; c < channels; ++c) acc += raw[i * channels + c];
                wav.samples[i] = static_cast<float>(acc) / (32768.0f * channels);
            }
            return wav;
        } else {
            in.seekg(chunk_size + (chunk_size & 1), std::ios::cur);
        }
    }
    throw DataError("wav file has no data chunk: " + path.string());
}

void write_wav(const std::filesystem::path& path, const std::vector<float>& samples,
               int sample_rate) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write wav file: " + path.string());

    const uint32_t data_bytes = static_cast<uint32_t>(samples.size() * 2);
    out.write("RIFF", 4);
    write_u32(out, 36 + data_bytes);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    write_u32(out, 16);
    write_u16(out, 1);  // PCM
    write_u16(out, 1);  // mono
    write_u32(out, static_cast<uint32_t>(sample_rate));
    write_u32(out, static_cast<uint32_t>(sample_rate * 2));
    write_u16(out, 2);
    write_u16(out, 16);
    out.write("data", 4);
    write_u32(out, data_bytes);
    for (float s : samples) {
        const float c = std::clamp(s, -1.0f, 1.0f);
        const int16_t q = static_cast<int16_t>(std::lrint(c * 32767.0f));
        write_u16(out, static_cast<uint16_t>(q));
    }
    if (!out) throw DataError("failed writing wav data: " + path.string());
}

double rms(const std::vector<float>& samples) {
    if (samples.empty()) return 0.0;
    double acc = 0.0;
    for (float s : samples) acc += static_cast<double>(s) * s;
    return std::sqrt(acc / static_cast<double>(samples.size()));
}

}  // namespace svs
