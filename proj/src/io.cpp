#include "spadrng/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "bulk file paths assume a little-endian host");

namespace spadrng::io {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

File open_or_throw(const std::string& path, const char* mode) {
    std::FILE* f = std::fopen(path.c_str(), mode);
    if (!f) throw std::runtime_error("cannot open " + path);
    return File(f);
}

void write_raw(std::FILE* f, const void* p, size_t n, const std::string& path) {
    if (n && std::fwrite(p, 1, n, f) != n)
        throw std::runtime_error("short write to " + path);
}

void read_raw(std::FILE* f, void* p, size_t n, const std::string& path) {
    if (n && std::fread(p, 1, n, f) != n)
        throw std::runtime_error("unexpected end of " + path);
}

void put_u64(std::FILE* f, uint64_t v, const std::string& path) {
    write_raw(f, &v, 8, path);
}
void put_u32(std::FILE* f, uint32_t v, const std::string& path) {
    write_raw(f, &v, 4, path);
}
void put_u16(std::FILE* f, uint16_t v, const std::string& path) {
    write_raw(f, &v, 2, path);
}
uint64_t get_u64(std::FILE* f, const std::string& path) {
    uint64_t v;
    read_raw(f, &v, 8, path);
    return v;
}
uint32_t get_u32(std::FILE* f, const std::string& path) {
    uint32_t v;
    read_raw(f, &v, 4, path);
    return v;
}
uint16_t get_u16(std::FILE* f, const std::string& path) {
    uint16_t v;
    read_raw(f, &v, 2, path);
    return v;
}

void check_magic(std::FILE* f, const char* magic, const std::string& path) {
    char buf[8];
    read_raw(f, buf, 8, path);
    if (std::memcmp(buf, magic, 8) != 0)
        throw std::runtime_error(path + ": bad magic, expected " + magic);
}

uint64_t seconds_to_fs(double s) {
    return static_cast<uint64_t>(std::llround(s * 1e15));
}

} // namespace

void write_events(const std::string& path, const PhotonEventStream& ev) {
    File f = open_or_throw(path, "wb");
    write_raw(f.get(), "QRNGEVT1", 8, path);
    put_u64(f.get(), seconds_to_fs(ev.tick_s), path);
    put_u64(f.get(), ev.t.size(), path);
    write_raw(f.get(), ev.t.data(), ev.t.size() * 8, path);
}

PhotonEventStream read_events(const std::string& path) {
    File f = open_or_throw(path, "rb");
    check_magic(f.get(), "QRNGEVT1", path);
    PhotonEventStream ev;
    ev.tick_s = static_cast<double>(get_u64(f.get(), path)) * 1e-15;
    const uint64_t count = get_u64(f.get(), path);
    ev.t.resize(count);
    read_raw(f.get(), ev.t.data(), count * 8, path);
    ev.tick_count = count ? ev.t.back() + 1 : 0;
    return ev;
}

void write_labels(const std::string& path, const std::vector<EventKind>& labels) {
    File f = open_or_throw(path, "wb");
    write_raw(f.get(), "QRNGLBL1", 8, path);
    put_u64(f.get(), labels.size(), path);
    write_raw(f.get(), labels.data(), labels.size(), path);
}

std::vector<EventKind> read_labels(const std::string& path) {
    File f = open_or_throw(path, "rb");
    check_magic(f.get(), "QRNGLBL1", path);
    const uint64_t count = get_u64(f.get(), path);
    std::vector<EventKind> labels(count);
    read_raw(f.get(), labels.data(), count, path);
    for (EventKind k : labels)
        if (static_cast<uint8_t>(k) > 2)
            throw std::runtime_error(path + ": unknown event kind");
    return labels;
}

void write_bits(const std::string& path, const BitVector& bits,
                double sample_period_s) {
    File f = open_or_throw(path, "wb");
    write_raw(f.get(), "QRNGBIT1", 8, path);
    put_u64(f.get(), seconds_to_fs(sample_period_s), path);
    put_u64(f.get(), bits.size(), path);
    // Word layout is already the on-disk byte order.
    write_raw(f.get(), bits.words().data(), (bits.size() + 7) / 8, path);
}

BitsFile read_bits(const std::string& path) {
    File f = open_or_throw(path, "rb");
    check_magic(f.get(), "QRNGBIT1", path);
    BitsFile out;
    out.sample_period_s = static_cast<double>(get_u64(f.get(), path)) * 1e-15;
    const uint64_t n_bits = get_u64(f.get(), path);
    const uint64_t n_bytes = (n_bits + 7) / 8;
    std::vector<uint64_t> words((n_bits + 63) / 64, 0);
    read_raw(f.get(), words.data(), n_bytes, path);
    out.bits.reserve_bits(n_bits);
    const uint64_t full = n_bits / 64;
    for (uint64_t i = 0; i < full; ++i) out.bits.append_bits(words[i], 64);
    if (n_bits % 64) out.bits.append_bits(words[full], n_bits % 64);
    return out;
}

void write_tags(const std::string& path, const std::vector<TagFrame>& frames,
                double frame_time_s) {
    File f = open_or_throw(path, "wb");
    write_raw(f.get(), "QRNGTAG1", 8, path);
    put_u64(f.get(), seconds_to_fs(frame_time_s), path);
    const uint32_t n_pixels =
        frames.empty() ? 0 : static_cast<uint32_t>(frames[0].pixels.size());
    put_u32(f.get(), n_pixels, path);
    for (const TagFrame& fr : frames) {
        if (fr.pixels.size() != n_pixels)
            throw std::runtime_error(path + ": ragged frame");
        for (const std::vector<Tag>& tags : fr.pixels) {
            if (tags.size() > 0xFFFF)
                throw std::runtime_error(path + ": too many tags in one frame");
            put_u16(f.get(), static_cast<uint16_t>(tags.size()), path);
            for (const Tag& t : tags) {
                put_u32(f.get(), t.coarse, path);
                write_raw(f.get(), &t.fine, 1, path);
            }
        }
    }
}

TagsFile read_tags(const std::string& path) {
    File f = open_or_throw(path, "rb");
    check_magic(f.get(), "QRNGTAG1", path);
    TagsFile out;
    out.frame_time_s = static_cast<double>(get_u64(f.get(), path)) * 1e-15;
    out.n_pixels = get_u32(f.get(), path);
    for (;;) {
        int probe = std::fgetc(f.get());
        if (probe == EOF) break;
        std::ungetc(probe, f.get());
        TagFrame fr;
        fr.pixels.resize(out.n_pixels);
        fr.saturated.assign(out.n_pixels, 0);
        for (uint32_t p = 0; p < out.n_pixels; ++p) {
            const uint16_t count = get_u16(f.get(), path);
            fr.pixels[p].resize(count);
            for (uint16_t i = 0; i < count; ++i) {
                fr.pixels[p][i].coarse = get_u32(f.get(), path);
                read_raw(f.get(), &fr.pixels[p][i].fine, 1, path);
            }
        }
        out.frames.push_back(std::move(fr));
    }
    return out;
}

} // namespace spadrng::io
