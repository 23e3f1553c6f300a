#include "simrecon/stack_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <type_traits>
#include <vector>

namespace simrecon {
namespace {

constexpr char kMagic[4] = {'S', 'I', 'M', 'S'};
constexpr std::uint16_t kVersion = 1;
constexpr std::uint32_t kMaxDim = 1u << 20;
constexpr std::uint32_t kMaxCount = 1u << 24;

template <typename T>
void put_le(std::string& buf, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(bytes, bytes + sizeof(T));
    buf.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(const unsigned char* p) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, p, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(bytes, bytes + sizeof(T));
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

void atomic_write(const std::string& path, const std::string& payload) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot open for writing: " + tmp.string());
        out.write(payload.data(), std::streamsize(payload.size()));
        out.flush();
        if (!out)
            throw IoError("short write: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot move temp file over " + path);
    }
}

} // namespace

void write_stack_file(const std::string& path, const Stack& stack, FileKind kind) {
    stack.validate();
    if (kind != FileKind::stack && stack.count() != 1)
        throw ConfigError("image/kernel files hold exactly one member");

    std::string buf;
    buf.reserve(32 + stack.grid.pixels() * stack.members.size() * 4);
    buf.append(kMagic, 4);
    put_le<std::uint16_t>(buf, kVersion);
    put_le<std::uint16_t>(buf, std::uint16_t(kind));
    put_le<std::uint32_t>(buf, std::uint32_t(stack.count()));
    put_le<std::uint32_t>(buf, std::uint32_t(stack.grid.width));
    put_le<std::uint32_t>(buf, std::uint32_t(stack.grid.height));
    put_le<double>(buf, stack.grid.pitch);
    if (kind == FileKind::stack)
        for (const auto& s : stack.shifts_um) {
            put_le<double>(buf, s[0]);
            put_le<double>(buf, s[1]);
        }
    for (const Image& m : stack.members)
        for (double v : m.v)
            put_le<float>(buf, float(v));
    atomic_write(path, buf);
}

void write_image_file(const std::string& path, const Image& img, FileKind kind) {
    Stack st;
    st.grid = img.grid;
    st.members.push_back(img);
    st.shifts_um.push_back({0.0, 0.0});
    write_stack_file(path, st, kind);
}

StackFileData read_stack_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open: " + path);
    std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto* p = reinterpret_cast<const unsigned char*>(raw.data());
    const std::size_t n = raw.size();

    if (n < 28 || std::memcmp(p, kMagic, 4) != 0)
        throw IoError("not a stack file (bad magic): " + path);
    const auto version = get_le<std::uint16_t>(p + 4);
    if (version != kVersion)
        throw IoError("unsupported stack file version " + std::to_string(version));
    const auto kind_raw = get_le<std::uint16_t>(p + 6);
    if (kind_raw > 2)
        throw IoError("unknown stack file kind " + std::to_string(kind_raw));
    const auto count = get_le<std::uint32_t>(p + 8);
    const auto width = get_le<std::uint32_t>(p + 12);
    const auto height = get_le<std::uint32_t>(p + 16);
    const double pitch = get_le<double>(p + 20);
    if (count == 0 || count > kMaxCount || width == 0 || width > kMaxDim || height == 0 ||
        height > kMaxDim)
        throw IoError("implausible stack file header: " + path);
    const FileKind kind = FileKind(kind_raw);
    if (kind != FileKind::stack && count != 1)
        throw IoError("image/kernel file with more than one member: " + path);
    if (!(pitch > 0.0) || !std::isfinite(pitch))
        throw IoError("invalid pitch in stack file: " + path);

    std::size_t off = 28;
    const std::size_t shift_bytes = (kind == FileKind::stack) ? std::size_t(count) * 16 : 0;
    const std::size_t pix = std::size_t(width) * height;
    const std::size_t payload_bytes = pix * count * 4;
    if (n != off + shift_bytes + payload_bytes)
        throw IoError("stack file truncated or oversized: " + path);

    StackFileData data;
    data.kind = kind;
    data.stack.grid = GridSpec{int(width), int(height), pitch};
    data.stack.shifts_um.resize(count, {0.0, 0.0});
    if (kind == FileKind::stack)
        for (std::uint32_t i = 0; i < count; ++i) {
            data.stack.shifts_um[i][0] = get_le<double>(p + off + std::size_t(i) * 16);
            data.stack.shifts_um[i][1] = get_le<double>(p + off + std::size_t(i) * 16 + 8);
        }
    off += shift_bytes;

    data.stack.members.reserve(count);
    for (std::uint32_t m = 0; m < count; ++m) {
        Image img(data.stack.grid);
        for (std::size_t i = 0; i < pix; ++i)
            img.v[i] = double(get_le<float>(p + off + (std::size_t(m) * pix + i) * 4));
        data.stack.members.push_back(std::move(img));
    }
    return data;
}

Image read_image_file(const std::string& path) {
    StackFileData d = read_stack_file(path);
    if (d.kind == FileKind::stack && d.stack.count() != 1)
        throw IoError("expected a single image, found a stack: " + path);
    return std::move(d.stack.members.front());
}

void write_pgm(const std::string& path, const Image& img) {
    img.grid.validate();
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : img.v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double scale = (hi > lo) ? 65535.0 / (hi - lo) : 0.0;
    std::string buf = "P5\n" + std::to_string(img.grid.width) + " " +
                      std::to_string(img.grid.height) + "\n65535\n";
    buf.reserve(buf.size() + img.size() * 2);
    for (double v : img.v) {
        const auto g = std::uint16_t((v - lo) * scale);
        buf.push_back(char(g >> 8)); // PGM is big-endian
        buf.push_back(char(g & 0xff));
    }
    atomic_write(path, buf);
}

} // namespace simrecon
