#include "jano/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace jano {

static_assert(std::endian::native == std::endian::little,
              "latent format assumes a little-endian host");
static_assert(sizeof(float) == 4);

namespace {
constexpr char kMagic[4] = {'J', 'A', 'N', 'O'};
constexpr size_t kHeaderBytes = 24;
}  // namespace

void save_latent(const LatentTensor& tensor, const std::filesystem::path& path) {
    tensor.validate();
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("save_latent: cannot open " + path.string() + " for writing");
    f.write(kMagic, 4);
    const uint32_t header[5] = {kLatentFormatVersion, tensor.channels, tensor.frames,
                                tensor.height, tensor.width};
    f.write(reinterpret_cast<const char*>(header), sizeof(header));
    f.write(reinterpret_cast<const char*>(tensor.data.data()),
            static_cast<std::streamsize>(tensor.data.size() * sizeof(float)));
    if (!f) throw Error("save_latent: write failed for " + path.string());
}

LatentTensor load_latent(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    if (!f) throw Error("load_latent: cannot open " + path.string());
    const uint64_t file_size = static_cast<uint64_t>(f.tellg());
    f.seekg(0);

    if (file_size < kHeaderBytes)
        throw FormatError("load_latent: truncated header in " + path.string(), file_size);

    char magic[4];
    f.read(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError("load_latent: bad magic in " + path.string(), 0);

    uint32_t header[5];
    f.read(reinterpret_cast<char*>(header), sizeof(header));
    if (header[0] != kLatentFormatVersion)
        throw FormatError("load_latent: unsupported version " + std::to_string(header[0]), 4);

    const uint32_t c = header[1], fr = header[2], h = header[3], w = header[4];
    if (c == 0 || fr == 0 || h == 0 || w == 0)
        throw FormatError("load_latent: zero dimension in header", 8);

    const uint64_t cells = static_cast<uint64_t>(c) * fr * h * w;
    const uint64_t expected = kHeaderBytes + cells * sizeof(float);
    if (file_size != expected)
        throw FormatError("load_latent: payload length " + std::to_string(file_size - kHeaderBytes) +
                              " bytes, header dims require " + std::to_string(cells * sizeof(float)),
                          std::min<uint64_t>(file_size, expected));

    LatentTensor t;
    t.channels = c;
    t.frames = fr;
    t.height = h;
    t.width = w;
    t.data.resize(cells);
    f.read(reinterpret_cast<char*>(t.data.data()), static_cast<std::streamsize>(cells * sizeof(float)));
    if (!f) throw FormatError("load_latent: payload read failed", kHeaderBytes);

    for (size_t i = 0; i < t.data.size(); ++i) {
        if (!std::isfinite(t.data[i]))
            throw FormatError("load_latent: non-finite value at element " + std::to_string(i),
                              kHeaderBytes + i * sizeof(float));
    }
    return t;
}

}  // namespace jano
