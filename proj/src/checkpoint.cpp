#include "slimnet/checkpoint.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "slimnet/errors.hpp"

namespace slimnet {

namespace {

constexpr char kMagic[8] = {'S', 'L', 'I', 'M', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double d) {
    std::uint64_t v;
    std::memcpy(&v, &d, sizeof v);
    put_u64(out, v);
}

class Reader {
public:
    Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    std::size_t offset() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

    const std::uint8_t* take(std::size_t n, const char* what) {
        if (remaining() < n) {
            throw FormatError("checkpoint truncated at offset " + std::to_string(pos_) + ": need " +
                              std::to_string(n) + " bytes for " + what + ", have " + std::to_string(remaining()));
        }
        const std::uint8_t* p = bytes_.data() + pos_;
        pos_ += n;
        return p;
    }

    std::uint32_t u32(const char* what) {
        const std::uint8_t* p = take(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
        return v;
    }

    std::uint64_t u64(const char* what) {
        const std::uint8_t* p = take(8, what);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
        return v;
    }

    double f64(const char* what) {
        const std::uint64_t v = u64(what);
        double d;
        std::memcpy(&d, &v, sizeof d);
        return d;
    }

private:
    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t n) {
    std::uint64_t h = 14695981039346656037ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= 1099511628211ULL;
    }
    return h;
}

std::vector<std::uint8_t> serialize_checkpoint(const Network& net) {
    std::vector<std::uint8_t> out;
    const std::string spec_json = net.spec().to_json();
    const std::vector<double> flat = net.flat_params();
    out.reserve(8 + 4 + 8 + spec_json.size() + 8 + 8 * flat.size() + 8);

    out.insert(out.end(), kMagic, kMagic + 8);
    put_u32(out, kVersion);
    put_u64(out, spec_json.size());
    out.insert(out.end(), spec_json.begin(), spec_json.end());
    put_u64(out, flat.size());
    for (double v : flat) put_f64(out, v);
    put_u64(out, fnv1a64(out.data(), out.size()));
    return out;
}

Network parse_checkpoint(const std::vector<std::uint8_t>& bytes) {
    Reader r(bytes);
    const std::uint8_t* magic = r.take(8, "magic");
    if (std::memcmp(magic, kMagic, 8) != 0) throw FormatError("checkpoint: bad magic at offset 0");
    const std::uint32_t version = r.u32("version");
    if (version != kVersion) {
        throw FormatError("checkpoint: unsupported version " + std::to_string(version) + " at offset 8");
    }

    const std::size_t json_len_at = r.offset();
    const std::uint64_t json_len = r.u64("architecture length");
    if (json_len > r.remaining()) {
        throw FormatError("checkpoint: architecture length " + std::to_string(json_len) + " at offset " +
                          std::to_string(json_len_at) + " exceeds remaining " + std::to_string(r.remaining()) +
                          " bytes");
    }
    const std::size_t json_at = r.offset();
    const std::uint8_t* json_bytes = r.take(static_cast<std::size_t>(json_len), "architecture");
    const std::string spec_json(reinterpret_cast<const char*>(json_bytes), static_cast<std::size_t>(json_len));

    const std::size_t count_at = r.offset();
    const std::uint64_t count = r.u64("parameter count");
    if (count > r.remaining() / 8) {
        throw FormatError("checkpoint: parameter count " + std::to_string(count) + " at offset " +
                          std::to_string(count_at) + " exceeds remaining bytes");
    }
    const std::size_t values_at = r.offset();
    std::vector<double> values(static_cast<std::size_t>(count));
    for (double& v : values) v = r.f64("parameter");

    const std::size_t checksum_at = r.offset();
    const std::uint64_t stored = r.u64("checksum");
    const std::uint64_t computed = fnv1a64(bytes.data(), checksum_at);
    if (stored != computed) {
        throw FormatError("checkpoint: checksum mismatch at offset " + std::to_string(checksum_at));
    }
    if (r.remaining() != 0) {
        throw FormatError("checkpoint: trailing data at offset " + std::to_string(r.offset()));
    }

    NetworkSpec spec;
    try {
        spec = NetworkSpec::from_json(spec_json);
    } catch (const ConfigError& e) {
        throw FormatError("checkpoint: invalid architecture at offset " + std::to_string(json_at) + ": " + e.what());
    }
    Network net = Network::zeros(std::move(spec));
    if (net.param_count() != values.size()) {
        throw FormatError("checkpoint: parameter count " + std::to_string(values.size()) + " at offset " +
                          std::to_string(count_at) + " does not match architecture (expects " +
                          std::to_string(net.param_count()) + ")");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw FormatError("checkpoint: non-finite parameter " + std::to_string(i) + " at offset " +
                              std::to_string(values_at + 8 * i));
        }
    }
    net.set_flat_params(values);
    return net;
}

void save_checkpoint(const Network& net, const std::string& path) {
    const std::vector<std::uint8_t> bytes = serialize_checkpoint(net);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ConfigError("failed writing checkpoint to '" + path + "'");
}

Network load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open checkpoint '" + path + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (!in.good() && !in.eof()) throw ConfigError("failed reading checkpoint '" + path + "'");
    return parse_checkpoint(bytes);
}

}  // namespace slimnet
