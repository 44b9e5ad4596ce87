#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "liftgraph/errors.hpp"
#include "liftgraph/model.hpp"

namespace liftgraph {

namespace {

constexpr char kMagic[8] = {'L', 'G', 'P', 'A', 'R', 'A', 'M', 'S'};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

class Reader {
   public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    template <typename T>
    T get_le() {
        need(sizeof(T));
        T value = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes_[pos_ + i]) << (8 * i);
        pos_ += sizeof(T);
        return value;
    }

    std::span<const std::uint8_t> take(std::size_t n) {
        need(n);
        auto s = bytes_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

    bool at_end() const { return pos_ == bytes_.size(); }

   private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw ParseError("parameter file truncated at byte " + std::to_string(pos_));
    }
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_params(const ModelParams& params) {
    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    put_le<std::uint32_t>(out, kParamFileVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
    for (const auto& [name, m] : params.entries()) {
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
        out.insert(out.end(), name.begin(), name.end());
        put_le<std::uint64_t>(out, m.rows());
        put_le<std::uint64_t>(out, m.cols());
    }
    for (const auto& [name, m] : params.entries()) {
        for (double v : m.data()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    }
    return out;
}

ModelParams deserialize_params(std::span<const std::uint8_t> bytes) {
    Reader in(bytes);
    const auto magic = in.take(sizeof(kMagic));
    if (std::memcmp(magic.data(), kMagic, sizeof(kMagic)) != 0) throw ParseError("not a parameter file (bad magic)");
    const auto version = in.get_le<std::uint32_t>();
    if (version != kParamFileVersion) {
        throw ParseError("parameter file version " + std::to_string(version) + " unsupported (expected " +
                         std::to_string(kParamFileVersion) + ")");
    }
    const auto count = in.get_le<std::uint32_t>();
    std::vector<ParamShape> table;
    table.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto len = in.get_le<std::uint32_t>();
        const auto name = in.take(len);
        ParamShape shape;
        shape.name.assign(name.begin(), name.end());
        shape.rows = static_cast<std::size_t>(in.get_le<std::uint64_t>());
        shape.cols = static_cast<std::size_t>(in.get_le<std::uint64_t>());
        table.push_back(std::move(shape));
    }
    ModelParams params;
    for (const ParamShape& shape : table) {
        Matrix m(shape.rows, shape.cols);
        for (double& v : m.data()) v = std::bit_cast<double>(in.get_le<std::uint64_t>());
        params.add(shape.name, std::move(m));
    }
    if (!in.at_end()) throw ParseError("trailing bytes after parameter values");
    return params;
}

void save_params(const ModelParams& params, const std::filesystem::path& path) {
    const auto bytes = serialize_params(params);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

ModelParams load_params(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open parameter file " + path.string());
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_params(bytes);
}

ModelParams load_params(const std::filesystem::path& path, const ModelConfig& config) {
    ModelParams params = load_params(path);
    check_params(params, config);
    return params;
}

}  // namespace liftgraph
