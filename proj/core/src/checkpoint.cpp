#include "actnow/errors.hpp"
#include "actnow/lade.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

namespace actnow {
namespace {

constexpr std::array<char, 8> kMagic = {'A', 'C', 'T', 'N', 'O', 'W', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
T swap_to_little(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) {
            std::swap(b[i], b[sizeof(T) - 1 - i]);
        }
        std::memcpy(&v, b, sizeof(T));
    }
    return v;
}

class Writer {
public:
    explicit Writer(const std::filesystem::path& p) : out_(p, std::ios::binary | std::ios::trunc) {
        if (!out_) throw IoError("cannot write " + p.string());
    }
    template <typename T>
    void put(T v) {
        v = swap_to_little(v);
        out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
    }
    void bytes(const char* d, std::size_t n) { out_.write(d, static_cast<std::streamsize>(n)); }
    void finish(const std::filesystem::path& p) {
        out_.flush();
        if (!out_) throw IoError("write failed for " + p.string());
    }

private:
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const std::filesystem::path& p) : in_(p, std::ios::binary), path_(p) {
        if (!in_) throw IoError("cannot open " + p.string());
    }
    template <typename T>
    T get() {
        T v{};
        in_.read(reinterpret_cast<char*>(&v), sizeof(T));
        if (in_.gcount() != static_cast<std::streamsize>(sizeof(T))) {
            throw IoError("checkpoint truncated: " + path_.string());
        }
        return swap_to_little(v);
    }
    std::string str(std::size_t n) {
        std::string s(n, '\0');
        in_.read(s.data(), static_cast<std::streamsize>(n));
        if (in_.gcount() != static_cast<std::streamsize>(n)) {
            throw IoError("checkpoint truncated: " + path_.string());
        }
        return s;
    }
    bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

private:
    std::ifstream in_;
    std::filesystem::path path_;
};

struct Entry {
    std::string name;
    Matrix* tensor;
};

std::vector<Entry> manifest(LadeModel& m) {
    std::vector<Entry> out;
    for (auto& [name, t] : m.named_params()) {
        out.push_back({name, t});
    }
    const std::pair<const char*, AdamState*> opts[] = {{"opt_stat", &m.opt_stat},
                                                       {"opt_norm", &m.opt_norm}};
    for (const auto& [prefix, opt] : opts) {
        for (std::size_t i = 0; i < opt->m.size(); ++i) {
            out.push_back({std::string(prefix) + ".m." + std::to_string(i), &opt->m[i]});
        }
        for (std::size_t i = 0; i < opt->v.size(); ++i) {
            out.push_back({std::string(prefix) + ".v." + std::to_string(i), &opt->v[i]});
        }
    }
    return out;
}

} // namespace

void save_checkpoint(const LadeModel& model, const std::filesystem::path& path) {
    LadeModel copy = model;
    const auto entries = manifest(copy);
    Writer w(path);
    w.bytes(kMagic.data(), kMagic.size());
    w.put<std::uint32_t>(kVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(entries.size()));
    for (const auto& e : entries) {
        w.put<std::uint32_t>(static_cast<std::uint32_t>(e.name.size()));
        w.bytes(e.name.data(), e.name.size());
        w.put<std::uint64_t>(static_cast<std::uint64_t>(e.tensor->rows()));
        w.put<std::uint64_t>(static_cast<std::uint64_t>(e.tensor->cols()));
    }
    const LadeConfig& cfg = model.config();
    w.put<double>(cfg.eps);
    w.put<double>(cfg.lr_stat);
    w.put<double>(cfg.lr_norm);
    for (const AdamState* opt : {&model.opt_stat, &model.opt_norm}) {
        w.put<double>(opt->lr);
        w.put<double>(opt->beta1);
        w.put<double>(opt->beta2);
        w.put<double>(opt->eps);
        w.put<std::int64_t>(opt->step);
    }
    for (const auto& e : entries) {
        for (Index r = 0; r < e.tensor->rows(); ++r) {
            for (Index c = 0; c < e.tensor->cols(); ++c) {
                w.put<double>((*e.tensor)(r, c));
            }
        }
    }
    w.finish(path);
}

LadeModel load_checkpoint(const std::filesystem::path& path) {
    Reader r(path);
    if (r.str(kMagic.size()) != std::string(kMagic.data(), kMagic.size())) {
        throw IoError("not a checkpoint: " + path.string());
    }
    if (const auto v = r.get<std::uint32_t>(); v != kVersion) {
        throw IoError("unsupported checkpoint version " + std::to_string(v));
    }
    const auto count = r.get<std::uint32_t>();
    struct Shape {
        std::string name;
        std::uint64_t rows, cols;
    };
    std::vector<Shape> shapes;
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto len = r.get<std::uint32_t>();
        Shape s{r.str(len), 0, 0};
        s.rows = r.get<std::uint64_t>();
        s.cols = r.get<std::uint64_t>();
        shapes.push_back(std::move(s));
    }
    auto find = [&shapes](const std::string& name) -> const Shape& {
        for (const auto& s : shapes) {
            if (s.name == name) return s;
        }
        throw ShapeMismatch("checkpoint lacks tensor " + name);
    };

    LadeConfig cfg;
    cfg.in_len = static_cast<Index>(find("norm.w1").cols);
    cfg.hidden = static_cast<Index>(find("norm.w1").rows);
    cfg.out_len = static_cast<Index>(find("norm.w2").rows);
    cfg.eps = r.get<double>();
    cfg.lr_stat = r.get<double>();
    cfg.lr_norm = r.get<double>();

    LadeModel m = LadeModel::init(cfg, 0);
    for (AdamState* opt : {&m.opt_stat, &m.opt_norm}) {
        opt->lr = r.get<double>();
        opt->beta1 = r.get<double>();
        opt->beta2 = r.get<double>();
        opt->eps = r.get<double>();
        opt->step = r.get<std::int64_t>();
    }
    const auto entries = manifest(m);
    if (entries.size() != shapes.size()) {
        throw ShapeMismatch("checkpoint tensor count " + std::to_string(shapes.size()) +
                            " does not match model (" + std::to_string(entries.size()) + ")");
    }
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const Shape& s = shapes[i];
        Matrix& t = *entries[i].tensor;
        if (s.name != entries[i].name || s.rows != static_cast<std::uint64_t>(t.rows()) ||
            s.cols != static_cast<std::uint64_t>(t.cols())) {
            throw ShapeMismatch("checkpoint tensor '" + s.name + "' does not match model layout");
        }
    }
    for (const auto& e : entries) {
        for (Index row = 0; row < e.tensor->rows(); ++row) {
            for (Index col = 0; col < e.tensor->cols(); ++col) {
                (*e.tensor)(row, col) = r.get<double>();
            }
        }
    }
    if (!r.at_end()) {
        throw IoError("trailing bytes in checkpoint " + path.string());
    }
    return m;
}

} // namespace actnow
