#include "snmc/table.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace snmc {

EvaluationTable::EvaluationTable(std::int64_t p, std::int64_t n, std::int64_t m, std::int64_t l,
                                 std::uint64_t seed)
    : p_(p), n_(n), m_(m), l_(l), seed_(seed) {
    if (p < 1 || n < 1 || m < 1 || l < 1) {
        throw ValidationError("evaluation table: p, n, m, l must all be >= 1");
    }
    design_x_.assign(static_cast<std::size_t>(n * p), 0.0);
    design_xt_.assign(static_cast<std::size_t>(n * p), 0.0);
    values_.assign(static_cast<std::size_t>(branch_count()),
                   std::vector<double>(static_cast<std::size_t>(n * m), 0.0));
    masks_.assign(static_cast<std::size_t>(branch_count()),
                  std::vector<std::uint8_t>(static_cast<std::size_t>((n * m + 7) / 8), 0));
}

void EvaluationTable::set_design(std::int64_t i, const double* x, const double* x_frozen) {
    std::memcpy(&design_x_[static_cast<std::size_t>(i * p_)], x, sizeof(double) * static_cast<std::size_t>(p_));
    std::memcpy(&design_xt_[static_cast<std::size_t>(i * p_)], x_frozen, sizeof(double) * static_cast<std::size_t>(p_));
}

const double* EvaluationTable::design_base(std::int64_t i) const {
    return &design_x_[static_cast<std::size_t>(i * p_)];
}

const double* EvaluationTable::design_frozen(std::int64_t i) const {
    return &design_xt_[static_cast<std::size_t>(i * p_)];
}

void EvaluationTable::check_cell(std::int64_t branch, std::int64_t i, std::int64_t k) const {
    if (branch < 0 || branch >= branch_count() || i < 0 || i >= n_ || k < 0 || k >= m_) {
        throw ValidationError("evaluation table: cell (" + std::to_string(branch) + ", " +
                              std::to_string(i) + ", " + std::to_string(k) + ") out of range");
    }
}

void EvaluationTable::fill(std::int64_t branch, std::int64_t i, std::int64_t k, double value) {
    check_cell(branch, i, k);
    const std::size_t idx = cell_index(i, k);
    auto& mask = masks_[static_cast<std::size_t>(branch)];
    const std::uint8_t bit = static_cast<std::uint8_t>(1u << (idx % 8));
    if (mask[idx / 8] & bit) {
        throw ValidationError("evaluation table: cell written twice");
    }
    values_[static_cast<std::size_t>(branch)][idx] = value;
    mask[idx / 8] = static_cast<std::uint8_t>(mask[idx / 8] | bit);
}

bool EvaluationTable::filled(std::int64_t branch, std::int64_t i, std::int64_t k) const {
    check_cell(branch, i, k);
    const std::size_t idx = cell_index(i, k);
    return (masks_[static_cast<std::size_t>(branch)][idx / 8] >> (idx % 8)) & 1u;
}

double EvaluationTable::value(std::int64_t branch, std::int64_t i, std::int64_t k) const {
    if (!filled(branch, i, k)) {
        throw ValidationError("evaluation table: reading unfilled cell");
    }
    return values_[static_cast<std::size_t>(branch)][cell_index(i, k)];
}

std::int64_t EvaluationTable::filled_count() const {
    std::int64_t total = 0;
    for (const auto& mask : masks_) {
        for (std::uint8_t byte : mask) total += std::popcount(byte);
    }
    return total;
}

std::vector<double> EvaluationTable::branch_values(std::int64_t branch, std::int64_t rows,
                                                   std::int64_t cols) const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(rows * cols));
    for (std::int64_t i = 0; i < rows; ++i) {
        for (std::int64_t k = 0; k < cols; ++k) {
            out.push_back(value(branch, i, k));
        }
    }
    return out;
}

bool EvaluationTable::operator==(const EvaluationTable& other) const {
    return p_ == other.p_ && n_ == other.n_ && m_ == other.m_ && l_ == other.l_ &&
           seed_ == other.seed_ && design_x_ == other.design_x_ &&
           design_xt_ == other.design_xt_ && values_ == other.values_ && masks_ == other.masks_;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[5] = {'S', 'N', 'M', 'C', '1'};

struct Fnv1a {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    void update(const void* data, std::size_t size) {
        const auto* bytes = static_cast<const std::uint8_t*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            hash ^= bytes[i];
            hash *= 0x100000001b3ull;
        }
    }
};

class Writer {
public:
    explicit Writer(std::ofstream& out) : out_(out) {}

    void bytes(const void* data, std::size_t size) {
        out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
        hash_.update(data, size);
    }
    void u32(std::uint32_t v) {
        std::uint8_t b[4];
        for (int i = 0; i < 4; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
        bytes(b, 4);
    }
    void u64(std::uint64_t v) {
        std::uint8_t b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
        bytes(b, 8);
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    std::uint64_t checksum() const { return hash_.hash; }

private:
    std::ofstream& out_;
    Fnv1a hash_;
};

class Reader {
public:
    explicit Reader(std::ifstream& in) : in_(in) {}

    void bytes(void* data, std::size_t size) {
        in_.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
        if (in_.gcount() != static_cast<std::streamsize>(size)) {
            throw TableIoError("evaluation table file is truncated");
        }
        hash_.update(data, size);
    }
    std::uint32_t u32() {
        std::uint8_t b[4];
        bytes(b, 4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        std::uint8_t b[8];
        bytes(b, 8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::uint64_t checksum() const { return hash_.hash; }

private:
    std::ifstream& in_;
    Fnv1a hash_;
};

} // namespace

void save_table(const EvaluationTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw TableIoError("cannot open '" + path + "' for writing");
    Writer w(out);
    w.bytes(kMagic, sizeof(kMagic));
    w.u32(static_cast<std::uint32_t>(table.p_));
    w.u64(static_cast<std::uint64_t>(table.n_));
    w.u64(static_cast<std::uint64_t>(table.m_));
    w.u32(static_cast<std::uint32_t>(table.l_));
    w.u64(table.seed_);
    w.u32(static_cast<std::uint32_t>(table.branch_count()));
    for (double v : table.design_x_) w.f64(v);
    for (double v : table.design_xt_) w.f64(v);
    for (std::int64_t b = 0; b < table.branch_count(); ++b) {
        for (double v : table.values_[static_cast<std::size_t>(b)]) w.f64(v);
        const auto& mask = table.masks_[static_cast<std::size_t>(b)];
        w.bytes(mask.data(), mask.size());
    }
    const std::uint64_t checksum = w.checksum();
    std::uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(checksum >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
    if (!out) throw TableIoError("write to '" + path + "' failed");
}

EvaluationTable load_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TableIoError("cannot open '" + path + "' for reading");
    Reader r(in);
    char magic[5];
    r.bytes(magic, sizeof(magic));
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw TableIoError("'" + path + "' is not an SNMC1 evaluation table (version mismatch)");
    }
    const std::uint32_t p = r.u32();
    const std::uint64_t n = r.u64();
    const std::uint64_t m = r.u64();
    const std::uint32_t l = r.u32();
    const std::uint64_t seed = r.u64();
    const std::uint32_t branches = r.u32();
    if (p < 1 || n < 1 || m < 1 || l < 1 || branches != l + 1) {
        throw TableIoError("'" + path + "' has an invalid header");
    }
    EvaluationTable table(static_cast<std::int64_t>(p), static_cast<std::int64_t>(n),
                          static_cast<std::int64_t>(m), static_cast<std::int64_t>(l), seed);
    for (double& v : table.design_x_) v = r.f64();
    for (double& v : table.design_xt_) v = r.f64();
    for (std::uint32_t b = 0; b < branches; ++b) {
        for (double& v : table.values_[b]) v = r.f64();
        auto& mask = table.masks_[b];
        r.bytes(mask.data(), mask.size());
    }
    const std::uint64_t computed = r.checksum();
    std::uint8_t tail[8];
    in.read(reinterpret_cast<char*>(tail), 8);
    if (in.gcount() != 8) throw TableIoError("evaluation table file is truncated");
    std::uint64_t stored = 0;
    for (int i = 0; i < 8; ++i) stored |= static_cast<std::uint64_t>(tail[i]) << (8 * i);
    if (stored != computed) {
        throw TableIoError("'" + path + "' failed its checksum");
    }
    return table;
}

void require_table_shape(const EvaluationTable& table, std::int64_t p,
                         std::optional<std::int64_t> n, std::optional<std::int64_t> m,
                         std::optional<std::int64_t> l) {
    if (table.dimension() != p) {
        throw DimensionMismatch("evaluation table has p = " + std::to_string(table.dimension()) +
                                ", run expects p = " + std::to_string(p));
    }
    if (n && table.explorations() != *n) {
        throw DimensionMismatch("evaluation table has n = " + std::to_string(table.explorations()) +
                                ", run expects n = " + std::to_string(*n));
    }
    if (m && table.repetitions() != *m) {
        throw DimensionMismatch("evaluation table has m = " + std::to_string(table.repetitions()) +
                                ", run expects m = " + std::to_string(*m));
    }
    if (l && table.group_count() != *l) {
        throw DimensionMismatch("evaluation table has l = " + std::to_string(table.group_count()) +
                                ", run expects l = " + std::to_string(*l));
    }
}

} // namespace snmc
