#pragma once

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "adapsne/controller.hpp"
#include "adapsne/dataset.hpp"
#include "adapsne/errors.hpp"
#include "adapsne/matrix.hpp"

// Dataset ingestion and artifact emission.
//
// csv:    one sample per line, comma-separated decimal floats, optional
//         header line (detected by a non-numeric first token).
// rawmat: little-endian binary. Magic "ADSN", format version u32 = 1,
//         N u64, D u64, then N*D float32 row-major.
//
// All emitted numbers use the shortest representation that round-trips, so
// identical runs produce identical bytes.

namespace adapsne {

enum class DataFormat { auto_detect, csv, rawmat };

inline std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

namespace detail {

inline constexpr std::array<char, 4> kRawmatMagic = {'A', 'D', 'S', 'N'};
inline constexpr std::uint32_t kRawmatVersion = 1;

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline std::uint32_t get_u32(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

inline std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

inline bool parses_as_double(std::string_view token) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
    return ec == std::errc{} && ptr == token.data() + token.size();
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

}  // namespace detail

inline Dataset load_csv_text(std::string_view text, const std::string& origin = "<memory>") {
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool first_data_line = true;
    while (pos < text.size()) {
        const std::size_t eol = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;

        std::vector<std::string_view> tokens;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            tokens.push_back(line.substr(start, comma - start));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }

        if (first_data_line && !detail::parses_as_double(tokens[0])) {
            first_data_line = false;  // header line
            continue;
        }
        first_data_line = false;

        std::vector<double> row;
        row.reserve(tokens.size());
        for (const auto tok : tokens) {
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec != std::errc{} || ptr != tok.data() + tok.size())
                throw DataError(origin + ": line " + std::to_string(line_no) +
                                ": cannot parse '" + std::string(tok) + "' as a number");
            if (!std::isfinite(v))
                throw DataError(origin + ": line " + std::to_string(line_no) +
                                ": non-finite value");
            row.push_back(v);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw DataError(origin + ": line " + std::to_string(line_no) + ": ragged row (" +
                            std::to_string(row.size()) + " columns, expected " +
                            std::to_string(rows.front().size()) + ")");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError(origin + ": no data rows");

    Matrix features(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        std::copy(rows[i].begin(), rows[i].end(), features.row(i).begin());
    return make_dataset(std::move(features));
}

inline Dataset load_rawmat_bytes(std::string_view bytes, const std::string& origin = "<memory>") {
    constexpr std::size_t header = 4 + 4 + 8 + 8;
    if (bytes.size() < header)
        throw DataError(origin + ": truncated header at byte offset " +
                        std::to_string(bytes.size()));
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (std::memcmp(p, detail::kRawmatMagic.data(), 4) != 0)
        throw DataError(origin + ": bad magic, not a rawmat file");
    const std::uint32_t version = detail::get_u32(p + 4);
    if (version != detail::kRawmatVersion)
        throw DataError(origin + ": unsupported rawmat version " + std::to_string(version));
    const std::uint64_t n = detail::get_u64(p + 8);
    const std::uint64_t d = detail::get_u64(p + 16);
    if (n == 0 || d == 0) throw DataError(origin + ": empty matrix");
    if (n > (1ULL << 32) || d > (1ULL << 32) || n * d > (1ULL << 34))
        throw DataError(origin + ": matrix dimensions too large");

    const std::uint64_t expected = header + n * d * 4;
    if (bytes.size() < expected)
        throw DataError(origin + ": truncated payload, file ends at byte offset " +
                        std::to_string(bytes.size()) + ", expected " + std::to_string(expected));

    Matrix features(n, d);
    const unsigned char* q = p + header;
    for (std::uint64_t i = 0; i < n * d; ++i) {
        const std::uint32_t raw = detail::get_u32(q + i * 4);
        const float f = std::bit_cast<float>(raw);
        if (!std::isfinite(f))
            throw DataError(origin + ": non-finite value at element " + std::to_string(i));
        features.flat()[i] = static_cast<double>(f);
    }
    return make_dataset(std::move(features));
}

inline Dataset load_dataset(const std::string& path, DataFormat format = DataFormat::auto_detect) {
    const std::string bytes = detail::read_file(path);
    if (format == DataFormat::auto_detect) {
        format = (bytes.size() >= 4 &&
                  std::memcmp(bytes.data(), detail::kRawmatMagic.data(), 4) == 0)
                     ? DataFormat::rawmat
                     : DataFormat::csv;
    }
    return format == DataFormat::rawmat ? load_rawmat_bytes(bytes, path)
                                        : load_csv_text(bytes, path);
}

inline std::string rawmat_bytes(const Dataset& ds) {
    std::string out;
    out.reserve(24 + ds.n() * ds.dim() * 4);
    out.append(detail::kRawmatMagic.data(), 4);
    detail::put_u32(out, detail::kRawmatVersion);
    detail::put_u64(out, ds.n());
    detail::put_u64(out, ds.dim());
    for (double v : ds.features.flat())
        detail::put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    return out;
}

inline void save_rawmat(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    const std::string bytes = rawmat_bytes(ds);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

// ---- result artifacts ----

inline void write_exemplars_csv(const ExemplarSet& ex, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    for (std::size_t idx : ex.indices) out << idx << '\n';
}

inline void write_embedding_csv(const Matrix& coords, const GridSpec& spec,
                                const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    for (std::size_t i = 0; i < coords.rows(); ++i) {
        const auto cell = cell_of(coords(i, 0), coords(i, 1), spec);
        out << i << ',' << format_double(coords(i, 0)) << ',' << format_double(coords(i, 1))
            << ',' << cell[0] << ',' << cell[1] << '\n';
    }
}

inline void write_entropy_trace_csv(const std::vector<TrajectoryPoint>& trajectory,
                                    const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    for (const auto& pt : trajectory)
        out << pt.k << ',' << format_double(pt.pi_t) << ',' << format_double(pt.h) << '\n';
}

}  // namespace adapsne
