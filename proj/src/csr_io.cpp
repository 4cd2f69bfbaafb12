#include "spikekern/csr_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace spikekern {

namespace {

void put_u32(std::ostream& os, std::uint32_t v)
{
    std::array<char, 4> b{};
    for (int k = 0; k < 4; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xFFu);
    os.write(b.data(), 4);
}

void put_f64(std::ostream& os, double v)
{
    const auto bits = std::bit_cast<std::uint64_t>(v);
    std::array<char, 8> b{};
    for (int k = 0; k < 8; ++k) b[k] = static_cast<char>((bits >> (8 * k)) & 0xFFu);
    os.write(b.data(), 8);
}

void read_exact(std::istream& is, char* dst, std::size_t n, const char* what)
{
    is.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is.gcount()) != n) {
        throw ValidationError(std::string("CSR file truncated while reading ") + what);
    }
}

std::uint32_t get_u32(std::istream& is, const char* what)
{
    std::array<unsigned char, 4> b{};
    read_exact(is, reinterpret_cast<char*>(b.data()), 4, what);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= std::uint32_t{b[k]} << (8 * k);
    return v;
}

double get_f64(std::istream& is, const char* what)
{
    std::array<unsigned char, 8> b{};
    read_exact(is, reinterpret_cast<char*>(b.data()), 8, what);
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= std::uint64_t{b[k]} << (8 * k);
    return std::bit_cast<double>(v);
}

}  // namespace

void write_csr(std::ostream& os, const CsrMatrix& m)
{
    os.write(kCsrMagic, sizeof(kCsrMagic));
    put_u32(os, m.n_rows());
    put_u32(os, m.n_cols());
    for (Index p : m.indptr()) put_u32(os, p);
    for (Index c : m.indices()) put_u32(os, c);
    if (m.is_homogeneous()) {
        os.put(0);
        put_f64(os, m.homogeneous_weight());
    } else {
        os.put(1);
        for (Real w : m.edge_weights()) put_f64(os, w);
    }
    if (!os) throw Error("failed writing CSR stream");
}

CsrMatrix read_csr(std::istream& is)
{
    char magic[sizeof(kCsrMagic)];
    read_exact(is, magic, sizeof(magic), "magic");
    if (std::memcmp(magic, kCsrMagic, sizeof(magic)) != 0) throw ValidationError("not a SPKCSR1 file (bad magic)");
    const Index n_rows = get_u32(is, "n_rows");
    const Index n_cols = get_u32(is, "n_cols");
    std::vector<Index> indptr(std::size_t{n_rows} + 1);
    for (auto& p : indptr) p = get_u32(is, "indptr");
    std::vector<Index> indices(indptr.back());
    for (auto& c : indices) c = get_u32(is, "indices");
    const int tag = is.get();
    if (tag == std::char_traits<char>::eof()) throw ValidationError("CSR file truncated before weight tag");
    CsrWeights weights;
    if (tag == 0) {
        weights = HomogeneousWeight{static_cast<Real>(get_f64(is, "weight"))};
    } else if (tag == 1) {
        std::vector<Real> w(indices.size());
        for (auto& x : w) x = static_cast<Real>(get_f64(is, "weights"));
        weights = std::move(w);
    } else {
        throw ValidationError("unknown CSR weight kind tag " + std::to_string(tag));
    }
    return CsrMatrix(n_rows, n_cols, std::move(indptr), std::move(indices), std::move(weights));
}

void save_csr(const std::filesystem::path& path, const CsrMatrix& m)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    write_csr(os, m);
}

CsrMatrix load_csr(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ValidationError("cannot open " + path.string());
    return read_csr(is);
}

CsrMatrix read_edge_list(std::istream& is, std::optional<Shape> shape)
{
    std::vector<WeightedEdge> edges;
    int weighted = -1;
    std::string line;
    std::size_t line_no = 0;
    Index max_src = 0;
    Index max_dst = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        long long src = 0;
        long long dst = 0;
        if (!(ls >> src)) continue;
        if (!(ls >> dst) || src < 0 || dst < 0) {
            throw ValidationError("edge list line " + std::to_string(line_no) + ": expected 'src dst [weight]'");
        }
        double w = 1.0;
        const bool has_w = static_cast<bool>(ls >> w);
        std::string rest;
        if (ls.clear(), ls >> rest) {
            throw ValidationError("edge list line " + std::to_string(line_no) + ": trailing tokens");
        }
        if (weighted == -1) weighted = has_w ? 1 : 0;
        if (weighted != (has_w ? 1 : 0)) {
            throw ValidationError("edge list line " + std::to_string(line_no) + ": mixed weighted/unweighted edges");
        }
        const auto s = static_cast<Index>(src);
        const auto d = static_cast<Index>(dst);
        max_src = std::max(max_src, s);
        max_dst = std::max(max_dst, d);
        edges.push_back({s, d, static_cast<Real>(w)});
    }
    const Shape sh = shape.value_or(Shape{edges.empty() ? 0 : max_src + 1, edges.empty() ? 0 : max_dst + 1});
    if (weighted == 1) return CsrMatrix::from_edges(sh.n_rows, sh.n_cols, std::move(edges));
    std::vector<std::pair<Index, Index>> pairs;
    pairs.reserve(edges.size());
    for (const auto& e : edges) pairs.emplace_back(e.src, e.dst);
    return CsrMatrix::from_edges(sh.n_rows, sh.n_cols, std::move(pairs), Real{1});
}

CsrMatrix load_edge_list(const std::filesystem::path& path, std::optional<Shape> shape)
{
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot open " + path.string());
    return read_edge_list(is, shape);
}

}  // namespace spikekern
