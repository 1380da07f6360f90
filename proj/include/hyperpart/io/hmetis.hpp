// hmetis.hpp - hMetis and Metis file parsers, partition file io
#ifndef HYPERPART_IO_HMETIS_HPP
#define HYPERPART_IO_HMETIS_HPP

#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "../hypergraph.hpp"
#include "../types.hpp"

namespace hyperpart {

// Parse failure with the 1-based line it was detected on.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

namespace detail {

// Advances past '%' comments (and blank lines unless skip_blank is off;
// Metis adjacency lists use a blank line for an isolated vertex).
inline bool next_content_line(std::istream& in, std::string& line, std::size_t& line_no,
                              bool skip_blank = true) {
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::size_t i = line.find_first_not_of(" \t");
        if (i == std::string::npos) {
            if (skip_blank) continue;
            return true;
        }
        if (line[i] == '%') continue;
        return true;
    }
    return false;
}

inline std::vector<std::int64_t> parse_ints(const std::string& line, std::size_t line_no) {
    std::vector<std::int64_t> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stoll(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ParseError(line_no, "not an integer: '" + tok + "'");
        }
    }
    return out;
}

}  // namespace detail

// hMetis hypergraph file: header "m n [fmt]" with fmt in {absent, 1, 10, 11};
// 1 adds a leading weight to every net line, 10 appends one node-weight line
// per node, 11 both. Pins are 1-based in the file.
inline Hypergraph parse_hmetis(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!detail::next_content_line(in, line, line_no))
        throw ParseError(line_no + 1, "missing header");
    const auto header = detail::parse_ints(line, line_no);
    if (header.size() < 2 || header.size() > 3)
        throw ParseError(line_no, "header must be 'nets nodes [fmt]'");
    const std::int64_t m = header[0];
    const std::int64_t n = header[1];
    const std::int64_t fmt = header.size() == 3 ? header[2] : 0;
    if (m < 0 || n < 0) throw ParseError(line_no, "negative count in header");
    if (fmt != 0 && fmt != 1 && fmt != 10 && fmt != 11)
        throw ParseError(line_no, "unsupported format code " + std::to_string(fmt));
    const bool has_net_weights = fmt == 1 || fmt == 11;
    const bool has_node_weights = fmt == 10 || fmt == 11;

    std::vector<std::vector<NodeId>> nets(m);
    std::vector<Weight> net_weights;
    if (has_net_weights) net_weights.reserve(m);
    for (std::int64_t e = 0; e < m; ++e) {
        if (!detail::next_content_line(in, line, line_no))
            throw ParseError(line_no + 1, "expected " + std::to_string(m) + " net lines, found " +
                                              std::to_string(e));
        const auto vals = detail::parse_ints(line, line_no);
        std::size_t idx = 0;
        if (has_net_weights) {
            if (vals.empty()) throw ParseError(line_no, "net line without weight");
            if (vals[0] < 1) throw ParseError(line_no, "net weight must be positive");
            net_weights.push_back(vals[0]);
            idx = 1;
        }
        if (vals.size() == idx) throw ParseError(line_no, "net without pins");
        std::set<std::int64_t> seen;
        for (; idx < vals.size(); ++idx) {
            const std::int64_t p = vals[idx];
            if (p < 1 || p > n)
                throw ParseError(line_no, "pin " + std::to_string(p) + " out of range [1, " +
                                              std::to_string(n) + "]");
            if (!seen.insert(p).second)
                throw ParseError(line_no, "duplicate pin " + std::to_string(p));
            nets[e].push_back(static_cast<NodeId>(p - 1));
        }
    }

    std::vector<Weight> node_weights;
    if (has_node_weights) {
        node_weights.reserve(n);
        for (std::int64_t v = 0; v < n; ++v) {
            if (!detail::next_content_line(in, line, line_no))
                throw ParseError(line_no + 1, "expected " + std::to_string(n) +
                                                  " node-weight lines, found " + std::to_string(v));
            const auto vals = detail::parse_ints(line, line_no);
            if (vals.size() != 1) throw ParseError(line_no, "expected one node weight");
            if (vals[0] < 1) throw ParseError(line_no, "node weight must be positive");
            node_weights.push_back(vals[0]);
        }
    }
    if (detail::next_content_line(in, line, line_no))
        throw ParseError(line_no, "unexpected content after the last expected line");
    return build_hypergraph(static_cast<NodeId>(n), nets, node_weights, net_weights);
}

// Writes the canonical hMetis form: the format code covers exactly the
// non-unit weights present, pins appear in stored order.
inline void write_hmetis(const Hypergraph& h, std::ostream& out) {
    bool net_w = false, node_w = false;
    for (NetId e = 0; e < h.num_nets(); ++e) net_w |= h.net_weight(e) != 1;
    for (NodeId v = 0; v < h.num_nodes(); ++v) node_w |= h.node_weight(v) != 1;
    out << h.num_nets() << ' ' << h.num_nodes();
    if (net_w && node_w)
        out << " 11";
    else if (node_w)
        out << " 10";
    else if (net_w)
        out << " 1";
    out << '\n';
    for (NetId e = 0; e < h.num_nets(); ++e) {
        bool first = true;
        if (net_w) {
            out << h.net_weight(e);
            first = false;
        }
        for (NodeId v : h.pins(e)) {
            if (!first) out << ' ';
            out << v + 1;
            first = false;
        }
        out << '\n';
    }
    if (node_w)
        for (NodeId v = 0; v < h.num_nodes(); ++v) out << h.node_weight(v) << '\n';
}

// Metis graph file read as a hypergraph of 2-pin nets: header "n m [fmt]",
// one 1-based adjacency line per vertex, each undirected edge listed from
// both sides. fmt 1 adds (neighbor, weight) pairs, 10 a leading node weight,
// 11 both. Graphs are loop-free and adjacency must be symmetric.
inline Hypergraph parse_metis_graph(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!detail::next_content_line(in, line, line_no))
        throw ParseError(line_no + 1, "missing header");
    const std::size_t header_line = line_no;
    const auto header = detail::parse_ints(line, line_no);
    if (header.size() < 2 || header.size() > 3)
        throw ParseError(line_no, "header must be 'nodes edges [fmt]'");
    const std::int64_t n = header[0];
    const std::int64_t m = header[1];
    const std::int64_t fmt = header.size() == 3 ? header[2] : 0;
    if (n < 0 || m < 0) throw ParseError(line_no, "negative count in header");
    if (fmt != 0 && fmt != 1 && fmt != 10 && fmt != 11)
        throw ParseError(line_no, "unsupported format code " + std::to_string(fmt));
    const bool has_edge_weights = fmt == 1 || fmt == 11;
    const bool has_node_weights = fmt == 10 || fmt == 11;

    struct EdgeInfo {
        Weight weight = 1;
        int directions = 0;  // bit 0: lower->higher seen, bit 1: the reverse
        std::size_t first_line = 0;
    };
    std::map<std::pair<std::int64_t, std::int64_t>, EdgeInfo> edges;
    std::vector<Weight> node_weights;
    if (has_node_weights) node_weights.reserve(n);

    for (std::int64_t v = 1; v <= n; ++v) {
        if (!detail::next_content_line(in, line, line_no, /*skip_blank=*/false))
            throw ParseError(line_no + 1, "expected " + std::to_string(n) +
                                              " adjacency lines, found " + std::to_string(v - 1));
        const auto vals = detail::parse_ints(line, line_no);
        std::size_t idx = 0;
        if (has_node_weights) {
            if (vals.empty()) throw ParseError(line_no, "adjacency line without node weight");
            if (vals[0] < 1) throw ParseError(line_no, "node weight must be positive");
            node_weights.push_back(vals[0]);
            idx = 1;
        }
        const std::size_t stride = has_edge_weights ? 2 : 1;
        if ((vals.size() - idx) % stride != 0)
            throw ParseError(line_no, "neighbor list must be (neighbor, weight) pairs");
        for (; idx < vals.size(); idx += stride) {
            const std::int64_t u = vals[idx];
            if (u < 1 || u > n)
                throw ParseError(line_no, "neighbor " + std::to_string(u) + " out of range [1, " +
                                              std::to_string(n) + "]");
            if (u == v) throw ParseError(line_no, "self-loop at vertex " + std::to_string(v));
            Weight w = 1;
            if (has_edge_weights) {
                w = vals[idx + 1];
                if (w < 1) throw ParseError(line_no, "edge weight must be positive");
            }
            const auto key = std::minmax(v, u);
            auto& info = edges[{key.first, key.second}];
            const int bit = v < u ? 1 : 2;
            if (info.directions == 0) {
                info.weight = w;
                info.first_line = line_no;
            } else if (info.directions & bit) {
                throw ParseError(line_no, "duplicate neighbor " + std::to_string(u) +
                                              " at vertex " + std::to_string(v));
            } else if (info.weight != w) {
                throw ParseError(line_no, "edge " + std::to_string(key.first) + "-" +
                                              std::to_string(key.second) +
                                              " has asymmetric weights");
            }
            info.directions |= bit;
        }
    }
    if (detail::next_content_line(in, line, line_no))
        throw ParseError(line_no, "unexpected content after the last adjacency line");

    for (const auto& [key, info] : edges)
        if (info.directions != 3)
            throw ParseError(info.first_line, "edge " + std::to_string(key.first) + "-" +
                                                  std::to_string(key.second) +
                                                  " is listed from one side only");
    if (static_cast<std::int64_t>(edges.size()) != m)
        throw ParseError(header_line, "header promises " + std::to_string(m) +
                                          " edges, adjacency lists describe " +
                                          std::to_string(edges.size()));

    std::vector<std::vector<NodeId>> nets;
    std::vector<Weight> net_weights;
    nets.reserve(edges.size());
    bool non_unit = false;
    for (const auto& [key, info] : edges) {
        nets.push_back({static_cast<NodeId>(key.first - 1), static_cast<NodeId>(key.second - 1)});
        net_weights.push_back(info.weight);
        non_unit |= info.weight != 1;
    }
    if (!non_unit) net_weights.clear();
    return build_hypergraph(static_cast<NodeId>(n), nets, node_weights, net_weights);
}

// One 0-based block id per line, in node order.
inline void write_partition(std::span<const BlockId> part, std::ostream& out) {
    for (BlockId b : part) out << b << '\n';
}

inline std::vector<BlockId> read_partition(std::istream& in, std::size_t num_nodes) {
    std::vector<BlockId> part;
    part.reserve(num_nodes);
    std::string line;
    std::size_t line_no = 0;
    while (part.size() < num_nodes) {
        if (!detail::next_content_line(in, line, line_no))
            throw ParseError(line_no + 1, "expected " + std::to_string(num_nodes) +
                                              " block ids, found " + std::to_string(part.size()));
        const auto vals = detail::parse_ints(line, line_no);
        if (vals.size() != 1) throw ParseError(line_no, "expected one block id per line");
        if (vals[0] < 0) throw ParseError(line_no, "negative block id");
        part.push_back(static_cast<BlockId>(vals[0]));
    }
    if (detail::next_content_line(in, line, line_no))
        throw ParseError(line_no, "more lines than nodes");
    return part;
}

enum class FileFormat { kHmetis, kMetis };

inline FileFormat file_format_from_name(const std::string& s) {
    if (s == "hmetis") return FileFormat::kHmetis;
    if (s == "metis") return FileFormat::kMetis;
    throw std::invalid_argument("unknown file format: " + s);
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return in;
}

inline Hypergraph load_hypergraph(const std::string& path, FileFormat format) {
    std::ifstream in = open_input(path);
    try {
        return format == FileFormat::kHmetis ? parse_hmetis(in) : parse_metis_graph(in);
    } catch (const ParseError& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

inline std::vector<BlockId> load_partition(const std::string& path, std::size_t num_nodes) {
    std::ifstream in = open_input(path);
    try {
        return read_partition(in, num_nodes);
    } catch (const ParseError& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

inline void save_partition(std::span<const BlockId> part, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    write_partition(part, out);
}

}  // namespace hyperpart

#endif
