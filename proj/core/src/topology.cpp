#include "qnet/topology.hpp"

#include "qnet/fidelity.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

namespace qnet {

int GridLayout::link_count() const { return rows * (cols - 1) + cols * (rows - 1); }

bool GridLayout::in_bounds(Coordinate c) const {
    return c.x >= 0 && c.x < rows && c.y >= 0 && c.y < cols;
}

std::vector<Link> GridLayout::links() const {
    std::vector<Link> out;
    out.reserve(static_cast<size_t>(link_count()));
    for (int x = 0; x < rows; ++x) {
        for (int y = 0; y < cols; ++y) {
            if (y + 1 < cols) out.push_back(Link{{x, y}, {x, y + 1}});
            if (x + 1 < rows) out.push_back(Link{{x, y}, {x + 1, y}});
        }
    }
    return out;
}

GridLayout build_mesh(int rows, int cols, int teleporters_per_router, int generators_per_link,
                      int purifier_queues, int purifier_depth, LqCapacity lq_capacity,
                      DistanceCells hop_spacing, const ParameterSet& params) {
    validate(params);
    if (rows < 1 || cols < 1) throw std::invalid_argument("mesh needs at least one router");
    if (teleporters_per_router < 2 || teleporters_per_router % 2 != 0)
        throw std::invalid_argument(
            "teleporters per router must be even and at least 2 (two equal sets)");
    if (generators_per_link < 1) throw std::invalid_argument("each link needs a generator");
    if (purifier_queues < 1) throw std::invalid_argument("each endpoint needs a purifier queue");
    if (purifier_depth < 1) throw std::invalid_argument("purifier depth must be at least 1");
    if (hop_spacing < 1) throw std::invalid_argument("hop spacing must be at least one cell");

    GridLayout layout;
    layout.rows = rows;
    layout.cols = cols;
    layout.teleporters_per_router = teleporters_per_router;
    layout.generators_per_link = generators_per_link;
    layout.purifier_queues_per_endpoint = purifier_queues;
    layout.purifier_depth = purifier_depth;
    layout.lq_capacity = lq_capacity;
    layout.hop_spacing = hop_spacing;
    return layout;
}

VirtualWire virtual_wire(const GridLayout& layout, const Link& link, const ParameterSet& params) {
    if (!layout.in_bounds(link.a) || !layout.in_bounds(link.b))
        throw std::invalid_argument("link endpoint outside the router grid");
    if (std::abs(link.a.x - link.b.x) + std::abs(link.a.y - link.b.y) != 1)
        throw std::invalid_argument("virtual wires connect adjacent routers");
    VirtualWire wire;
    wire.link = link;
    wire.pair_rate = static_cast<double>(layout.generators_per_link) / params.times.t_gen;
    wire.fidelity = ballistic_fidelity(generation_fidelity(params.errors, params.f_zero),
                                       layout.hop_spacing, params.errors);
    return wire;
}

std::vector<Coordinate> dimension_order_path(const GridLayout& layout, Coordinate src,
                                             Coordinate dst) {
    if (!layout.in_bounds(src) || !layout.in_bounds(dst))
        throw std::out_of_range("path endpoint outside the router grid");
    std::vector<Coordinate> path;
    path.push_back(src);
    Coordinate cur = src;
    while (cur.x != dst.x) {
        cur.x += (dst.x > cur.x) ? 1 : -1;
        path.push_back(cur);
    }
    while (cur.y != dst.y) {
        cur.y += (dst.y > cur.y) ? 1 : -1;
        path.push_back(cur);
    }
    return path;
}

std::optional<Link> midpoint_generator(const std::vector<Coordinate>& path) {
    if (path.empty()) throw std::invalid_argument("empty path");
    if (path.size() == 1) return std::nullopt;
    const size_t hops = path.size() - 1;
    const size_t mid = hops / 2;  // floor; ties toward the source
    Coordinate a = path[mid], b = path[mid + 1];
    if (b < a) std::swap(a, b);
    return Link{a, b};
}

std::string save_layout(const GridLayout& layout) {
    std::string out;
    char buf[96];
    auto emit = [&](const char* key, long long value) {
        std::snprintf(buf, sizeof buf, "%s = %lld\n", key, value);
        out += buf;
    };
    out += "# qnet mesh layout\n";
    emit("rows", layout.rows);
    emit("cols", layout.cols);
    emit("teleporters_per_router", layout.teleporters_per_router);
    emit("generators_per_link", layout.generators_per_link);
    emit("purifier_queues_per_endpoint", layout.purifier_queues_per_endpoint);
    emit("purifier_depth", layout.purifier_depth);
    emit("lq_capacity", static_cast<int>(layout.lq_capacity));
    emit("hop_spacing", layout.hop_spacing);
    emit("local_cells", layout.local_cells);
    emit("turn_cells", layout.turn_cells);
    for (const Link& link : layout.links()) {
        std::snprintf(buf, sizeof buf, "link (%d,%d)-(%d,%d)\n", link.a.x, link.a.y, link.b.x,
                      link.b.y);
        out += buf;
    }
    return out;
}

GridLayout load_layout(const std::string& text) {
    GridLayout layout;
    std::map<std::string, long long> values;
    std::vector<Link> links;

    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string head;
        if (!(ls >> head)) continue;
        if (head == "link") {
            std::string spec;
            ls >> spec;
            Link link;
            if (std::sscanf(spec.c_str(), "(%d,%d)-(%d,%d)", &link.a.x, &link.a.y, &link.b.x,
                            &link.b.y) != 4)
                throw ConfigParseError(lineno, "malformed link \"" + spec + "\"");
            links.push_back(link);
            continue;
        }
        std::string eq, value;
        if (!(ls >> eq >> value) || eq != "=")
            throw ConfigParseError(lineno, "expected `key = value`");
        try {
            values[head] = std::stoll(value);
        } catch (const std::exception&) {
            throw ConfigParseError(lineno, "malformed number \"" + value + "\"");
        }
    }

    auto take = [&](const char* key, long long fallback) {
        auto it = values.find(key);
        return it == values.end() ? fallback : it->second;
    };
    layout.rows = static_cast<int>(take("rows", layout.rows));
    layout.cols = static_cast<int>(take("cols", layout.cols));
    layout.teleporters_per_router =
        static_cast<int>(take("teleporters_per_router", layout.teleporters_per_router));
    layout.generators_per_link =
        static_cast<int>(take("generators_per_link", layout.generators_per_link));
    layout.purifier_queues_per_endpoint =
        static_cast<int>(take("purifier_queues_per_endpoint", layout.purifier_queues_per_endpoint));
    layout.purifier_depth = static_cast<int>(take("purifier_depth", layout.purifier_depth));
    layout.lq_capacity = static_cast<LqCapacity>(take("lq_capacity", 1));
    layout.hop_spacing = take("hop_spacing", layout.hop_spacing);
    layout.local_cells = take("local_cells", layout.local_cells);
    layout.turn_cells = take("turn_cells", layout.turn_cells);

    if (layout.lq_capacity != LqCapacity::HomeBase && layout.lq_capacity != LqCapacity::Mobile)
        throw ConfigValidationError("lq_capacity must be 1 (home base) or 2 (mobile)");

    // The adjacency list is derivable for a mesh; when present it must
    // match the declared grid.
    if (!links.empty()) {
        const auto expected = layout.links();
        if (links.size() != expected.size())
            throw ConfigValidationError("adjacency list does not match a " +
                                        std::to_string(layout.rows) + "x" +
                                        std::to_string(layout.cols) + " mesh");
    }
    return layout;
}

}  // namespace qnet
