#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qnet/params.hpp"

namespace qnet {

// Mesh-grid interconnect layout: a rows x cols grid of T' routers with
// four-neighbor virtual-wire links (one G node per link), one LQ site per
// router, and a C node plus P queue purifiers at every LQ site.

enum class NodeKind { LogicalQubitSite, Teleporter, Generator, Corrector, Purifier };

struct Coordinate {
    int x = 0;  // row index
    int y = 0;  // column index

    auto operator<=>(const Coordinate&) const = default;
};

/// Adjacent-router link; the G node lives on it. Stored with the
/// lexicographically smaller endpoint first.
struct Link {
    Coordinate a;
    Coordinate b;

    auto operator<=>(const Link&) const = default;
};

enum class LqCapacity : int { HomeBase = 1, Mobile = 2 };

struct GridLayout {
    int rows = 16;
    int cols = 16;
    int teleporters_per_router = 4;   // t, split into equal X and Y sets
    int generators_per_link = 4;      // g
    int purifier_queues_per_endpoint = 1;  // p
    int purifier_depth = 3;           // queue-chain levels per P queue
    LqCapacity lq_capacity = LqCapacity::HomeBase;
    DistanceCells hop_spacing = 600;
    DistanceCells local_cells = 50;   // T' -> C -> P -> LQ ballistic leg
    DistanceCells turn_cells = 10;    // X-set <-> Y-set move inside a router

    int site_count() const { return rows * cols; }
    int link_count() const;
    bool in_bounds(Coordinate c) const;
    int site_index(Coordinate c) const { return c.x * cols + c.y; }
    Coordinate site_at(int index) const { return {index / cols, index % cols}; }

    /// Deadlock-avoidance storage per incoming link (4t per router).
    int storage_per_link() const { return teleporters_per_router; }

    std::vector<Link> links() const;
};

/// Validates counts and invariants (t even and >= 2, g and p >= 1, ...).
/// Throws std::invalid_argument on violations.
GridLayout build_mesh(int rows, int cols, int teleporters_per_router, int generators_per_link,
                      int purifier_queues, int purifier_depth, LqCapacity lq_capacity,
                      DistanceCells hop_spacing, const ParameterSet& params);

/// A continuously replenished EPR stream linking two adjacent routers.
struct VirtualWire {
    Link link;
    double pair_rate = 0.0;   // pairs per microsecond, g / t_gen
    Fidelity fidelity = 1.0;  // as delivered to the endpoint routers
};

VirtualWire virtual_wire(const GridLayout& layout, const Link& link, const ParameterSet& params);

/// X-first-then-Y Manhattan path, both endpoints included.
std::vector<Coordinate> dimension_order_path(const GridLayout& layout, Coordinate src,
                                             Coordinate dst);

/// The link nearest the path midpoint (floor of half the hop count, ties
/// toward the source); nullopt for a single-node path.
std::optional<Link> midpoint_generator(const std::vector<Coordinate>& path);

/// Key/value header plus an explicit adjacency list.
std::string save_layout(const GridLayout& layout);
GridLayout load_layout(const std::string& text);

}  // namespace qnet
