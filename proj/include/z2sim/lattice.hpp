#ifndef Z2SIM_LATTICE_HPP
#define Z2SIM_LATTICE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "z2sim/common.hpp"

namespace z2sim {

// Open-boundary square lattice of Lx x Ly plaquettes.  Gauge spins live on
// links, one control per plaquette.  All coordinates are in units of the
// lattice constant a: sites at integer points, links at edge midpoints,
// controls at plaquette centers.
//
// Indexing (fixed, documented so the qubit bit layout is reproducible):
//   sites       row-major, site(x, y) = y * (Lx + 1) + x
//   links       row-major over sites, at each site the direction-1 link
//               (towards +x, if it exists) precedes the direction-2 link
//               (towards +y, if it exists)
//   plaquettes  row-major over lower-left corners, plaq(x, y) = y * Lx + x
//   controls    same index as their plaquette

struct Coord {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(const Coord& a, const Coord& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

class LatticeGeometry {
  public:
    LatticeGeometry(int lx, int ly) : lx_(lx), ly_(ly) {
        if (lx < 1 || ly < 1)
            throw std::invalid_argument("lattice dimensions must be at least 1x1, got " +
                                        std::to_string(lx) + "x" + std::to_string(ly));
        const int nsites = (lx + 1) * (ly + 1);
        link_at_.assign(static_cast<std::size_t>(nsites) * 2, -1);
        for (int y = 0; y <= ly; ++y) {
            for (int x = 0; x <= lx; ++x) {
                const int s = site_index(x, y);
                if (x < lx) {
                    link_at_[2 * s + 0] = static_cast<int>(link_site_.size());
                    link_site_.push_back(s);
                    link_dir_.push_back(1);
                    link_pos_.push_back({x + 0.5, static_cast<double>(y)});
                }
                if (y < ly) {
                    link_at_[2 * s + 1] = static_cast<int>(link_site_.size());
                    link_site_.push_back(s);
                    link_dir_.push_back(2);
                    link_pos_.push_back({static_cast<double>(x), y + 0.5});
                }
            }
        }
        control_pos_.reserve(static_cast<std::size_t>(lx) * ly);
        for (int y = 0; y < ly; ++y)
            for (int x = 0; x < lx; ++x)
                control_pos_.push_back({x + 0.5, y + 0.5});
    }

    int lx() const { return lx_; }
    int ly() const { return ly_; }
    int n_sites() const { return (lx_ + 1) * (ly_ + 1); }
    int n_links() const { return static_cast<int>(link_site_.size()); }
    int n_plaquettes() const { return lx_ * ly_; }

    int site_index(int x, int y) const { return y * (lx_ + 1) + x; }
    std::pair<int, int> site_xy(int s) const { return {s % (lx_ + 1), s / (lx_ + 1)}; }

    int plaquette_index(int x, int y) const { return y * lx_ + x; }
    std::pair<int, int> plaquette_xy(int p) const { return {p % lx_, p / lx_}; }

    // link (site, direction k in {1, 2}); -1 when the link does not exist
    int link_index(int site_x, int site_y, int k) const {
        if (site_x < 0 || site_x > lx_ || site_y < 0 || site_y > ly_) return -1;
        if (k == 1 && site_x == lx_) return -1;
        if (k == 2 && site_y == ly_) return -1;
        return link_at_[2 * site_index(site_x, site_y) + (k - 1)];
    }

    int link_start_site(int l) const { return link_site_.at(l); }
    int link_direction(int l) const { return link_dir_.at(l); }

    Coord link_position(int l) const { return link_pos_.at(l); }
    Coord control_position(int p) const { return control_pos_.at(p); }
    Coord site_position(int s) const {
        auto [x, y] = site_xy(s);
        return {static_cast<double>(x), static_cast<double>(y)};
    }

    void check_plaquette(int p) const {
        if (p < 0 || p >= n_plaquettes())
            throw std::out_of_range("plaquette index " + std::to_string(p) + " out of range");
    }
    void check_site(int s) const {
        if (s < 0 || s >= n_sites())
            throw std::out_of_range("site index " + std::to_string(s) + " out of range");
    }
    void check_link(int l) const {
        if (l < 0 || l >= n_links())
            throw std::out_of_range("link index " + std::to_string(l) + " out of range");
    }

    // number of plaquettes bordering a link: 1 on the boundary, 2 inside
    int link_plaquette_count(int l) const {
        check_link(l);
        auto [sx, sy] = site_xy(link_start_site(l));
        if (link_direction(l) == 1) {
            int c = 0;
            if (sy < ly_) ++c;
            if (sy > 0) ++c;
            return c;
        }
        int c = 0;
        if (sx < lx_) ++c;
        if (sx > 0) ++c;
        return c;
    }

  private:
    int lx_, ly_;
    std::vector<int> link_at_;    // 2 slots per site
    std::vector<int> link_site_;  // start site per link
    std::vector<int> link_dir_;   // 1 or 2 per link
    std::vector<Coord> link_pos_;
    std::vector<Coord> control_pos_;
};

inline LatticeGeometry build_lattice(int lx, int ly) { return LatticeGeometry(lx, ly); }

// Links of the plaquette with lower-left corner x, counter-clockwise from x:
// (x,1), (x+e1,2), (x+e2,1), (x,2).
inline std::array<int, 4> plaquette_links(const LatticeGeometry& g, int p) {
    g.check_plaquette(p);
    auto [x, y] = g.plaquette_xy(p);
    return {g.link_index(x, y, 1), g.link_index(x + 1, y, 2),
            g.link_index(x, y + 1, 1), g.link_index(x, y, 2)};
}

// Links of the Gauss-law star at a site; boundary and corner sites return
// the truncated star (3 or 2 links).
inline std::vector<int> star_links(const LatticeGeometry& g, int s) {
    g.check_site(s);
    auto [x, y] = g.site_xy(s);
    std::vector<int> out;
    for (int l : {g.link_index(x, y, 1), g.link_index(x, y, 2),
                  g.link_index(x - 1, y, 1), g.link_index(x, y - 1, 2)})
        if (l >= 0) out.push_back(l);
    return out;
}

// Rectangular Wilson contour: anchor plaquette (lower-left), extent in
// plaquette units.
struct LoopSpec {
    int anchor_x = 0;
    int anchor_y = 0;
    int width = 1;
    int height = 1;

    bool is_odd_square() const { return width == height && width % 2 == 1; }
};

inline void check_loop(const LatticeGeometry& g, const LoopSpec& c) {
    if (c.width < 1 || c.height < 1)
        throw std::invalid_argument("loop extent must be at least 1x1");
    if (c.anchor_x < 0 || c.anchor_y < 0 || c.anchor_x + c.width > g.lx() ||
        c.anchor_y + c.height > g.ly())
        throw std::out_of_range("loop exceeds lattice bounds");
}

// Perimeter links of the loop, each exactly once; 2*(width+height) links.
inline std::vector<int> loop_links(const LatticeGeometry& g, const LoopSpec& c) {
    check_loop(g, c);
    std::vector<int> out;
    out.reserve(2 * (c.width + c.height));
    for (int i = 0; i < c.width; ++i)
        out.push_back(g.link_index(c.anchor_x + i, c.anchor_y, 1));
    for (int j = 0; j < c.height; ++j)
        out.push_back(g.link_index(c.anchor_x + c.width, c.anchor_y + j, 2));
    for (int i = 0; i < c.width; ++i)
        out.push_back(g.link_index(c.anchor_x + i, c.anchor_y + c.height, 1));
    for (int j = 0; j < c.height; ++j)
        out.push_back(g.link_index(c.anchor_x, c.anchor_y + j, 2));
    return out;
}

inline std::vector<int> loop_enclosed_plaquettes(const LatticeGeometry& g, const LoopSpec& c) {
    check_loop(g, c);
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(c.width) * c.height);
    for (int j = 0; j < c.height; ++j)
        for (int i = 0; i < c.width; ++i)
            out.push_back(g.plaquette_index(c.anchor_x + i, c.anchor_y + j));
    return out;
}

// Plaquette whose control is closest to the loop center (lowest index on ties).
inline int loop_center_plaquette(const LatticeGeometry& g, const LoopSpec& c) {
    check_loop(g, c);
    const Coord center{c.anchor_x + c.width / 2.0, c.anchor_y + c.height / 2.0};
    int best = -1;
    double best_d = 0.0;
    for (int p : loop_enclosed_plaquettes(g, c)) {
        const double d = distance(g.control_position(p), center);
        if (best < 0 || d < best_d - 1e-12) {
            best = p;
            best_d = d;
        }
    }
    return best;
}

// Partition of the loop links by Euclidean distance to the control position,
// grouped to a tolerance of 1e-9 * a.  Sets are ordered by distance.
inline std::vector<std::vector<int>> distance_sets(const LatticeGeometry& g, const LoopSpec& c,
                                                   int control) {
    g.check_plaquette(control);
    const Coord cp = g.control_position(control);
    std::vector<std::pair<double, int>> by_dist;
    for (int l : loop_links(g, c)) by_dist.emplace_back(distance(g.link_position(l), cp), l);
    std::sort(by_dist.begin(), by_dist.end());
    std::vector<std::vector<int>> sets;
    constexpr double tol = 1e-9;
    for (const auto& [d, l] : by_dist) {
        if (sets.empty() || d - distance(g.link_position(sets.back().front()), cp) > tol)
            sets.emplace_back();
        sets.back().push_back(l);
    }
    return sets;
}

}  // namespace z2sim

#endif
