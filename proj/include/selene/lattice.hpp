#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace selene {

// Raised for malformed lattices, declarations, environments and file contents.
// Distinct from ParseError (source syntax) and UsageError (CLI plumbing).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A security level is an index into its lattice's level table. Levels from
// different lattices must never be mixed; all operations go through the
// lattice that issued them.
struct Level {
    std::uint8_t idx = 0;

    friend bool operator==(Level a, Level b) { return a.idx == b.idx; }
    friend bool operator!=(Level a, Level b) { return a.idx != b.idx; }
    friend bool operator<(Level a, Level b) { return a.idx < b.idx; }  // table order, not ⊑
};

// Finite security lattice: a partial order with unique bottom and top in
// which every pair of levels has a unique least upper bound. Built from
// declared names and declared edges; the order is the reflexive-transitive
// closure of the edges. Construction validates every property it relies on.
class SecurityLattice {
public:
    // `edges` are declared strict orderings lo < hi between named levels.
    SecurityLattice(std::vector<std::string> names,
                    const std::vector<std::pair<std::string, std::string>>& edges) {
        if (names.empty()) throw ConfigError("lattice must declare at least one level");
        if (names.size() > 32) throw ConfigError("lattice too large (limit 32 levels)");
        names_ = std::move(names);
        for (std::size_t i = 0; i < names_.size(); ++i) {
            if (!index_.emplace(names_[i], static_cast<std::uint8_t>(i)).second)
                throw ConfigError("duplicate lattice level '" + names_[i] + "'");
        }
        auto n = names_.size();
        leq_.assign(n, std::vector<bool>(n, false));
        for (std::size_t i = 0; i < n; ++i) leq_[i][i] = true;
        for (const auto& [lo, hi] : edges) {
            auto a = find(lo), b = find(hi);
            if (!a) throw ConfigError("lattice edge uses undeclared level '" + lo + "'");
            if (!b) throw ConfigError("lattice edge uses undeclared level '" + hi + "'");
            leq_[a->idx][b->idx] = true;
        }
        // Warshall closure, then antisymmetry: a cycle would make two
        // distinct names order-equivalent.
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i)
                if (leq_[i][k])
                    for (std::size_t j = 0; j < n; ++j)
                        if (leq_[k][j]) leq_[i][j] = true;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (leq_[i][j] && leq_[j][i])
                    throw ConfigError("lattice order has a cycle through '" + names_[i] +
                                      "' and '" + names_[j] + "'");
        bottom_ = unique_extremum(/*bottom=*/true);
        top_ = unique_extremum(/*bottom=*/false);
        compute_joins();
    }

    // The default lattice used when a program declares none.
    static SecurityLattice two_point() {
        return SecurityLattice({"L", "H"}, {{"L", "H"}});
    }

    std::size_t size() const { return names_.size(); }
    Level bottom() const { return bottom_; }
    Level top() const { return top_; }

    bool leq(Level a, Level b) const { return leq_.at(a.idx).at(b.idx); }

    Level join(Level a, Level b) const { return join_.at(a.idx).at(b.idx); }

    const std::string& name(Level l) const { return names_.at(l.idx); }

    std::optional<Level> find(std::string_view name) const {
        auto it = index_.find(std::string(name));
        if (it == index_.end()) return std::nullopt;
        return Level{it->second};
    }

    std::vector<Level> all_levels() const {
        std::vector<Level> out;
        for (std::size_t i = 0; i < names_.size(); ++i)
            out.push_back(Level{static_cast<std::uint8_t>(i)});
        return out;
    }

    // Declared edges in canonical order, for serialization and printing.
    std::vector<std::pair<std::string, std::string>> cover_edges() const {
        std::vector<std::pair<std::string, std::string>> out;
        auto n = names_.size();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j || !leq_[i][j]) continue;
                bool covered = false;
                for (std::size_t k = 0; k < n && !covered; ++k)
                    if (k != i && k != j && leq_[i][k] && leq_[k][j]) covered = true;
                if (!covered) out.emplace_back(names_[i], names_[j]);
            }
        return out;
    }

    bool same_shape(const SecurityLattice& other) const {
        return names_ == other.names_ && leq_ == other.leq_;
    }

private:
    Level unique_extremum(bool bottom) const {
        std::optional<Level> found;
        for (std::size_t i = 0; i < names_.size(); ++i) {
            bool extremal = true;
            for (std::size_t j = 0; j < names_.size(); ++j) {
                bool ok = bottom ? leq_[i][j] : leq_[j][i];
                if (!ok) { extremal = false; break; }
            }
            if (extremal) {
                if (found)
                    throw ConfigError(std::string("lattice has no unique ") +
                                      (bottom ? "bottom" : "top"));
                found = Level{static_cast<std::uint8_t>(i)};
            }
        }
        if (!found)
            throw ConfigError(std::string("lattice has no ") + (bottom ? "bottom" : "top"));
        return *found;
    }

    void compute_joins() {
        auto n = names_.size();
        join_.assign(n, std::vector<Level>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                std::optional<Level> lub;
                for (std::size_t u = 0; u < n; ++u) {
                    if (!leq_[i][u] || !leq_[j][u]) continue;
                    bool least = true;
                    for (std::size_t w = 0; w < n; ++w)
                        if (leq_[i][w] && leq_[j][w] && !leq_[u][w]) { least = false; break; }
                    if (least) {
                        if (lub && lub->idx != u)
                            throw ConfigError("levels '" + names_[i] + "' and '" + names_[j] +
                                              "' have no unique join");
                        lub = Level{static_cast<std::uint8_t>(u)};
                    }
                }
                if (!lub)
                    throw ConfigError("levels '" + names_[i] + "' and '" + names_[j] +
                                      "' have no join");
                join_[i][j] = *lub;
            }
    }

    std::vector<std::string> names_;
    std::map<std::string, std::uint8_t> index_;
    std::vector<std::vector<bool>> leq_;
    std::vector<std::vector<Level>> join_;
    Level bottom_{};
    Level top_{};
};

}  // namespace selene
