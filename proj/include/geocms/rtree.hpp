#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "geocms/temporal.hpp"

namespace geocms {

/// Guttman R-tree over lon/lat boxes with quadratic split.
///
/// Values are compared with operator== on removal, so a (box, value) pair
/// identifies an entry. Not thread-safe; callers synchronize.
template <typename T, std::size_t MaxEntries = 16>
class RTree {
  static_assert(MaxEntries >= 4);

 public:
  static constexpr std::size_t kMaxEntries = MaxEntries;
  static constexpr std::size_t kMinEntries = MaxEntries * 2 / 5;

  RTree() : root_(std::make_unique<Node>(0)) {}
  RTree(RTree&&) noexcept = default;
  RTree& operator=(RTree&&) noexcept = default;
  RTree(const RTree& other) : root_(clone(*other.root_)), size_(other.size_) {}
  RTree& operator=(const RTree& other) {
    if (this != &other) {
      root_ = clone(*other.root_);
      size_ = other.size_;
    }
    return *this;
  }

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  int height() const { return root_->level + 1; }

  void clear() {
    root_ = std::make_unique<Node>(0);
    size_ = 0;
  }

  void insert(const BBox& box, T value) {
    insert_entry(Entry{box, nullptr, std::move(value)}, 0);
    ++size_;
  }

  /// Removes one entry equal to (box, value). Returns false when absent.
  bool remove(const BBox& box, const T& value) {
    std::vector<Orphan> orphans;
    if (!remove_rec(*root_, box, value, orphans)) return false;
    --size_;
    for (auto& o : orphans) insert_entry(std::move(o.entry), o.level);
    while (!root_->leaf() && root_->entries.size() == 1) {
      root_ = std::move(root_->entries.front().child);
    }
    return true;
  }

  /// Calls `visit(box, value)` for every entry whose box intersects `query`.
  void search(const BBox& query, const std::function<void(const BBox&, const T&)>& visit) const {
    search_rec(*root_, query, visit);
  }

  std::vector<T> search(const BBox& query) const {
    std::vector<T> out;
    search(query, [&](const BBox&, const T& v) { out.push_back(v); });
    return out;
  }

  /// Structural self-check for tests: uniform leaf depth, fan-out bounds,
  /// and tight parent boxes.
  bool check_invariants() const {
    std::size_t count = 0;
    return check_rec(*root_, true, count) && count == size_;
  }

 private:
  struct Node;

  struct Entry {
    BBox box;
    std::unique_ptr<Node> child;  // internal nodes
    T value{};                    // leaves
  };

  struct Node {
    explicit Node(int lvl) : level(lvl) {}
    int level;  // 0 for leaves
    std::vector<Entry> entries;
    bool leaf() const { return level == 0; }
  };

  struct Orphan {
    Entry entry;
    int level;
  };

  static BBox cover(const Node& n) {
    BBox b = n.entries.front().box;
    for (const auto& e : n.entries) b.expand(e.box);
    return b;
  }

  static BBox merged(BBox a, const BBox& b) {
    a.expand(b);
    return a;
  }

  static double enlargement(const BBox& base, const BBox& add) { return merged(base, add).area() - base.area(); }

  static std::unique_ptr<Node> clone(const Node& n) {
    auto out = std::make_unique<Node>(n.level);
    out->entries.reserve(n.entries.size());
    for (const auto& e : n.entries) {
      out->entries.push_back(Entry{e.box, e.child ? clone(*e.child) : nullptr, e.value});
    }
    return out;
  }

  void insert_entry(Entry entry, int level) {
    auto sibling = insert_rec(*root_, std::move(entry), level);
    if (sibling) {
      auto new_root = std::make_unique<Node>(root_->level + 1);
      const BBox left = cover(*root_);
      const BBox right = cover(*sibling);
      new_root->entries.push_back(Entry{left, std::move(root_), T{}});
      new_root->entries.push_back(Entry{right, std::move(sibling), T{}});
      root_ = std::move(new_root);
    }
  }

  // Returns the new sibling when `node` had to split.
  std::unique_ptr<Node> insert_rec(Node& node, Entry entry, int level) {
    if (node.level == level) {
      node.entries.push_back(std::move(entry));
    } else {
      std::size_t best = 0;
      double best_growth = std::numeric_limits<double>::infinity();
      double best_area = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < node.entries.size(); ++i) {
        const double growth = enlargement(node.entries[i].box, entry.box);
        const double area = node.entries[i].box.area();
        if (growth < best_growth || (growth == best_growth && area < best_area)) {
          best = i;
          best_growth = growth;
          best_area = area;
        }
      }
      Entry& target = node.entries[best];
      auto sibling = insert_rec(*target.child, std::move(entry), level);
      target.box = cover(*target.child);
      if (sibling) {
        const BBox box = cover(*sibling);
        node.entries.push_back(Entry{box, std::move(sibling), T{}});
      }
    }
    if (node.entries.size() > MaxEntries) return split(node);
    return nullptr;
  }

  // Quadratic split: seed with the most wasteful pair, then place entries in
  // order of strongest group preference.
  std::unique_ptr<Node> split(Node& node) {
    std::vector<Entry> pool = std::move(node.entries);
    node.entries.clear();
    auto sibling = std::make_unique<Node>(node.level);

    std::size_t seed_a = 0, seed_b = 1;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pool.size(); ++i) {
      for (std::size_t j = i + 1; j < pool.size(); ++j) {
        const double waste = merged(pool[i].box, pool[j].box).area() - pool[i].box.area() - pool[j].box.area();
        if (waste > worst) {
          worst = waste;
          seed_a = i;
          seed_b = j;
        }
      }
    }
    BBox box_a = pool[seed_a].box;
    BBox box_b = pool[seed_b].box;
    node.entries.push_back(std::move(pool[seed_a]));
    sibling->entries.push_back(std::move(pool[seed_b]));
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(seed_b));
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(seed_a));

    while (!pool.empty()) {
      if (node.entries.size() + pool.size() == kMinEntries) {
        for (auto& e : pool) {
          box_a.expand(e.box);
          node.entries.push_back(std::move(e));
        }
        break;
      }
      if (sibling->entries.size() + pool.size() == kMinEntries) {
        for (auto& e : pool) {
          box_b.expand(e.box);
          sibling->entries.push_back(std::move(e));
        }
        break;
      }
      std::size_t pick = 0;
      double strongest = -1.0;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        const double pref = std::abs(enlargement(box_a, pool[i].box) - enlargement(box_b, pool[i].box));
        if (pref > strongest) {
          strongest = pref;
          pick = i;
        }
      }
      const double ga = enlargement(box_a, pool[pick].box);
      const double gb = enlargement(box_b, pool[pick].box);
      bool to_a;
      if (ga != gb) {
        to_a = ga < gb;
      } else if (box_a.area() != box_b.area()) {
        to_a = box_a.area() < box_b.area();
      } else {
        to_a = node.entries.size() <= sibling->entries.size();
      }
      if (to_a) {
        box_a.expand(pool[pick].box);
        node.entries.push_back(std::move(pool[pick]));
      } else {
        box_b.expand(pool[pick].box);
        sibling->entries.push_back(std::move(pool[pick]));
      }
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    return sibling;
  }

  bool remove_rec(Node& node, const BBox& box, const T& value, std::vector<Orphan>& orphans) {
    if (node.leaf()) {
      for (auto it = node.entries.begin(); it != node.entries.end(); ++it) {
        if (it->box == box && it->value == value) {
          node.entries.erase(it);
          return true;
        }
      }
      return false;
    }
    for (auto it = node.entries.begin(); it != node.entries.end(); ++it) {
      if (!it->box.intersects(box) || !contains(it->box, box)) continue;
      if (!remove_rec(*it->child, box, value, orphans)) continue;
      if (it->child->entries.size() < kMinEntries) {
        for (auto& e : it->child->entries) orphans.push_back(Orphan{std::move(e), it->child->level});
        node.entries.erase(it);
      } else {
        it->box = cover(*it->child);
      }
      return true;
    }
    return false;
  }

  static bool contains(const BBox& outer, const BBox& inner) {
    return outer.min_lon <= inner.min_lon && outer.min_lat <= inner.min_lat && inner.max_lon <= outer.max_lon &&
           inner.max_lat <= outer.max_lat;
  }

  void search_rec(const Node& node, const BBox& query,
                  const std::function<void(const BBox&, const T&)>& visit) const {
    for (const auto& e : node.entries) {
      if (!e.box.intersects(query)) continue;
      if (node.leaf()) {
        visit(e.box, e.value);
      } else {
        search_rec(*e.child, query, visit);
      }
    }
  }

  bool check_rec(const Node& node, bool is_root, std::size_t& count) const {
    if (node.entries.size() > MaxEntries) return false;
    if (!is_root && node.entries.size() < kMinEntries) return false;
    if (node.leaf()) {
      count += node.entries.size();
      return true;
    }
    if (is_root && node.entries.size() < 2) return false;
    for (const auto& e : node.entries) {
      if (!e.child || e.child->level != node.level - 1) return false;
      if (!(e.box == cover(*e.child))) return false;
      if (!check_rec(*e.child, false, count)) return false;
    }
    return true;
  }

  std::unique_ptr<Node> root_;
  std::size_t size_ = 0;
};

}  // namespace geocms
