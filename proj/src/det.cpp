#include "hpdet/det.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>

#include "hpdet/error.hpp"
#include "hpdet/rng.hpp"
#include "hpdet/truncation.hpp"

namespace hpdet {

std::int32_t PartitionTree::find_leaf(std::span<const double> x) const {
  if (!rect_.contains(x)) return -1;
  // Descend in the unit-cube frame; by monotonicity of the affine map the
  // coordinates stay in [0,1] for points inside the rect.
  std::vector<double> s(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    s[i] = (x[i] - rect_.lower[i]) / rect_.side(i);
  std::int32_t node = 0;
  while (nodes_[node].split_dim >= 0) {
    const Node& nd = nodes_[node];
    node = s[nd.split_dim] < nd.split_unit ? nd.left : nd.right;
  }
  return nodes_[node].leaf_index;
}

double PartitionTree::density(std::span<const double> x) const {
  std::int32_t leaf = find_leaf(x);
  if (leaf < 0) return 0.0;
  const LeafCell& cell = leaves_[leaf];
  if (cell.count == 0) return 0.0;
  return std::exp(std::log(static_cast<double>(cell.count)) -
                  std::log(static_cast<double>(n_inside_)) -
                  cell.log_volume);
}

double PartitionTree::leaf_log_density(std::size_t leaf_index) const {
  const LeafCell& cell = leaves_[leaf_index];
  if (cell.count == 0) return -std::numeric_limits<double>::infinity();
  return std::log(static_cast<double>(cell.count)) -
         std::log(static_cast<double>(n_inside_)) - cell.log_volume;
}

namespace {

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h) {
  const unsigned char* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t hash_doubles(std::span<const double> values, std::uint64_t h) {
  return fnv1a(values.data(), values.size() * sizeof(double), h);
}

}  // namespace

std::uint64_t PartitionTree::structural_hash() const {
  // Preorder traversal so the hash reflects the logical tree, not the node
  // storage order (which changes across serialisation).
  std::uint64_t h = 14695981039346656037ULL;
  h = hash_doubles(rect_.lower, h);
  h = hash_doubles(rect_.upper, h);
  h = hash_doubles({&tau_, 1}, h);
  h = fnv1a(&n_inside_, sizeof(n_inside_), h);
  auto visit = [&](auto&& self, std::int32_t idx) -> void {
    const Node& nd = nodes_[idx];
    h = fnv1a(&nd.split_dim, sizeof(nd.split_dim), h);
    if (nd.split_dim < 0) {
      const LeafCell& leaf = leaves_[nd.leaf_index];
      h = fnv1a(&leaf.count, sizeof(leaf.count), h);
      h = hash_doubles(leaf.cell.lower, h);
      h = hash_doubles(leaf.cell.upper, h);
      return;
    }
    h = hash_doubles({&nd.split_raw, 1}, h);
    self(self, nd.left);
    self(self, nd.right);
  };
  visit(visit, 0);
  return h;
}

namespace detail {

enum class BuildFrame { unit, raw };

struct TreeBuilder {
  static PartitionTree build(const SampleMatrix& train, const HyperRect& rect,
                             double tau, const DetConfig& cfg,
                             BuildFrame frame);
};

namespace {

struct WorkItem {
  std::int32_t node = 0;
  std::vector<double> a, b;          // cell bounds in the build frame
  std::vector<double> raw_a, raw_b;  // cell bounds in rect coordinates
  std::size_t begin = 0, end = 0;    // range into the permutation array
};

}  // namespace

PartitionTree TreeBuilder::build(const SampleMatrix& train,
                                 const HyperRect& rect, double tau,
                                 const DetConfig& cfg, BuildFrame frame) {
  rect.validate();
  train.validate();
  require(tau > 0.0, "tau must be positive, got ", tau);
  require(train.dims() == rect.dims(), "sample dimension ", train.dims(),
          " does not match rect dimension ", rect.dims());
  const std::size_t d = rect.dims();

  // Keep the samples inside the (closed) rect; map to the build frame.
  std::vector<std::size_t> inside;
  inside.reserve(train.rows());
  for (std::size_t i = 0; i < train.rows(); ++i) {
    if (rect.contains(train.row(i))) inside.push_back(i);
  }
  const std::size_t n = inside.size();
  require(n >= 1, "no training samples fall inside the truncation set");

  std::vector<double> pts(n * d);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < d; ++i) {
      double x = train(inside[j], i);
      pts[j * d + i] = frame == BuildFrame::unit
                           ? (x - rect.lower[i]) / rect.side(i)
                           : x;
    }
  }

  PartitionTree tree;
  tree.rect_ = rect;
  tree.tau_ = tau;
  tree.n_inside_ = static_cast<std::int64_t>(n);
  tree.cfg_ = cfg;

  std::vector<std::size_t> perm(n);
  for (std::size_t j = 0; j < n; ++j) perm[j] = j;

  const double split_bound = tau * std::sqrt(static_cast<double>(n));
  std::deque<WorkItem> queue;
  tree.nodes_.emplace_back();
  {
    WorkItem root;
    root.node = 0;
    root.raw_a = rect.lower;
    root.raw_b = rect.upper;
    if (frame == BuildFrame::unit) {
      root.a.assign(d, 0.0);
      root.b.assign(d, 1.0);
    } else {
      root.a = rect.lower;
      root.b = rect.upper;
    }
    root.begin = 0;
    root.end = n;
    queue.push_back(std::move(root));
  }

  std::vector<double> local;  // leaf-local coordinates, reused across cells
  while (!queue.empty()) {
    WorkItem item = std::move(queue.front());
    queue.pop_front();
    const std::size_t n_k = item.end - item.begin;

    bool split_done = false;
    bool splittable = n_k > 2;
    if (splittable) {
      // a cell of exact duplicates can never be separated
      const double* first = &pts[perm[item.begin] * d];
      bool all_same = true;
      for (std::size_t j = 1; j < n_k && all_same; ++j) {
        const double* p = &pts[perm[item.begin + j] * d];
        for (std::size_t i = 0; i < d; ++i) {
          if (p[i] != first[i]) {
            all_same = false;
            break;
          }
        }
      }
      splittable = !all_same;
    }
    if (splittable) {
      local.resize(n_k * d);
      for (std::size_t j = 0; j < n_k; ++j) {
        const double* p = &pts[perm[item.begin + j] * d];
        for (std::size_t i = 0; i < d; ++i) {
          local[j * d + i] = (p[i] - item.a[i]) / (item.b[i] - item.a[i]);
        }
      }

      DiscrepancyConfig disc = cfg.disc;
      disc.seed = mix_seed(cfg.disc.seed,
                           static_cast<std::uint64_t>(item.node));
      DiscrepancyEstimate dstar = star_discrepancy(local, d, disc);

      if (dstar.value > split_bound / static_cast<double>(n_k)) {
        MaxGap gap = max_gap(local, d, cfg.disc.m_g);
        const std::size_t dim = gap.dim;
        const double frac =
            static_cast<double>(gap.bin) / static_cast<double>(cfg.disc.m_g);
        const double width = item.b[dim] - item.a[dim];
        const double c = item.a[dim] + width * frac;
        const double raw_c =
            frame == BuildFrame::unit
                ? rect.lower[dim] + rect.side(dim) * c
                : c;

        // side floor is measured against the truncation-set side, so chains
        // of near-duplicate points terminate at a fixed absolute scale
        const double scale =
            frame == BuildFrame::unit ? 1.0 : rect.side(dim);
        bool wide_enough = (c - item.a[dim]) > cfg.min_rel_side * scale &&
                           (item.b[dim] - c) > cfg.min_rel_side * scale &&
                           raw_c > item.raw_a[dim] && raw_c < item.raw_b[dim];
        if (wide_enough) {
          auto mid = std::partition(
              perm.begin() + static_cast<std::ptrdiff_t>(item.begin),
              perm.begin() + static_cast<std::ptrdiff_t>(item.end),
              [&](std::size_t idx) { return pts[idx * d + dim] < c; });
          std::size_t split_at =
              static_cast<std::size_t>(mid - perm.begin());

          const auto left_index = static_cast<std::int32_t>(tree.nodes_.size());
          const auto right_index = left_index + 1;
          {
            PartitionTree::Node& node = tree.nodes_[item.node];
            node.split_dim = static_cast<std::int32_t>(dim);
            node.split_unit = frame == BuildFrame::unit
                                  ? c
                                  : (c - rect.lower[dim]) / rect.side(dim);
            node.split_raw = raw_c;
            node.left = left_index;
            node.right = right_index;
          }
          tree.nodes_.emplace_back();  // invalidates references into nodes_
          tree.nodes_.emplace_back();

          WorkItem left, right;
          left.node = left_index;
          right.node = right_index;
          left.a = item.a;
          left.b = item.b;
          left.b[dim] = c;
          right.a = item.a;
          right.b = item.b;
          right.a[dim] = c;
          left.raw_a = item.raw_a;
          left.raw_b = item.raw_b;
          left.raw_b[dim] = raw_c;
          right.raw_a = item.raw_a;
          right.raw_b = item.raw_b;
          right.raw_a[dim] = raw_c;
          left.begin = item.begin;
          left.end = split_at;
          right.begin = split_at;
          right.end = item.end;
          queue.push_back(std::move(left));
          queue.push_back(std::move(right));
          split_done = true;
        }
      }
    }

    if (!split_done) {
      LeafCell leaf;
      leaf.cell = HyperRect(item.raw_a, item.raw_b);
      leaf.count = static_cast<std::int64_t>(n_k);
      leaf.log_volume = leaf.cell.log_volume();
      leaf.leaf_id = static_cast<std::int32_t>(tree.leaves_.size());
      tree.nodes_[item.node].leaf_index = leaf.leaf_id;
      tree.leaves_.push_back(std::move(leaf));
    }
  }

  return tree;
}

}  // namespace detail

PartitionTree build_det(const SampleMatrix& train, const HyperRect& rect,
                        double tau, const DetConfig& cfg) {
  return detail::TreeBuilder::build(train, rect, tau, cfg,
                                    detail::BuildFrame::unit);
}

double mass_on_rect(const PartitionTree& tree, const HyperRect& query) {
  query.validate();
  require(query.dims() == tree.rect().dims(), "query dimension ",
          query.dims(), " does not match tree dimension ",
          tree.rect().dims());

  const auto& nodes = tree.nodes();
  const std::size_t d = query.dims();

  // Recursive descent carrying node bounds; bounds are re-derived exactly as
  // the leaf cells were, so a fully covered leaf contributes ratio 1.
  std::vector<double> lo = tree.rect().lower;
  std::vector<double> hi = tree.rect().upper;
  double acc = 0.0;

  auto recurse = [&](auto&& self, std::int32_t node_idx) -> void {
    for (std::size_t i = 0; i < d; ++i) {
      // zero-volume overlap contributes nothing
      if (query.upper[i] <= lo[i] || query.lower[i] >= hi[i]) return;
    }
    const PartitionTree::Node& node = nodes[node_idx];
    if (node.split_dim < 0) {
      const LeafCell& leaf = tree.leaves()[node.leaf_index];
      if (leaf.count == 0) return;
      double ratio = 1.0;
      for (std::size_t i = 0; i < d; ++i) {
        double a = std::max(lo[i], query.lower[i]);
        double b = std::min(hi[i], query.upper[i]);
        if (b <= a) return;
        ratio *= (b - a) / (hi[i] - lo[i]);
      }
      acc += static_cast<double>(leaf.count) * ratio;
      return;
    }
    const std::size_t dim = static_cast<std::size_t>(node.split_dim);
    const double saved_hi = hi[dim];
    const double saved_lo = lo[dim];
    hi[dim] = node.split_raw;
    self(self, node.left);
    hi[dim] = saved_hi;
    lo[dim] = node.split_raw;
    self(self, node.right);
    lo[dim] = saved_lo;
  };
  recurse(recurse, 0);

  double mass = acc / static_cast<double>(tree.sample_count());
  return std::clamp(mass, 0.0, 1.0);
}

bool partition_equivalence_check(const SampleMatrix& train,
                                 const HyperRect& rect, double tau,
                                 const DetConfig& cfg, double rel_tol) {
  PartitionTree unit_tree = detail::TreeBuilder::build(
      train, rect, tau, cfg, detail::BuildFrame::unit);
  PartitionTree raw_tree = detail::TreeBuilder::build(
      train, rect, tau, cfg, detail::BuildFrame::raw);

  if (unit_tree.leaves().size() != raw_tree.leaves().size()) return false;
  for (std::size_t k = 0; k < unit_tree.leaves().size(); ++k) {
    const LeafCell& a = unit_tree.leaves()[k];
    const LeafCell& b = raw_tree.leaves()[k];
    if (a.count != b.count) return false;
    for (std::size_t i = 0; i < rect.dims(); ++i) {
      double scale = rect.side(i);
      if (std::fabs(a.cell.lower[i] - b.cell.lower[i]) > rel_tol * scale)
        return false;
      if (std::fabs(a.cell.upper[i] - b.cell.upper[i]) > rel_tol * scale)
        return false;
    }
  }
  return true;
}

nlohmann::json to_json(const PartitionTree& tree) {
  nlohmann::json leaves = nlohmann::json::array();
  for (const LeafCell& leaf : tree.leaves()) {
    leaves.push_back({{"id", leaf.leaf_id},
                      {"lower", leaf.cell.lower},
                      {"upper", leaf.cell.upper},
                      {"count", leaf.count}});
  }
  // Children encode split indices as-is and leaves as -(leaf_id + 1).
  nlohmann::json splits = nlohmann::json::array();
  std::vector<std::int32_t> split_index(tree.nodes().size(), -1);
  std::int32_t next = 0;
  for (std::size_t i = 0; i < tree.nodes().size(); ++i) {
    if (tree.nodes()[i].split_dim >= 0)
      split_index[i] = next++;
  }
  auto encode = [&](std::int32_t child) -> std::int64_t {
    const auto& node = tree.nodes()[child];
    if (node.split_dim < 0) return -static_cast<std::int64_t>(node.leaf_index) - 1;
    return split_index[child];
  };
  for (std::size_t i = 0; i < tree.nodes().size(); ++i) {
    const auto& node = tree.nodes()[i];
    if (node.split_dim < 0) continue;
    splits.push_back({{"dim", node.split_dim},
                      {"coord", node.split_raw},
                      {"unit", node.split_unit},
                      {"left", encode(node.left)},
                      {"right", encode(node.right)}});
  }
  const DiscrepancyConfig& disc = tree.config().disc;
  return {{"rect", rect_to_json(tree.rect())},
          {"tau", tree.tau()},
          {"N", tree.sample_count()},
          {"leaves", leaves},
          {"splits", splits},
          {"config", {{"m_g", disc.m_g},
                      {"budget", disc.budget},
                      {"starts", disc.starts},
                      {"seed", disc.seed}}}};
}

PartitionTree tree_from_json(const nlohmann::json& j) {
  PartitionTree tree;
  tree.rect_ = rect_from_json(j.at("rect"));
  tree.tau_ = j.at("tau").get<double>();
  tree.n_inside_ = j.at("N").get<std::int64_t>();
  if (j.contains("config")) {
    const auto& c = j.at("config");
    tree.cfg_.disc.m_g = c.at("m_g").get<int>();
    tree.cfg_.disc.budget = c.at("budget").get<std::int64_t>();
    tree.cfg_.disc.starts = c.at("starts").get<int>();
    tree.cfg_.disc.seed = c.at("seed").get<std::uint64_t>();
  }

  const auto& jleaves = j.at("leaves");
  tree.leaves_.resize(jleaves.size());
  std::int64_t total = 0;
  for (const auto& jl : jleaves) {
    LeafCell leaf;
    leaf.leaf_id = jl.at("id").get<std::int32_t>();
    leaf.cell = HyperRect(jl.at("lower").get<std::vector<double>>(),
                          jl.at("upper").get<std::vector<double>>());
    leaf.cell.validate();
    leaf.count = jl.at("count").get<std::int64_t>();
    leaf.log_volume = leaf.cell.log_volume();
    require(leaf.leaf_id >= 0 &&
                static_cast<std::size_t>(leaf.leaf_id) < tree.leaves_.size(),
            "tree JSON: leaf id ", leaf.leaf_id, " out of range");
    total += leaf.count;
    tree.leaves_[leaf.leaf_id] = std::move(leaf);
  }
  require(total == tree.n_inside_, "tree JSON: leaf counts sum to ", total,
          " but N is ", tree.n_inside_);

  const auto& jsplits = j.at("splits");
  if (jsplits.empty()) {
    require(tree.leaves_.size() == 1,
            "tree JSON: no splits but multiple leaves");
    PartitionTree::Node root;
    root.leaf_index = 0;
    tree.nodes_.push_back(root);
    return tree;
  }

  // Split records in build order; node 0 is the root split. Leaf children
  // are encoded as -(leaf_id + 1).
  std::vector<std::int32_t> split_node(jsplits.size(), -1);
  std::vector<std::int32_t> leaf_node(tree.leaves_.size(), -1);
  tree.nodes_.reserve(jsplits.size() + tree.leaves_.size());
  for (std::size_t s = 0; s < jsplits.size(); ++s) {
    tree.nodes_.emplace_back();
    split_node[s] = static_cast<std::int32_t>(s);
  }
  for (std::size_t k = 0; k < tree.leaves_.size(); ++k) {
    PartitionTree::Node node;
    node.leaf_index = static_cast<std::int32_t>(k);
    leaf_node[k] = static_cast<std::int32_t>(tree.nodes_.size());
    tree.nodes_.push_back(node);
  }
  auto decode = [&](std::int64_t child) -> std::int32_t {
    if (child < 0) {
      std::int64_t leaf_id = -child - 1;
      require(leaf_id >= 0 &&
                  leaf_id < static_cast<std::int64_t>(leaf_node.size()),
              "tree JSON: leaf reference ", child, " out of range");
      return leaf_node[static_cast<std::size_t>(leaf_id)];
    }
    require(child < static_cast<std::int64_t>(split_node.size()),
            "tree JSON: split reference ", child, " out of range");
    return split_node[static_cast<std::size_t>(child)];
  };
  for (std::size_t s = 0; s < jsplits.size(); ++s) {
    const auto& js = jsplits[s];
    PartitionTree::Node& node = tree.nodes_[split_node[s]];
    node.split_dim = js.at("dim").get<std::int32_t>();
    node.split_raw = js.at("coord").get<double>();
    node.split_unit =
        js.contains("unit")
            ? js.at("unit").get<double>()
            : (node.split_raw - tree.rect_.lower[node.split_dim]) /
                  tree.rect_.side(node.split_dim);
    node.left = decode(js.at("left").get<std::int64_t>());
    node.right = decode(js.at("right").get<std::int64_t>());
  }
  return tree;
}

}  // namespace hpdet
