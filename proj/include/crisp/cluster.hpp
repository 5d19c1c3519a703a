#ifndef CRISP_CLUSTER_HPP
#define CRISP_CLUSTER_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "crisp/embed.hpp"
#include "crisp/rng.hpp"

namespace crisp {

// Radix-path cluster id: path encodes the base-arity digits of the
// root-to-node descent, so truncating the last digit gives the parent.
struct ClusterId {
    std::uint32_t level = 0;
    std::uint64_t path = 0;

    friend bool operator==(const ClusterId&, const ClusterId&) = default;
};

inline ClusterId parent_of(const ClusterId& id, std::uint32_t arity) {
    return {id.level == 0 ? 0 : id.level - 1, id.level == 0 ? 0 : id.path / arity};
}

// Hierarchical centroid tree. Level l (1-based) holds arity^l unit-norm
// centroids; node n's children at the next level are n*arity .. n*arity+arity-1.
// The root is implicit (level 0, path 0).
class ClusterTree {
public:
    ClusterTree() = default;
    ClusterTree(std::uint32_t arity, std::uint32_t depth, std::uint32_t dim, std::uint64_t seed);

    std::uint32_t arity() const { return arity_; }
    std::uint32_t depth() const { return depth_; }
    std::uint32_t dim() const { return dim_; }
    std::uint64_t seed() const { return seed_; }

    // arity^level, checked against overflow. Pure arithmetic: valid for any
    // level whether or not centroids are materialized.
    static std::uint64_t level_size(std::uint32_t arity, std::uint32_t level);
    std::uint64_t level_size(std::uint32_t level) const { return level_size(arity_, level); }

    const float* centroid(std::uint32_t level, std::uint64_t path) const;
    float* mutable_centroid(std::uint32_t level, std::uint64_t path);
    const std::vector<float>& level_data(std::uint32_t level) const;

private:
    std::uint32_t arity_ = 0;
    std::uint32_t depth_ = 0;
    std::uint32_t dim_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<std::vector<float>> levels_;  // levels_[l-1]: arity^l x dim row-major
};

// Read-only view of row-major points.
struct PointsView {
    const float* data = nullptr;
    std::size_t count = 0;
    std::uint32_t dim = 0;

    const float* row(std::size_t i) const { return data + i * dim; }
};

inline PointsView points_of(const EmbeddingSet& set) {
    return {set.size() ? set.vec(0) : nullptr, set.size(), set.dim()};
}

double squared_distance(const float* a, const float* b, std::uint32_t dim);

// k-means++ seeding over the given subset: first centroid uniform, each next
// proportional to squared distance to the nearest chosen one. Returns k
// centroids row-major.
std::vector<float> kmeanspp_init(const PointsView& points,
                                 const std::vector<std::uint32_t>& subset, std::uint32_t k,
                                 Rng& rng);

// Mini-batch spherical k-means state: count-weighted running-mean updates,
// re-normalization after every update, empty clusters re-seeded from the
// batch point farthest from its assigned centroid.
class MiniBatchKMeans {
public:
    MiniBatchKMeans(std::vector<float> centroids, std::uint32_t k, std::uint32_t dim);

    std::uint32_t k() const { return k_; }
    const std::vector<float>& centroids() const { return centroids_; }
    const std::vector<std::uint64_t>& counts() const { return counts_; }

    // Nearest centroid per batch point, ties to the lowest index.
    std::vector<std::uint32_t> assign(const PointsView& points,
                                      const std::vector<std::uint32_t>& batch) const;

    void update(const PointsView& points, const std::vector<std::uint32_t>& batch,
                const std::vector<std::uint32_t>& assignments);

    // One EM step: assign then update. Returns the assignments.
    std::vector<std::uint32_t> step(const PointsView& points,
                                    const std::vector<std::uint32_t>& batch);

private:
    std::uint32_t k_;
    std::uint32_t dim_;
    std::vector<float> centroids_;
    std::vector<std::uint64_t> counts_;
};

// Moves a uniformly random half of the largest over-limit cluster to the
// currently smallest cluster until every cluster holds at most
// limit * batch_size points (or the iteration cap of 10 * num_clusters is
// hit). limit must be at least 1/num_clusters.
std::vector<std::uint32_t> balance(std::vector<std::uint32_t> assignments,
                                   std::uint32_t num_clusters, double limit, Rng& rng);

struct TreeConfig {
    std::uint32_t arity = 64;
    std::uint32_t depth = 4;
    std::uint32_t steps = 20;
    std::uint32_t samples_per_step = 6400;
    double balancing_limit = 0.022;
    std::uint64_t seed = 0;
};

// Per-step record of the balanced assignment counts, for auditing the
// balancing invariant on real training runs.
struct TreeTrainStats {
    struct StepRecord {
        std::uint32_t level;
        std::uint64_t node;
        std::uint32_t step;
        std::uint32_t batch_size;
        std::uint32_t max_cluster_count;  // after balancing
    };
    std::vector<StepRecord> steps;
    std::vector<std::string> warnings;
};

struct TreeTrainResult {
    ClusterTree tree;
    TreeTrainStats stats;
};

// Trains the tree root to leaves. Each node's split is fit with mini-batch
// EM over samples routed to that node, k-means++ initialized, balanced after
// every assignment step. Deterministic given cfg.seed.
TreeTrainResult train_tree(const EmbeddingSet& embeddings, const TreeConfig& cfg);

// Greedy root-to-level descent: at each level pick the nearest child of the
// current node (ties to the lowest child index).
ClusterId assign(const ClusterTree& tree, const float* embedding, std::uint32_t level);

struct AssignmentTable {
    std::uint32_t level = 0;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> entries;  // (window_id, path), sorted by id
    std::map<std::uint64_t, std::uint64_t> counts;                 // path -> count
};

AssignmentTable assign_all(const ClusterTree& tree, const EmbeddingSet& set,
                           std::uint32_t level);

// Tree files: magic "TREE", u32 arity, u32 depth, u32 dim, u64 seed, then
// centroids per level in node order (f32).
void write_tree(const ClusterTree& tree, const std::string& path);
ClusterTree read_tree(const std::string& path);

// Assignment files: magic "ASG1", u32 level, u64 count, (u64 id, u64 path) pairs.
void write_assignments(const AssignmentTable& table, const std::string& path);
AssignmentTable read_assignments(const std::string& path);

}  // namespace crisp

#endif  // CRISP_CLUSTER_HPP
