#include "crisp/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "crisp/binio.hpp"
#include "crisp/error.hpp"

namespace crisp {

ClusterTree::ClusterTree(std::uint32_t arity, std::uint32_t depth, std::uint32_t dim,
                         std::uint64_t seed)
    : arity_(arity), depth_(depth), dim_(dim), seed_(seed) {
    if (arity < 2) throw UsageError("tree arity must be at least 2");
    if (depth < 1) throw UsageError("tree depth must be at least 1");
    if (dim == 0) throw UsageError("tree dim must be positive");
    levels_.resize(depth);
    for (std::uint32_t l = 1; l <= depth; ++l) {
        const std::uint64_t nodes = level_size(l);
        if (nodes > (std::uint64_t(1) << 33) / dim_) {
            throw DataError("tree level " + std::to_string(l) + " (" + std::to_string(nodes) +
                            " nodes x dim " + std::to_string(dim_) +
                            ") is too large to materialize");
        }
        levels_[l - 1].assign(nodes * dim_, 0.0f);
    }
}

std::uint64_t ClusterTree::level_size(std::uint32_t arity, std::uint32_t level) {
    std::uint64_t size = 1;
    for (std::uint32_t l = 0; l < level; ++l) {
        if (size > std::numeric_limits<std::uint64_t>::max() / arity) {
            throw DataError("cluster count overflows u64 at level " + std::to_string(level));
        }
        size *= arity;
    }
    return size;
}

const float* ClusterTree::centroid(std::uint32_t level, std::uint64_t path) const {
    return levels_[level - 1].data() + path * dim_;
}

float* ClusterTree::mutable_centroid(std::uint32_t level, std::uint64_t path) {
    return levels_[level - 1].data() + path * dim_;
}

const std::vector<float>& ClusterTree::level_data(std::uint32_t level) const {
    return levels_[level - 1];
}

double squared_distance(const float* a, const float* b, std::uint32_t dim) {
    double acc = 0.0;
    for (std::uint32_t i = 0; i < dim; ++i) {
        const double d = double(a[i]) - double(b[i]);
        acc += d * d;
    }
    return acc;
}

std::vector<float> kmeanspp_init(const PointsView& points,
                                 const std::vector<std::uint32_t>& subset, std::uint32_t k,
                                 Rng& rng) {
    const std::size_t n = subset.size();
    if (k == 0) throw UsageError("k must be positive");
    if (n < k) {
        throw DataError("k-means++ needs at least k points: k=" + std::to_string(k) +
                        ", points=" + std::to_string(n));
    }
    const std::uint32_t dim = points.dim;

    std::vector<float> centroids;
    centroids.reserve(std::size_t(k) * dim);
    std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
    std::vector<bool> chosen(n, false);

    auto add_centroid = [&](std::size_t idx) {
        const float* row = points.row(subset[idx]);
        centroids.insert(centroids.end(), row, row + dim);
        chosen[idx] = true;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = squared_distance(points.row(subset[i]), row, dim);
            if (d < min_dist[i]) min_dist[i] = d;
        }
    };

    add_centroid(static_cast<std::size_t>(rng.below(n)));

    for (std::uint32_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (double d : min_dist) total += d;
        std::size_t pick = n;
        if (total > 0.0) {
            const double x = rng.uniform() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += min_dist[i];
                if (x < acc) {
                    pick = i;
                    break;
                }
            }
            if (pick == n) {  // fp fall-through: last point with positive weight
                for (std::size_t i = n; i-- > 0;) {
                    if (min_dist[i] > 0.0) {
                        pick = i;
                        break;
                    }
                }
            }
        }
        if (pick == n) {
            // All remaining weights vanish (duplicate points): uniform over unchosen.
            std::size_t unchosen = 0;
            for (bool c2 : chosen)
                if (!c2) ++unchosen;
            std::uint64_t target = rng.below(unchosen);
            for (std::size_t i = 0; i < n; ++i) {
                if (!chosen[i] && target-- == 0) {
                    pick = i;
                    break;
                }
            }
        }
        add_centroid(pick);
    }
    return centroids;
}

MiniBatchKMeans::MiniBatchKMeans(std::vector<float> centroids, std::uint32_t k,
                                 std::uint32_t dim)
    : k_(k), dim_(dim), centroids_(std::move(centroids)), counts_(k, 0) {
    if (centroids_.size() != std::size_t(k) * dim) {
        throw UsageError("centroid buffer size does not match k x dim");
    }
}

std::vector<std::uint32_t> MiniBatchKMeans::assign(
    const PointsView& points, const std::vector<std::uint32_t>& batch) const {
    std::vector<std::uint32_t> out(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const float* row = points.row(batch[i]);
        double best = std::numeric_limits<double>::infinity();
        std::uint32_t arg = 0;
        for (std::uint32_t c = 0; c < k_; ++c) {
            const double d = squared_distance(row, centroids_.data() + std::size_t(c) * dim_, dim_);
            if (d < best) {
                best = d;
                arg = c;
            }
        }
        out[i] = arg;
    }
    return out;
}

void MiniBatchKMeans::update(const PointsView& points, const std::vector<std::uint32_t>& batch,
                             const std::vector<std::uint32_t>& assignments) {
    std::vector<double> sums(std::size_t(k_) * dim_, 0.0);
    std::vector<std::uint64_t> batch_counts(k_, 0);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const std::uint32_t c = assignments[i];
        const float* row = points.row(batch[i]);
        double* s = sums.data() + std::size_t(c) * dim_;
        for (std::uint32_t d = 0; d < dim_; ++d) s[d] += row[d];
        ++batch_counts[c];
    }

    for (std::uint32_t c = 0; c < k_; ++c) {
        if (batch_counts[c] == 0) continue;
        float* centroid = centroids_.data() + std::size_t(c) * dim_;
        const double prev = static_cast<double>(counts_[c]);
        const double total = prev + static_cast<double>(batch_counts[c]);
        const double* s = sums.data() + std::size_t(c) * dim_;
        double norm_sq = 0.0;
        std::vector<double> blended(dim_);
        for (std::uint32_t d = 0; d < dim_; ++d) {
            blended[d] = (prev * double(centroid[d]) + s[d]) / total;
            norm_sq += blended[d] * blended[d];
        }
        if (norm_sq < 1e-24) continue;  // degenerate mean; keep previous centroid
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (std::uint32_t d = 0; d < dim_; ++d)
            centroid[d] = static_cast<float>(blended[d] * inv);
        counts_[c] += batch_counts[c];
    }

    // Re-seed clusters the batch left empty, farthest-point-first. Points at
    // distance zero are never promoted (a fully converged batch must not
    // disturb untouched clusters).
    bool any_empty = false;
    for (std::uint32_t c = 0; c < k_; ++c)
        if (batch_counts[c] == 0) any_empty = true;
    if (!any_empty) return;

    std::vector<std::pair<double, std::uint32_t>> far;  // (-distance, batch position)
    far.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const double d = squared_distance(
            points.row(batch[i]), centroids_.data() + std::size_t(assignments[i]) * dim_, dim_);
        if (d > 0.0) far.emplace_back(-d, static_cast<std::uint32_t>(i));
    }
    std::sort(far.begin(), far.end());

    std::size_t next = 0;
    for (std::uint32_t c = 0; c < k_ && next < far.size(); ++c) {
        if (batch_counts[c] != 0) continue;
        const float* row = points.row(batch[far[next].second]);
        float* centroid = centroids_.data() + std::size_t(c) * dim_;
        std::copy(row, row + dim_, centroid);
        counts_[c] = 1;
        ++next;
    }
}

std::vector<std::uint32_t> MiniBatchKMeans::step(const PointsView& points,
                                                 const std::vector<std::uint32_t>& batch) {
    if (batch.empty()) throw UsageError("k-means step needs a non-empty batch");
    auto assignments = assign(points, batch);
    update(points, batch, assignments);
    return assignments;
}

std::vector<std::uint32_t> balance(std::vector<std::uint32_t> assignments,
                                   std::uint32_t num_clusters, double limit, Rng& rng) {
    if (num_clusters == 0) throw UsageError("num_clusters must be positive");
    if (limit < 1.0 / double(num_clusters)) {
        throw DataError("balancing limit " + std::to_string(limit) +
                        " is infeasible for " + std::to_string(num_clusters) +
                        " clusters (needs at least 1/num_clusters)");
    }
    const std::size_t n = assignments.size();
    if (n == 0) return assignments;

    std::vector<std::vector<std::uint32_t>> members(num_clusters);
    for (std::size_t i = 0; i < n; ++i)
        members[assignments[i]].push_back(static_cast<std::uint32_t>(i));

    const double cap = limit * static_cast<double>(n);
    const std::size_t max_iters = std::size_t(10) * num_clusters;
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        std::uint32_t big = 0, small = 0;
        for (std::uint32_t c = 1; c < num_clusters; ++c) {
            if (members[c].size() > members[big].size()) big = c;
            if (members[c].size() < members[small].size()) small = c;
        }
        if (static_cast<double>(members[big].size()) <= cap) break;

        // Uniformly random half of the offender moves to the smallest cluster.
        auto& src = members[big];
        const std::size_t half = src.size() / 2;
        if (half == 0) break;  // a single member cannot be split further
        for (std::size_t j = 0; j < half; ++j) {
            const std::size_t r = j + static_cast<std::size_t>(rng.below(src.size() - j));
            std::swap(src[j], src[r]);
        }
        auto& dst = members[small];
        for (std::size_t j = 0; j < half; ++j) {
            assignments[src[j]] = small;
            dst.push_back(src[j]);
        }
        src.erase(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(half));
    }
    return assignments;
}

namespace {

// Uniform sample of `want` distinct pool members (Floyd). Falls back to the
// whole pool when it is not larger than the request.
std::vector<std::uint32_t> draw_batch(const std::vector<std::uint32_t>& pool, std::size_t want,
                                      Rng& rng) {
    if (pool.size() <= want) return pool;
    std::vector<std::uint32_t> out;
    out.reserve(want);
    std::vector<bool> used(pool.size(), false);
    for (std::size_t i = pool.size() - want; i < pool.size(); ++i) {
        std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
        if (used[j]) j = i;
        used[j] = true;
        out.push_back(pool[j]);
    }
    return out;
}

std::uint32_t max_count(const std::vector<std::uint32_t>& assignments, std::uint32_t k) {
    std::vector<std::uint32_t> counts(k, 0);
    for (std::uint32_t a : assignments) ++counts[a];
    return *std::max_element(counts.begin(), counts.end());
}

}  // namespace

TreeTrainResult train_tree(const EmbeddingSet& embeddings, const TreeConfig& cfg) {
    const std::size_t n = embeddings.size();
    if (cfg.arity < 2) throw UsageError("tree arity must be at least 2");
    if (cfg.depth < 1) throw UsageError("tree depth must be at least 1");
    if (cfg.samples_per_step < cfg.arity) {
        throw UsageError("samples_per_step must be at least the arity");
    }
    if (cfg.balancing_limit < 1.0 / double(cfg.arity)) {
        throw DataError("balancing limit below 1/arity is infeasible");
    }
    if (n < cfg.samples_per_step) {
        throw DataError("tree training needs at least samples_per_step=" +
                        std::to_string(cfg.samples_per_step) + " embeddings, got " +
                        std::to_string(n));
    }
    if (n > std::numeric_limits<std::uint32_t>::max()) {
        throw DataError("embedding set too large for in-memory tree training");
    }
    if (!embeddings.normalized()) {
        throw DataError("embeddings must be unit-norm before clustering");
    }

    const PointsView pts = points_of(embeddings);
    TreeTrainResult result;
    result.tree = ClusterTree(cfg.arity, cfg.depth, embeddings.dim(), cfg.seed);
    auto& tree = result.tree;
    auto& stats = result.stats;

    // pools_by_level[l][node]: embedding indices routed to that node.
    std::vector<std::vector<std::vector<std::uint32_t>>> pools_by_level(1);
    pools_by_level[0].resize(1);
    auto& root = pools_by_level[0][0];
    root.resize(n);
    std::iota(root.begin(), root.end(), 0u);

    for (std::uint32_t level = 1; level <= cfg.depth; ++level) {
        const std::uint64_t parents = ClusterTree::level_size(cfg.arity, level - 1);
        for (std::uint64_t node = 0; node < parents; ++node) {
            // Starved nodes train on an ancestor's data instead.
            const std::vector<std::uint32_t>* train_pool = &pools_by_level[level - 1][node];
            if (train_pool->size() < cfg.arity) {
                std::uint32_t l = level - 1;
                std::uint64_t up = node;
                while (l > 0 && train_pool->size() < cfg.arity) {
                    up /= cfg.arity;
                    --l;
                    train_pool = &pools_by_level[l][up];
                }
                stats.warnings.push_back(
                    "level " + std::to_string(level - 1) + " node " + std::to_string(node) +
                    ": " + std::to_string(pools_by_level[level - 1][node].size()) +
                    " routed samples (< arity); split trained on ancestor data");
            }

            Rng rng(derive_seed(cfg.seed, {level, node}));
            auto batch = draw_batch(*train_pool, cfg.samples_per_step, rng);
            MiniBatchKMeans km(kmeanspp_init(pts, batch, cfg.arity, rng), cfg.arity,
                               embeddings.dim());
            for (std::uint32_t step = 1; step <= cfg.steps; ++step) {
                if (step > 1) batch = draw_batch(*train_pool, cfg.samples_per_step, rng);
                auto assignments = km.assign(pts, batch);
                assignments = balance(assignments, cfg.arity, cfg.balancing_limit, rng);
                stats.steps.push_back({level, node, step,
                                       static_cast<std::uint32_t>(batch.size()),
                                       max_count(assignments, cfg.arity)});
                km.update(pts, batch, assignments);
            }
            std::copy(km.centroids().begin(), km.centroids().end(),
                      tree.mutable_centroid(level, node * cfg.arity));
        }

        if (level < cfg.depth) {
            std::vector<std::vector<std::uint32_t>> child_pools(
                ClusterTree::level_size(cfg.arity, level));
            for (std::uint64_t node = 0; node < parents; ++node) {
                for (std::uint32_t idx : pools_by_level[level - 1][node]) {
                    const float* row = pts.row(idx);
                    const std::uint64_t base = node * cfg.arity;
                    double best = std::numeric_limits<double>::infinity();
                    std::uint32_t arg = 0;
                    for (std::uint32_t j = 0; j < cfg.arity; ++j) {
                        const double d =
                            squared_distance(row, tree.centroid(level, base + j), pts.dim);
                        if (d < best) {
                            best = d;
                            arg = j;
                        }
                    }
                    child_pools[base + arg].push_back(idx);
                }
            }
            pools_by_level.push_back(std::move(child_pools));
        }
    }
    return result;
}

ClusterId assign(const ClusterTree& tree, const float* embedding, std::uint32_t level) {
    if (level > tree.depth()) {
        throw UsageError("assignment level " + std::to_string(level) + " exceeds tree depth " +
                         std::to_string(tree.depth()));
    }
    std::uint64_t path = 0;
    for (std::uint32_t l = 1; l <= level; ++l) {
        const std::uint64_t base = path * tree.arity();
        double best = std::numeric_limits<double>::infinity();
        std::uint32_t arg = 0;
        for (std::uint32_t j = 0; j < tree.arity(); ++j) {
            const double d = squared_distance(embedding, tree.centroid(l, base + j), tree.dim());
            if (d < best) {
                best = d;
                arg = j;
            }
        }
        path = base + arg;
    }
    return {level, path};
}

AssignmentTable assign_all(const ClusterTree& tree, const EmbeddingSet& set,
                           std::uint32_t level) {
    if (set.size() == 0) {
        throw DataError("cannot assign an empty embedding set (no histogram can be estimated)");
    }
    if (set.dim() != tree.dim()) {
        throw DataError("embedding dim " + std::to_string(set.dim()) +
                        " does not match tree dim " + std::to_string(tree.dim()));
    }
    if (!set.normalized()) {
        throw DataError("embeddings must be unit-norm before assignment");
    }
    AssignmentTable table;
    table.level = level;
    table.entries.reserve(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        const ClusterId id = assign(tree, set.vec(i), level);
        table.entries.emplace_back(set.ids()[i], id.path);
    }
    std::sort(table.entries.begin(), table.entries.end());
    for (const auto& [id, path] : table.entries) ++table.counts[path];
    return table;
}

void write_tree(const ClusterTree& tree, const std::string& path) {
    BinaryWriter out(path);
    out.magic("TREE");
    out.u32(tree.arity());
    out.u32(tree.depth());
    out.u32(tree.dim());
    out.u64(tree.seed());
    for (std::uint32_t l = 1; l <= tree.depth(); ++l) {
        const auto& data = tree.level_data(l);
        out.f32_array(data.data(), data.size());
    }
    out.close();
}

ClusterTree read_tree(const std::string& path) {
    BinaryReader in(path);
    in.expect_magic("TREE");
    const std::uint32_t arity = in.u32();
    const std::uint32_t depth = in.u32();
    const std::uint32_t dim = in.u32();
    const std::uint64_t seed = in.u64();
    ClusterTree tree(arity, depth, dim, seed);
    for (std::uint32_t l = 1; l <= depth; ++l) {
        in.f32_array(tree.mutable_centroid(l, 0), ClusterTree::level_size(arity, l) * dim);
    }
    if (!in.at_eof()) {
        throw DataError(path + ": trailing bytes at offset " + std::to_string(in.offset()));
    }
    return tree;
}

void write_assignments(const AssignmentTable& table, const std::string& path) {
    BinaryWriter out(path);
    out.magic("ASG1");
    out.u32(table.level);
    out.u64(table.entries.size());
    for (const auto& [id, cluster_path] : table.entries) {
        out.u64(id);
        out.u64(cluster_path);
    }
    out.close();
}

AssignmentTable read_assignments(const std::string& path) {
    BinaryReader in(path);
    in.expect_magic("ASG1");
    AssignmentTable table;
    table.level = in.u32();
    const std::uint64_t count = in.u64();
    table.entries.reserve(std::min<std::uint64_t>(count, 1u << 24));
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint64_t id = in.u64();
        const std::uint64_t cluster_path = in.u64();
        table.entries.emplace_back(id, cluster_path);
        ++table.counts[cluster_path];
    }
    if (!in.at_eof()) {
        throw DataError(path + ": trailing bytes at offset " + std::to_string(in.offset()));
    }
    return table;
}

}  // namespace crisp
