#pragma once

#include <cstdint>

#include "qivr/index.hpp"
#include "qivr/search.hpp"

namespace qivr {

/// Stage 0: normalize vectors into the cold store, encode all signatures,
/// pre-allocate the adjacency table (all degrees zero), pick the entry
/// point. Fully parallel per vector; no edges exist afterwards.
Index stage0_preinstall(const float* data, size_t count, uint32_t dim,
                        const BuildParams& params);

/// Approximate medoid: the vector with maximal dot product against the
/// normalized dataset centroid, smallest id on ties.
uint32_t select_entry_point(const ColdStore& cold);

/// Stage 1 step for one node: beam search (width ef_c) from the entry point
/// against the node's own signature over the current partial graph, prune
/// the visited pool, insert bidirectionally.
void link_node(uint32_t node, Index& index, const BuildParams& params,
               SearchContext& ctx, BuildAudit* audit = nullptr);

/// Two-stage batch concurrent construction over all vectors. Insertion
/// order is a seeded shuffle of the node ids; with threads=1 the build is
/// fully deterministic for a fixed seed.
Index build_index(const float* data, size_t count, uint32_t dim,
                  const BuildParams& params, BuildAudit* audit = nullptr);

}  // namespace qivr
