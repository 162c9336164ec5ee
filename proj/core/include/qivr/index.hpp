#pragma once

#include <cstdint>

#include "qivr/cold_store.hpp"
#include "qivr/encoding.hpp"
#include "qivr/graph.hpp"

namespace qivr {

/// A built (or loading) index: graph topology plus the hot signature store
/// and the cold float32 store. Queries navigate signatures + adjacency and
/// touch the cold store only at rerank.
struct Index {
    BuildParams params;
    uint32_t dim = 0;
    uint32_t entry_point = 0;
    AdjacencyTable adjacency;
    SignatureStore signatures;
    ColdStore cold;

    size_t size() const { return signatures.count(); }
};

}  // namespace qivr
