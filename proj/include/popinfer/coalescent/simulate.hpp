#pragma once

#include <stdexcept>

#include "popinfer/common/rng.hpp"
#include "popinfer/coalescent/pop_size.hpp"
#include "popinfer/coalescent/snp_matrix.hpp"
#include "popinfer/coalescent/tree_sequence.hpp"
#include "popinfer/hotspot/recomb_map.hpp"

namespace popinfer::coalescent {

// Coalescent with recombination (Hudson's algorithm over ancestral segments).
// Interval boundaries are exactly the recombination breakpoints that fell
// inside ancestral material, so adjacent trees may share a topology.
MarginalTreeSequence simulate_trees(int n, double length, const hotspot::RecombMap& map,
                                    const PopSizeHistory& eta, Rng& rng);

// Infinite-sites mutations at rate theta_per_bp / 2 per bp per unit branch
// length. Columns come out sorted by position.
SnpMatrix drop_mutations(const MarginalTreeSequence& trees, double theta_per_bp, Rng& rng);

// Flips every column carrying more than rows/2 ones.
void recode_minor_allele(SnpMatrix& m);

struct OddSampleCount : std::invalid_argument {
  OddSampleCount() : std::invalid_argument("pair_to_diploid needs an even number of rows") {}
};

// Random pairing of haplotypes into n/2 genotype rows over {0,1,2}.
SnpMatrix pair_to_diploid(const SnpMatrix& m, Rng& rng);

}  // namespace popinfer::coalescent
