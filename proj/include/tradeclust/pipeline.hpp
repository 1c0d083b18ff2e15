#pragma once

#include <cstdint>
#include <string>

#include "tradeclust/community.hpp"
#include "tradeclust/io.hpp"

namespace tradeclust {

// Every knob of a full run; serialized verbatim into the run manifest.
struct RunConfig {
    double theta = 0.25;
    int min_transactions = 5;
    double alpha = 0.01;
    Correction correction = Correction::Bonferroni;
    LinkageMethod linkage_method = LinkageMethod::Average;
    double coarse_step = 0.1;
    double fine_step = 0.01;
    std::uint64_t infomap_seed = 1;
    int infomap_trials = 10;
    BonferroniDenominator bonferroni_denominator =
        BonferroniDenominator::UnorderedPairs;
    int n_threads = 0;  // 0 = hardware concurrency

    std::string input_path;
    std::string output_dir;

    int effective_threads() const;
    void validate() const;
};

// Full run over every stock in the input file: state encoding, trading
// profiles and their dissimilarity matrix, linkage tree, validated network,
// community detection, threshold sweep against the network partition, and
// the combined partition (the tree cut at the sweep-optimal threshold over
// all filtered investors). Emits per-stock outputs plus manifest.json; a
// failing stage removes that stock's partial outputs and aborts with the
// stage named. Returns the manifest path.
std::string run_pipeline(const RunConfig& config);

}  // namespace tradeclust
