#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "dlsa/combiner.hpp"
#include "dlsa/envelope.hpp"
#include "dlsa/partition.hpp"
#include "dlsa/shrinkage.hpp"
#include "dlsa/simulation.hpp"

namespace dlsa {

struct FileSource {
  std::filesystem::path input;
  std::filesystem::path schema;
  io::PartitionPlan plan;
};

struct SimulateSource {
  sim::ScenarioSpec spec;
  std::uint64_t replication = 0;
};

struct RunConfig {
  std::variant<FileSource, SimulateSource> source;
  /// File mode only; simulate mode takes the family of its example.
  std::string family;
  std::uint64_t k = 5;
  bool shrink = true;
  /// Also compute the one-step CSL estimator (a second round of K messages).
  bool csl = false;
  std::filesystem::path out_dir;
  /// Worker threads; 0 means hardware concurrency.
  unsigned threads = 0;
  std::uint64_t seed = 12345;

  /// Throws ConfigError on K = 0, an empty output path or a missing family.
  void validate() const;
};

/// Traffic that crossed the worker/master boundary.
struct CommunicationLedger {
  std::uint64_t summary_messages = 0;
  std::uint64_t summary_bytes = 0;
  std::uint64_t gradient_messages = 0;
  std::uint64_t gradient_bytes = 0;

  std::uint64_t messages() const { return summary_messages + gradient_messages; }
  std::uint64_t bytes() const { return summary_bytes + gradient_bytes; }
};

/// Size of one CSL gradient message: u64 partition id, u64 n_k, q f64.
constexpr std::size_t gradient_message_size(std::size_t q) noexcept { return 16 + 8 * q; }

struct PipelineResult {
  ModelFamily family = ModelFamily::linear();
  std::vector<std::string> parameter_names;
  /// Decoded summaries in partition order, with their wire form.
  std::vector<LocalSummary> summaries;
  std::vector<wire::Bytes> envelopes;
  CombinedFit fit;
  ParamVector os;
  std::optional<ParamVector> csl;
  std::optional<LassoPath> path;
  std::optional<SelectionResult> selection;
  CommunicationLedger ledger;
  std::vector<std::string> notes;
};

struct PipelineOptions {
  bool shrink = true;
  bool csl = false;
  unsigned threads = 0;
};

/// Fits every partition on a bounded worker pool; each worker sends exactly
/// one encoded envelope to the master, which decodes them in partition order
/// and combines. Any failed partition aborts with PartitionFitError naming
/// the lowest failing partition id (input errors are rethrown unchanged).
PipelineResult run_partitions(std::span<const DataPartition> partitions, const ModelFamily& family,
                              const PipelineOptions& options);

/// Master-only combination of pre-computed summaries.
PipelineResult combine_summaries(std::vector<LocalSummary> summaries, bool shrink);

/// Reads every "*.dlsa" file of a directory, ordered by partition id.
std::vector<LocalSummary> read_summaries(const std::filesystem::path& dir);

/// Writes combined.json, path.json, selection.json, summary.txt and, when
/// envelopes are present, summaries/partition_<id>.dlsa under `out_dir`.
void write_outputs(const PipelineResult& result, const std::filesystem::path& out_dir);

std::string summary_text(const PipelineResult& result);

/// Ingests or simulates, runs the pipeline and writes outputs. Nothing is
/// written unless every stage succeeds.
PipelineResult run_pipeline(const RunConfig& config);

}  // namespace dlsa
