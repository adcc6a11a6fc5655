#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vitret/config.hpp"
#include "vitret/data.hpp"
#include "vitret/tensor.hpp"

namespace vitret {

/// Synthetic-dataset parameters for a benchmark block.
struct SyntheticSpec {
  std::size_t classes = 4;
  std::size_t samples_per_class = 10;
  std::size_t frames = 20;
  std::size_t height = 32;
  std::size_t width = 32;
};

/// One dataset block: either generated on the fly or loaded from a container
/// file. Sweeps restart from the config defaults at each block boundary.
struct DatasetSpec {
  std::string label;
  std::optional<SyntheticSpec> synthetic;
  std::string path;  // set when not synthetic
};

/// One sweep: a model family, the attribute to vary, and its values.
struct TestGroup {
  std::string model;      // "lstm" | "ret" | "vit" | "vit_ret"
  std::string attribute;  // e.g. "units", "embedding", "heads"
  std::vector<double> values;
};

/// Parsed tests.json: defaults, dataset blocks, seed, output directory, and
/// the sweep list.
struct TestConfig {
  ModelConfig defaults;
  std::vector<DatasetSpec> datasets;
  std::uint64_t seed = 1;
  std::string output_dir = ".";
  std::vector<TestGroup> tests;
};

TestConfig parse_test_config(const std::string& json_text);
TestConfig load_test_config(const std::string& path);

/// Applies one swept attribute value to a config. Throws ValueError when the
/// attribute is not recognized for the family.
void apply_attribute(ModelConfig& config, const std::string& family,
                     const std::string& attribute, double value);

/// One measured phase of one run.
struct BenchRecord {
  std::string model;
  std::string dataset;
  std::string attribute;
  double value = 0.0;
  std::string phase;  // "create" | "train" | "throughput"
  ModelConfig config;
  double seconds = 0.0;
  std::optional<double> memory_mb;
  double final_loss = 0.0;
  double final_accuracy = 0.0;
  std::size_t files = 0;
  double fps = 0.0;
  bool ok = true;
  std::string error;
};

struct Measurement {
  double seconds = 0.0;
  std::optional<double> memory_mb;  // peak-resident delta; absent off-Linux
};

/// Times an action with a monotonic clock and reads the peak-resident-memory
/// delta around it from /proc/self/status. Nesting is fine; each call keeps
/// its own counters.
Measurement measure(const std::function<void()>& action);

/// Current peak resident memory in MB, when the platform exposes it.
std::optional<double> peak_memory_mb();

/// Runs every sweep of a validated TestConfig: trains on a seeded 80/20
/// split, records create/train/throughput phases per run, carries the
/// loss-minimizing value forward within a dataset block, and isolates
/// per-run failures as failed records.
std::vector<BenchRecord> run_tests(const TestConfig& config);

/// Forward-only timing of `forward` over file counts {1, 100, 1000, ...}
/// capped by the dataset size; per count the duration is the median of
/// `repetitions` passes after one untimed warm-up. fps counts frames, i.e.
/// files x sequence_length / seconds.
std::vector<BenchRecord> throughput_sweep(
    const std::function<Tensor(const Tensor&)>& forward,
    const DatasetContainer& dataset, std::size_t repetitions);

/// The largest-count record of throughput_sweep.
BenchRecord throughput_bench(const std::function<Tensor(const Tensor&)>& forward,
                             const DatasetContainer& dataset,
                             std::size_t repetitions);

/// Full-precision CSV with a stable column order; parse_csv inverts it
/// exactly.
std::string records_to_csv(const std::vector<BenchRecord>& records);
std::vector<BenchRecord> parse_csv(const std::string& csv);

/// Per-dataset comparison tables: loss/accuracy, training time, throughput,
/// and memory.
std::string summary_tables(const std::vector<BenchRecord>& records);

/// Writes records.csv and summary.txt under out_dir. Byte-idempotent for the
/// same records.
void emit_reports(const std::vector<BenchRecord>& records, const std::string& out_dir);

}  // namespace vitret
