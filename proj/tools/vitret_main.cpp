// Command-line front end: dataset generation and ingestion, training with
// checkpoints, throughput probes, and the JSON-driven benchmark runner.
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "vitret/bench.hpp"
#include "vitret/checkpoint.hpp"
#include "vitret/data.hpp"
#include "vitret/lstm.hpp"
#include "vitret/ops.hpp"
#include "vitret/transformer.hpp"
#include "vitret/vit.hpp"

namespace {

using namespace vitret;

struct TrainFlags {
  std::string model = "ret";
  std::string data;
  std::string out;
  std::string history;
  std::uint64_t seed = 1;
  double valid_fraction = 0.2;
  ModelConfig config;
};

void add_config_flags(CLI::App* cmd, ModelConfig& config) {
  cmd->add_option("--epochs", config.epochs, "training epochs");
  cmd->add_option("--batch", config.batch_size, "batch size");
  cmd->add_option("--lr", config.learning_rate, "Adam learning rate");
  cmd->add_option("--embedding", config.projection_dim, "embedding width");
  cmd->add_option("--dense", config.dense_dim, "feed-forward hidden width");
  cmd->add_option("--heads", config.num_heads, "attention heads");
  cmd->add_option("--layers", config.transformer_layers, "encoder blocks");
  cmd->add_option("--lstm-layers", config.lstm_layers, "recurrent layers");
  cmd->add_option("--units", config.lstm_units, "recurrent units per layer");
  cmd->add_option("--patch", config.patch_size, "patch side length");
}

void write_history(const std::string& path, const TrainHistory& history) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ValueError("cannot write " + path);
  os << "epoch,train_loss,train_accuracy,valid_loss,valid_accuracy\n";
  for (std::size_t i = 0; i < history.size(); ++i) {
    const EpochStats& e = history[i];
    os << (i + 1) << ',' << e.train_loss << ',' << e.train_accuracy << ','
       << e.valid_loss << ',' << e.valid_accuracy << "\n";
  }
}

int cmd_train(const TrainFlags& flags) {
  DatasetContainer full = load_dataset(flags.data);
  ModelConfig config = flags.config;
  config.sequence_length = full.sequence_length();
  config.image_height = full.height();
  config.image_width = full.width();
  config.channels = full.channels();
  config.num_classes = full.num_classes();

  auto [train, valid] = split_dataset(full, 1.0 - flags.valid_fraction, flags.seed);
  std::cout << "training " << flags.model << " on " << train.size() << " sequences ("
            << valid.size() << " held out)\n";

  TrainHistory history;
  if (flags.model == "ret") {
    auto [model, h] = ret_train(train, valid, config, flags.seed);
    history = std::move(h);
    if (!flags.out.empty()) save_checkpoint(flags.out, model);
  } else if (flags.model == "lstm") {
    auto [model, h] = lstm_train(train, valid, config, flags.seed);
    history = std::move(h);
    if (!flags.out.empty()) save_checkpoint(flags.out, model);
  } else if (flags.model == "vit") {
    auto [model, h] = vit_train(train, valid, config, flags.seed);
    history = std::move(h);
    if (!flags.out.empty()) save_checkpoint(flags.out, model);
  } else if (flags.model == "vit_ret") {
    auto [model, h] = vit_ret_train(train, valid, config, flags.seed);
    history = std::move(h);
    if (!flags.out.empty()) save_checkpoint(flags.out, model);
  } else {
    throw ValueError("unknown model family \"" + flags.model + "\"");
  }

  const EpochStats& last = history.back();
  std::cout << "final: train loss " << last.train_loss << ", train accuracy "
            << last.train_accuracy << ", valid loss " << last.valid_loss
            << ", valid accuracy " << last.valid_accuracy << "\n";
  if (!flags.history.empty()) write_history(flags.history, history);
  if (!flags.out.empty()) std::cout << "checkpoint written to " << flags.out << "\n";
  return 0;
}

std::function<Tensor(const Tensor&)> forward_for_checkpoint(const std::string& path,
                                                            std::size_t frame_values) {
  const std::string family = checkpoint_family(path);
  if (family == "ret") {
    auto model = std::make_shared<ReTModel>(load_ret_checkpoint(path));
    if (model->input_dim != frame_values) {
      throw ValueError("checkpoint expects " + std::to_string(model->input_dim) +
                       " values per frame, dataset has " + std::to_string(frame_values));
    }
    return [model](const Tensor& frames) {
      return ret_forward(reshape(frames, {frames.dim(0), model->input_dim}), *model);
    };
  }
  if (family == "lstm") {
    auto model = std::make_shared<LstmModel>(load_lstm_checkpoint(path));
    if (model->input_dim != frame_values) {
      throw ValueError("checkpoint expects " + std::to_string(model->input_dim) +
                       " values per frame, dataset has " + std::to_string(frame_values));
    }
    return [model](const Tensor& frames) {
      return lstm_forward(reshape(frames, {frames.dim(0), model->input_dim}), *model);
    };
  }
  if (family == "vit") {
    auto model = std::make_shared<ViTModel>(load_vit_checkpoint(path));
    return [model](const Tensor& frames) {
      std::vector<Tensor> probs;
      const std::size_t fsz = frames.dim(1) * frames.dim(2) * frames.dim(3);
      for (std::size_t t = 0; t < frames.dim(0); ++t) {
        Tensor frame({frames.dim(1), frames.dim(2), frames.dim(3)});
        const double* src = frames.data().data() + t * fsz;
        std::copy(src, src + fsz, frame.data().data());
        probs.push_back(vit_forward(frame, *model));
      }
      return mean_rows(stack_rows(probs));
    };
  }
  if (family == "vit_ret") {
    auto model = std::make_shared<ViTReTModel>(load_vit_ret_checkpoint(path));
    return [model](const Tensor& frames) {
      return vit_ret_forward(frames, model->vit, model->ret);
    };
  }
  throw ValueError("unknown checkpoint family \"" + family + "\"");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"activity-recognition kit: synthetic data, training, benchmarks"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "write a synthetic motion dataset");
  std::size_t gen_classes = 4, gen_samples = 10, gen_frames = 20, gen_h = 32,
              gen_w = 32;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  gen->add_option("--classes", gen_classes, "number of motion classes (2-8)");
  gen->add_option("--samples", gen_samples, "samples per class");
  gen->add_option("--frames", gen_frames, "frames per sample");
  gen->add_option("--height", gen_h, "frame height");
  gen->add_option("--width", gen_w, "frame width");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "output container file")->required();

  // ingest
  auto* ing = app.add_subcommand("ingest", "pack an image directory tree");
  std::string ing_dir, ing_out;
  ModelConfig ing_config;
  ing->add_option("--dir", ing_dir, "root: class/sample/frame images")->required();
  ing->add_option("--out", ing_out, "output container file")->required();
  ing->add_option("--frames", ing_config.sequence_length, "frames kept per sample");
  ing->add_option("--height", ing_config.image_height, "target frame height");
  ing->add_option("--width", ing_config.image_width, "target frame width");
  ing->add_option("--channels", ing_config.channels, "1 (grayscale) or 3 (RGB)");

  // train
  auto* tr = app.add_subcommand("train", "train one model family");
  TrainFlags train_flags;
  tr->add_option("--model", train_flags.model, "ret | lstm | vit | vit_ret");
  tr->add_option("--data", train_flags.data, "dataset container")->required();
  tr->add_option("--out", train_flags.out, "checkpoint output path");
  tr->add_option("--history", train_flags.history, "epoch-stats CSV output path");
  tr->add_option("--seed", train_flags.seed, "training seed");
  tr->add_option("--valid-fraction", train_flags.valid_fraction,
                 "held-out fraction (default 0.2)");
  add_config_flags(tr, train_flags.config);

  // bench
  auto* be = app.add_subcommand("bench", "run a tests.json sweep matrix");
  std::string bench_config;
  be->add_option("--config", bench_config, "tests.json path")->required();

  // throughput
  auto* th = app.add_subcommand("throughput", "forward-only timing sweep");
  std::string th_model, th_data;
  std::size_t th_reps = 3;
  th->add_option("--model", th_model, "checkpoint path")->required();
  th->add_option("--data", th_data, "dataset container")->required();
  th->add_option("--reps", th_reps, "repetitions per file count (median)");

  // report
  auto* rep = app.add_subcommand("report", "render tables from a records CSV");
  std::string rep_csv;
  rep->add_option("--csv", rep_csv, "records.csv path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      DatasetContainer ds =
          synthetic_dataset(gen_classes, gen_samples, gen_frames, gen_h, gen_w, gen_seed);
      save_dataset(ds, gen_out);
      std::cout << "wrote " << ds.size() << " sequences (" << ds.num_classes()
                << " classes, " << ds.sequence_length() << "x" << ds.height() << "x"
                << ds.width() << ") to " << gen_out << "\n";
    } else if (ing->parsed()) {
      DatasetContainer ds = ingest_image_directory(ing_dir, ing_config);
      save_dataset(ds, ing_out);
      std::cout << "ingested " << ds.size() << " sequences (" << ds.num_classes()
                << " classes) to " << ing_out << "\n";
    } else if (tr->parsed()) {
      return cmd_train(train_flags);
    } else if (be->parsed()) {
      TestConfig config = load_test_config(bench_config);
      std::vector<BenchRecord> records = run_tests(config);
      emit_reports(records, config.output_dir);
      std::cout << summary_tables(records);
      std::cout << "reports written to " << config.output_dir << "\n";
      for (const BenchRecord& r : records) {
        if (!r.ok) {
          std::cerr << "run failed: " << r.model << " " << r.attribute << "="
                    << r.value << " on " << r.dataset << ": " << r.error << "\n";
          return 1;
        }
      }
    } else if (th->parsed()) {
      DatasetContainer ds = load_dataset(th_data);
      auto forward =
          forward_for_checkpoint(th_model, ds.height() * ds.width() * ds.channels());
      std::vector<BenchRecord> sweep = throughput_sweep(forward, ds, th_reps);
      std::cout << "files   seconds      frames/s\n";
      for (const BenchRecord& r : sweep) {
        std::ostringstream line;
        line << r.files;
        std::cout << line.str() << std::string(8 - std::min<std::size_t>(7, line.str().size()), ' ')
                  << std::fixed << std::setprecision(5) << r.seconds << "      "
                  << std::setprecision(1) << r.fps << "\n";
      }
    } else if (rep->parsed()) {
      std::ifstream is(rep_csv, std::ios::binary);
      if (!is) throw ValueError("cannot open " + rep_csv);
      std::stringstream buffer;
      buffer << is.rdbuf();
      std::cout << summary_tables(parse_csv(buffer.str()));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
