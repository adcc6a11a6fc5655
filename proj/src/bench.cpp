#include "vitret/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include "json.hpp"
#include "vitret/lstm.hpp"
#include "vitret/ops.hpp"
#include "vitret/training.hpp"
#include "vitret/transformer.hpp"
#include "vitret/vit.hpp"

namespace vitret {

namespace {

using nlohmann::json;

const char* kFamilies[] = {"lstm", "ret", "vit", "vit_ret"};

bool known_family(const std::string& f) {
  for (const char* k : kFamilies) {
    if (f == k) return true;
  }
  return false;
}

std::size_t to_count(const std::string& attribute, double v) {
  if (v < 1.0 || v != std::floor(v)) {
    std::ostringstream msg;
    msg << "attribute \"" << attribute << "\" needs a positive integer, got " << v;
    throw ValueError(msg.str());
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

void apply_attribute(ModelConfig& config, const std::string& family,
                     const std::string& attribute, double value) {
  if (!known_family(family)) {
    throw ValueError("unknown model family \"" + family + "\"");
  }
  const bool recurrent = family == "lstm";
  const bool attentive = family == "ret" || family == "vit" || family == "vit_ret";

  if (attribute == "learning_rate") {
    if (value < 0.0) throw ValueError("learning_rate must be nonnegative");
    config.learning_rate = value;
  } else if (attribute == "epochs") {
    config.epochs = to_count(attribute, value);
  } else if (attribute == "batch_size") {
    config.batch_size = to_count(attribute, value);
  } else if (recurrent && attribute == "layers") {
    config.lstm_layers = to_count(attribute, value);
  } else if (recurrent && attribute == "units") {
    config.lstm_units = to_count(attribute, value);
  } else if (attentive && attribute == "layers") {
    config.transformer_layers = to_count(attribute, value);
  } else if (attentive && attribute == "embedding") {
    config.projection_dim = to_count(attribute, value);
  } else if (attentive && attribute == "dense") {
    config.dense_dim = to_count(attribute, value);
  } else if (attentive && attribute == "heads") {
    config.num_heads = to_count(attribute, value);
  } else if ((family == "vit" || family == "vit_ret") && attribute == "patch") {
    config.patch_size = to_count(attribute, value);
  } else {
    throw ValueError("attribute \"" + attribute + "\" is not recognized for family \"" +
                     family + "\"");
  }
}

// ---------------------------------------------------------------------------
// configuration parsing

namespace {

void parse_defaults(const json& j, ModelConfig& config) {
  for (const auto& [key, val] : j.items()) {
    if (key == "sequence_length") config.sequence_length = val.get<std::size_t>();
    else if (key == "image_height") config.image_height = val.get<std::size_t>();
    else if (key == "image_width") config.image_width = val.get<std::size_t>();
    else if (key == "channels") config.channels = val.get<std::size_t>();
    else if (key == "projection_dim") config.projection_dim = val.get<std::size_t>();
    else if (key == "dense_dim") config.dense_dim = val.get<std::size_t>();
    else if (key == "activation") config.activation = activation_from_name(val.get<std::string>());
    else if (key == "num_heads") config.num_heads = val.get<std::size_t>();
    else if (key == "patch_size") config.patch_size = val.get<std::size_t>();
    else if (key == "lstm_layers") config.lstm_layers = val.get<std::size_t>();
    else if (key == "lstm_units") config.lstm_units = val.get<std::size_t>();
    else if (key == "transformer_layers") config.transformer_layers = val.get<std::size_t>();
    else if (key == "num_classes") config.num_classes = val.get<std::size_t>();
    else if (key == "batch_size") config.batch_size = val.get<std::size_t>();
    else if (key == "epochs") config.epochs = val.get<std::size_t>();
    else if (key == "learning_rate") config.learning_rate = val.get<double>();
    else throw ValueError("defaults: unknown hyperparameter \"" + key + "\"");
  }
}

DatasetSpec parse_dataset(const json& j) {
  if (!j.is_object()) throw ValueError("dataset: expected an object");
  DatasetSpec spec;
  const std::string type = j.value("type", "synthetic");
  if (type == "synthetic") {
    SyntheticSpec s;
    s.classes = j.value("classes", s.classes);
    s.samples_per_class = j.value("samples_per_class", s.samples_per_class);
    s.frames = j.value("frames", s.frames);
    s.height = j.value("height", s.height);
    s.width = j.value("width", s.width);
    spec.synthetic = s;
    std::ostringstream label;
    label << "synthetic-" << s.classes << "c" << s.samples_per_class << "s" << s.frames
          << "f";
    spec.label = j.value("label", label.str());
  } else if (type == "file") {
    if (!j.contains("path")) throw ValueError("dataset: file blocks need a path");
    spec.path = j.at("path").get<std::string>();
    spec.label = j.value("label", spec.path);
  } else {
    throw ValueError("dataset: unknown type \"" + type + "\"");
  }
  return spec;
}

}  // namespace

TestConfig parse_test_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValueError(std::string("tests.json: ") + e.what());
  }
  if (!j.is_object()) throw ValueError("tests.json: expected a top-level object");

  TestConfig config;
  try {
    if (j.contains("defaults")) parse_defaults(j.at("defaults"), config.defaults);
    if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("output_dir")) config.output_dir = j.at("output_dir").get<std::string>();

    if (!j.contains("dataset")) throw ValueError("tests.json: missing dataset");
    const json& ds = j.at("dataset");
    if (ds.is_array()) {
      for (const json& block : ds) config.datasets.push_back(parse_dataset(block));
    } else {
      config.datasets.push_back(parse_dataset(ds));
    }
    if (config.datasets.empty()) throw ValueError("tests.json: empty dataset list");

    for (const json& t : j.value("tests", json::array())) {
      TestGroup group;
      group.model = t.at("model").get<std::string>();
      group.attribute = t.at("attribute").get<std::string>();
      for (const json& v : t.at("values")) group.values.push_back(v.get<double>());
      config.tests.push_back(std::move(group));
    }
  } catch (const json::exception& e) {
    throw ValueError(std::string("tests.json: ") + e.what());
  }

  // surface bad groups now, before any run starts
  for (const TestGroup& group : config.tests) {
    if (!known_family(group.model)) {
      throw ValueError("tests.json: unknown model family \"" + group.model + "\"");
    }
    if (group.values.empty()) {
      throw ValueError("tests.json: empty value list for " + group.model + "/" +
                       group.attribute);
    }
    for (double v : group.values) {
      ModelConfig probe = config.defaults;
      apply_attribute(probe, group.model, group.attribute, v);
    }
  }
  return config;
}

TestConfig load_test_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValueError("cannot open test config " + path);
  std::stringstream buffer;
  buffer << is.rdbuf();
  return parse_test_config(buffer.str());
}

// ---------------------------------------------------------------------------
// instrumentation

std::optional<double> peak_memory_mb() {
  std::ifstream status("/proc/self/status");
  std::string line;
  while (std::getline(status, line)) {
    if (line.rfind("VmHWM:", 0) == 0) {
      std::istringstream fields(line.substr(6));
      double kb = 0.0;
      if (fields >> kb) return kb / 1024.0;
      return std::nullopt;
    }
  }
  return std::nullopt;
}

Measurement measure(const std::function<void()>& action) {
  Measurement m;
  const std::optional<double> before = peak_memory_mb();
  const auto start = std::chrono::steady_clock::now();
  action();
  m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                  .count();
  const std::optional<double> after = peak_memory_mb();
  if (before && after) m.memory_mb = *after - *before;
  return m;
}

// ---------------------------------------------------------------------------
// throughput

std::vector<BenchRecord> throughput_sweep(
    const std::function<Tensor(const Tensor&)>& forward,
    const DatasetContainer& dataset, std::size_t repetitions) {
  if (repetitions == 0) throw ValueError("throughput: repetitions must be positive");
  std::vector<std::size_t> counts{1};
  for (std::size_t c = 100; c < dataset.size(); c *= 10) counts.push_back(c);
  if (dataset.size() > counts.back()) counts.push_back(dataset.size());

  // one untimed pass warms caches and allocator pools
  {
    Tensor probs = forward(dataset.sample(0).frames);
    (void)probs;
  }

  std::vector<BenchRecord> records;
  for (std::size_t count : counts) {
    std::vector<double> durations;
    durations.reserve(repetitions);
    for (std::size_t rep = 0; rep < repetitions; ++rep) {
      const auto start = std::chrono::steady_clock::now();
      for (std::size_t i = 0; i < count; ++i) {
        Tensor probs = forward(dataset.sample(i).frames);
        (void)probs;
      }
      durations.push_back(
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
              .count());
    }
    std::sort(durations.begin(), durations.end());
    const std::size_t mid = durations.size() / 2;
    const double median = durations.size() % 2 == 1
                              ? durations[mid]
                              : 0.5 * (durations[mid - 1] + durations[mid]);
    BenchRecord rec;
    rec.phase = "throughput";
    rec.files = count;
    rec.seconds = median;
    const double frames = double(count) * double(dataset.sequence_length());
    rec.fps = median > 0.0 ? frames / median : 0.0;
    records.push_back(std::move(rec));
  }
  return records;
}

BenchRecord throughput_bench(const std::function<Tensor(const Tensor&)>& forward,
                             const DatasetContainer& dataset,
                             std::size_t repetitions) {
  return throughput_sweep(forward, dataset, repetitions).back();
}

// ---------------------------------------------------------------------------
// the sweep runner

namespace {

// Creation, training, and a tape-free forward for one family, sharing one
// model instance across the phases.
struct FamilyHarness {
  std::function<void()> create;
  std::function<TrainHistory()> train;
  std::function<Tensor(const Tensor&)> forward;
};

FamilyHarness make_harness(const std::string& family, const ModelConfig& cfg,
                           const DatasetContainer& train, const DatasetContainer& valid,
                           std::uint64_t seed) {
  FamilyHarness h;
  const std::size_t input_dim = train.height() * train.width() * train.channels();
  if (family == "ret") {
    auto model = std::make_shared<ReTModel>();
    h.create = [model, cfg, input_dim, seed] {
      *model = make_ret_model(cfg, input_dim, seed);
    };
    h.forward = [model, input_dim](const Tensor& frames) {
      return ret_forward(reshape(frames, {frames.dim(0), input_dim}), *model);
    };
    h.train = [model, &train, &valid, cfg, seed, forward = h.forward] {
      TrainTask task;
      task.params = ret_param_list(*model);
      task.forward = forward;
      return fit(task, train, valid, cfg, seed);
    };
  } else if (family == "lstm") {
    auto model = std::make_shared<LstmModel>();
    h.create = [model, cfg, input_dim, seed] {
      *model = make_lstm_model(cfg, input_dim, seed);
    };
    h.forward = [model, input_dim](const Tensor& frames) {
      return lstm_forward(reshape(frames, {frames.dim(0), input_dim}), *model);
    };
    h.train = [model, &train, &valid, cfg, seed, forward = h.forward] {
      TrainTask task;
      task.params = lstm_param_list(*model);
      task.forward = forward;
      return fit(task, train, valid, cfg, seed);
    };
  } else if (family == "vit") {
    auto model = std::make_shared<ViTModel>();
    h.create = [model, cfg, seed] { *model = make_vit_model(cfg, seed); };
    h.forward = [model](const Tensor& frames) {
      std::vector<Tensor> frame_probs;
      frame_probs.reserve(frames.dim(0));
      const std::size_t fsz = frames.dim(1) * frames.dim(2) * frames.dim(3);
      for (std::size_t t = 0; t < frames.dim(0); ++t) {
        Tensor frame({frames.dim(1), frames.dim(2), frames.dim(3)});
        const double* src = frames.data().data() + t * fsz;
        std::copy(src, src + fsz, frame.data().data());
        frame_probs.push_back(vit_forward(frame, *model));
      }
      return mean_rows(stack_rows(frame_probs));
    };
    h.train = [model, &train, &valid, cfg, seed, forward = h.forward] {
      TrainTask task;
      task.params = vit_param_list(*model);
      task.forward = forward;
      return fit(task, train, valid, cfg, seed);
    };
  } else if (family == "vit_ret") {
    auto model = std::make_shared<ViTReTModel>();
    h.create = [model, cfg, seed] { *model = make_vit_ret_model(cfg, seed); };
    h.forward = [model](const Tensor& frames) {
      return vit_ret_forward(frames, model->vit, model->ret);
    };
    h.train = [model, &train, &valid, cfg, seed, forward = h.forward] {
      TrainTask task;
      task.params = vit_ret_param_list(*model);
      task.forward = forward;
      return fit(task, train, valid, cfg, seed);
    };
  } else {
    throw ValueError("unknown model family \"" + family + "\"");
  }
  return h;
}

DatasetContainer realize_dataset(const DatasetSpec& spec, std::uint64_t seed) {
  if (spec.synthetic) {
    const SyntheticSpec& s = *spec.synthetic;
    return synthetic_dataset(s.classes, s.samples_per_class, s.frames, s.height,
                             s.width, seed);
  }
  return load_dataset(spec.path);
}

}  // namespace

std::vector<BenchRecord> run_tests(const TestConfig& config) {
  // validate everything up front so a bad config never starts a sweep
  for (const TestGroup& group : config.tests) {
    if (!known_family(group.model)) {
      throw ValueError("unknown model family \"" + group.model + "\"");
    }
    if (group.values.empty()) {
      throw ValueError("empty value list for " + group.model + "/" + group.attribute);
    }
    for (double v : group.values) {
      ModelConfig probe = config.defaults;
      apply_attribute(probe, group.model, group.attribute, v);
    }
  }
  for (const DatasetSpec& spec : config.datasets) {
    if (!spec.synthetic && !std::filesystem::exists(spec.path)) {
      throw ValueError("dataset file not found: " + spec.path);
    }
  }

  std::vector<BenchRecord> records;
  for (const DatasetSpec& spec : config.datasets) {
    DatasetContainer full = realize_dataset(spec, config.seed);
    auto [train, valid] = split_dataset(full, 0.8, config.seed);

    // the dataset decides the data-shaped fields; sweeps restart from the
    // configured defaults at every block boundary
    ModelConfig current = config.defaults;
    current.sequence_length = full.sequence_length();
    current.image_height = full.height();
    current.image_width = full.width();
    current.channels = full.channels();
    current.num_classes = full.num_classes();

    for (const TestGroup& group : config.tests) {
      double best_value = 0.0;
      double best_loss = 0.0;
      bool have_best = false;

      for (double value : group.values) {
        ModelConfig run_cfg = current;
        BenchRecord base;
        base.model = group.model;
        base.dataset = spec.label;
        base.attribute = group.attribute;
        base.value = value;

        try {
          apply_attribute(run_cfg, group.model, group.attribute, value);
          base.config = run_cfg;
          run_cfg.validate();

          FamilyHarness harness =
              make_harness(group.model, run_cfg, train, valid, config.seed);

          BenchRecord create = base;
          create.phase = "create";
          Measurement created = measure(harness.create);
          create.seconds = created.seconds;
          create.memory_mb = created.memory_mb;

          BenchRecord trained = base;
          trained.phase = "train";
          TrainHistory history;
          Measurement fitted = measure([&] { history = harness.train(); });
          trained.seconds = fitted.seconds;
          trained.memory_mb = fitted.memory_mb;
          trained.final_loss = history.back().valid_loss;
          trained.final_accuracy = history.back().valid_accuracy;
          trained.files = train.size();

          BenchRecord through = throughput_bench(harness.forward, valid, 3);
          through.model = base.model;
          through.dataset = base.dataset;
          through.attribute = base.attribute;
          through.value = base.value;
          through.config = base.config;

          records.push_back(std::move(create));
          records.push_back(trained);
          records.push_back(std::move(through));

          // best of the sweep: lowest held-out loss; ties keep the cheaper value
          if (!have_best || trained.final_loss < best_loss ||
              (trained.final_loss == best_loss && value < best_value)) {
            have_best = true;
            best_loss = trained.final_loss;
            best_value = value;
          }
        } catch (const std::exception& e) {
          base.config = run_cfg;
          base.phase = "train";
          base.ok = false;
          base.error = e.what();
          records.push_back(std::move(base));
        }
      }

      if (have_best) {
        apply_attribute(current, group.model, group.attribute, best_value);
      }
    }
  }
  return records;
}

// ---------------------------------------------------------------------------
// reports

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ValueError("csv: bad number \"" + s + "\"");
  }
  return v;
}

std::size_t parse_size(const std::string& s) {
  std::size_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ValueError("csv: bad count \"" + s + "\"");
  }
  return v;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

const char* kCsvHeader =
    "model,dataset,attribute,value,phase,seconds,memory_mb,final_loss,"
    "final_accuracy,files,fps,ok,error,sequence_length,image_height,image_width,"
    "channels,projection_dim,dense_dim,activation,num_heads,patch_size,lstm_layers,"
    "lstm_units,transformer_layers,num_classes,batch_size,epochs,learning_rate";

}  // namespace

std::string records_to_csv(const std::vector<BenchRecord>& records) {
  std::ostringstream os;
  os << kCsvHeader << "\n";
  for (const BenchRecord& r : records) {
    const ModelConfig& c = r.config;
    os << csv_escape(r.model) << ',' << csv_escape(r.dataset) << ','
       << csv_escape(r.attribute) << ',' << format_double(r.value) << ','
       << csv_escape(r.phase) << ',' << format_double(r.seconds) << ','
       << (r.memory_mb ? format_double(*r.memory_mb) : std::string()) << ','
       << format_double(r.final_loss) << ',' << format_double(r.final_accuracy) << ','
       << r.files << ',' << format_double(r.fps) << ',' << (r.ok ? '1' : '0') << ','
       << csv_escape(r.error) << ',' << c.sequence_length << ',' << c.image_height
       << ',' << c.image_width << ',' << c.channels << ',' << c.projection_dim << ','
       << c.dense_dim << ',' << csv_escape(activation_name(c.activation)) << ','
       << c.num_heads << ',' << c.patch_size << ',' << c.lstm_layers << ','
       << c.lstm_units << ',' << c.transformer_layers << ',' << c.num_classes << ','
       << c.batch_size << ',' << c.epochs << ',' << format_double(c.learning_rate)
       << "\n";
  }
  return os.str();
}

std::vector<BenchRecord> parse_csv(const std::string& csv) {
  std::istringstream is(csv);
  std::string line;
  if (!std::getline(is, line)) throw ValueError("csv: empty input");
  if (line != kCsvHeader) throw ValueError("csv: unexpected header");

  std::vector<BenchRecord> records;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 29) {
      std::ostringstream msg;
      msg << "csv: expected 29 fields, got " << f.size();
      throw ValueError(msg.str());
    }
    BenchRecord r;
    r.model = f[0];
    r.dataset = f[1];
    r.attribute = f[2];
    r.value = parse_double(f[3]);
    r.phase = f[4];
    r.seconds = parse_double(f[5]);
    if (!f[6].empty()) r.memory_mb = parse_double(f[6]);
    r.final_loss = parse_double(f[7]);
    r.final_accuracy = parse_double(f[8]);
    r.files = parse_size(f[9]);
    r.fps = parse_double(f[10]);
    r.ok = f[11] == "1";
    r.error = f[12];
    r.config.sequence_length = parse_size(f[13]);
    r.config.image_height = parse_size(f[14]);
    r.config.image_width = parse_size(f[15]);
    r.config.channels = parse_size(f[16]);
    r.config.projection_dim = parse_size(f[17]);
    r.config.dense_dim = parse_size(f[18]);
    r.config.activation = activation_from_name(f[19]);
    r.config.num_heads = parse_size(f[20]);
    r.config.patch_size = parse_size(f[21]);
    r.config.lstm_layers = parse_size(f[22]);
    r.config.lstm_units = parse_size(f[23]);
    r.config.transformer_layers = parse_size(f[24]);
    r.config.num_classes = parse_size(f[25]);
    r.config.batch_size = parse_size(f[26]);
    r.config.epochs = parse_size(f[27]);
    r.config.learning_rate = parse_double(f[28]);
    records.push_back(std::move(r));
  }
  return records;
}

namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

void print_table(std::ostringstream& os, const std::string& title, const Table& t) {
  os << title << "\n";
  if (t.rows.empty()) {
    os << "  (no records)\n\n";
    return;
  }
  std::vector<std::size_t> widths(t.header.size());
  for (std::size_t i = 0; i < t.header.size(); ++i) widths[i] = t.header[i].size();
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      widths[i] = std::max(widths[i], row[i].size());
    }
  }
  auto line = [&](const std::vector<std::string>& cells) {
    os << "  ";
    for (std::size_t i = 0; i < cells.size(); ++i) {
      os << std::left << std::setw(static_cast<int>(widths[i]) + 2) << cells[i];
    }
    os << "\n";
  };
  line(t.header);
  std::string rule;
  for (std::size_t w : widths) rule += std::string(w + 2, '-');
  os << "  " << rule << "\n";
  for (const auto& row : t.rows) line(row);
  os << "\n";
}

std::string fixed(double v, int places) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(places) << v;
  return os.str();
}

std::string run_name(const BenchRecord& r) {
  std::ostringstream os;
  os << r.model;
  if (!r.attribute.empty()) os << " " << r.attribute << "=" << format_double(r.value);
  return os.str();
}

}  // namespace

std::string summary_tables(const std::vector<BenchRecord>& records) {
  std::vector<std::string> datasets;
  for (const BenchRecord& r : records) {
    if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) {
      datasets.push_back(r.dataset);
    }
  }

  std::ostringstream os;
  for (const std::string& ds : datasets) {
    os << "== dataset: " << ds << " ==\n\n";

    Table quality{{"run", "final loss", "accuracy"}, {}};
    Table timing{{"run", "train seconds", "memory MB"}, {}};
    Table speed{{"run", "files", "seconds", "fps"}, {}};
    Table creation{{"run", "create seconds", "memory MB"}, {}};
    double ret_fps = 0.0, lstm_fps = 0.0;
    std::size_t ret_n = 0, lstm_n = 0;

    for (const BenchRecord& r : records) {
      if (r.dataset != ds) continue;
      if (!r.ok) {
        quality.rows.push_back({run_name(r), "FAILED: " + r.error, "-"});
        continue;
      }
      if (r.phase == "train") {
        quality.rows.push_back(
            {run_name(r), fixed(r.final_loss, 4), fixed(r.final_accuracy, 4)});
        timing.rows.push_back({run_name(r), fixed(r.seconds, 3),
                               r.memory_mb ? fixed(*r.memory_mb, 1) : "-"});
      } else if (r.phase == "throughput") {
        speed.rows.push_back({run_name(r), std::to_string(r.files),
                              fixed(r.seconds, 4), fixed(r.fps, 1)});
        if (r.model == "ret") {
          ret_fps += r.fps;
          ++ret_n;
        } else if (r.model == "lstm") {
          lstm_fps += r.fps;
          ++lstm_n;
        }
      } else if (r.phase == "create") {
        creation.rows.push_back({run_name(r), fixed(r.seconds, 4),
                                 r.memory_mb ? fixed(*r.memory_mb, 1) : "-"});
      }
    }

    print_table(os, "model quality (held-out)", quality);
    print_table(os, "training time", timing);
    print_table(os, "inference throughput", speed);
    print_table(os, "model creation", creation);

    if (ret_n > 0 && lstm_n > 0 && lstm_fps > 0.0) {
      const double ratio = (ret_fps / double(ret_n)) / (lstm_fps / double(lstm_n));
      os << "sequence-transformer vs recurrent-baseline throughput: " << fixed(ratio, 2)
         << "x (full-scale reference ratios: 1.21x, 2.00x, 2.24x, 1.98x, 1.98x)\n\n";
    }
  }
  return os.str();
}

void emit_reports(const std::vector<BenchRecord>& records, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  {
    std::ofstream csv(dir / "records.csv", std::ios::binary);
    if (!csv) throw ValueError("cannot write " + (dir / "records.csv").string());
    csv << records_to_csv(records);
  }
  {
    std::ofstream txt(dir / "summary.txt", std::ios::binary);
    if (!txt) throw ValueError("cannot write " + (dir / "summary.txt").string());
    txt << summary_tables(records);
  }
}

}  // namespace vitret
