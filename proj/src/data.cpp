#include "vitret/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

namespace fs = std::filesystem;

namespace vitret {

namespace {

void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& is, const std::string& path) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) {
    throw DataError("truncated file: " + path);
  }
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_string(std::ostream& os, const std::string& s) {
  write_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& is, const std::string& path) {
  const std::uint32_t len = read_u32(is, path);
  if (len > (1u << 20)) throw DataError("implausible string length in " + path);
  std::string s(len, '\0');
  if (!is.read(s.data(), len)) throw DataError("truncated file: " + path);
  return s;
}

void write_f32_frames(std::ostream& os, const Tensor& frames) {
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const float f = static_cast<float>(frames[i]);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    write_u32(os, bits);
  }
}

double snap_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

}  // namespace

DatasetContainer::DatasetContainer(std::vector<FrameSequence> samples,
                                   std::vector<std::string> class_names)
    : samples_(std::move(samples)), class_names_(std::move(class_names)) {
  if (samples_.empty()) throw ValueError("dataset needs at least one sample");
  if (class_names_.empty()) throw ValueError("dataset needs at least one class");

  const Shape& s0 = samples_[0].frames.shape();
  if (s0.size() != 4) {
    throw ShapeError("samples must be [T,H,W,C], got " + shape_str(s0));
  }
  t_ = s0[0], h_ = s0[1], w_ = s0[2], c_ = s0[3];

  for (std::size_t i = 0; i < samples_.size(); ++i) {
    FrameSequence& s = samples_[i];
    if (s.frames.shape() != s0) {
      throw ShapeError("sample " + std::to_string(i) + " has shape " +
                       shape_str(s.frames.shape()) + ", expected " + shape_str(s0));
    }
    if (s.label < 0 || static_cast<std::size_t>(s.label) >= class_names_.size()) {
      throw ValueError("sample " + std::to_string(i) + " has label " +
                       std::to_string(s.label) + " outside " +
                       std::to_string(class_names_.size()) + " classes");
    }
    for (std::size_t j = 0; j < s.frames.size(); ++j) {
      const double v = snap_f32(s.frames[j]);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ValueError("sample " + std::to_string(i) + " has pixel value " +
                         std::to_string(s.frames[j]) + " outside [0,1]");
      }
      s.frames[j] = v;
    }
  }
}

std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t target_len) {
  if (n == 0) throw ValueError("cannot subsample an empty frame sequence");
  if (target_len == 0) throw ValueError("target length must be >= 1");
  std::vector<std::size_t> idx(target_len);
  if (n >= target_len) {
    for (std::size_t i = 0; i < target_len; ++i) idx[i] = i * n / target_len;
  } else {
    for (std::size_t i = 0; i < target_len; ++i) idx[i] = std::min(i, n - 1);
  }
  return idx;
}

Tensor subsample_frames(const Tensor& raw, std::size_t target_len) {
  if (raw.rank() != 4) {
    throw ShapeError("subsample_frames expects [N,H,W,C], got " + shape_str(raw.shape()));
  }
  const std::size_t n = raw.dim(0);
  const std::size_t frame = raw.size() / n;
  const std::vector<std::size_t> idx = subsample_indices(n, target_len);
  Tensor out({target_len, raw.dim(1), raw.dim(2), raw.dim(3)});
  for (std::size_t i = 0; i < target_len; ++i) {
    std::copy_n(raw.data().data() + idx[i] * frame, frame,
                out.data().data() + i * frame);
  }
  return out;
}

Tensor resize_frame(const Tensor& frame, std::size_t out_h, std::size_t out_w) {
  if (frame.rank() != 3) {
    throw ShapeError("resize_frame expects [H,W,C], got " + shape_str(frame.shape()));
  }
  if (out_h == 0 || out_w == 0) throw ValueError("resize target must be positive");
  const std::size_t in_h = frame.dim(0), in_w = frame.dim(1), c = frame.dim(2);

  // corner-aligned sampling grid: output corners land exactly on input corners
  auto src = [](std::size_t i, std::size_t out_n, std::size_t in_n) {
    if (out_n == 1 || in_n == 1) return 0.0;
    return static_cast<double>(i) * static_cast<double>(in_n - 1) /
           static_cast<double>(out_n - 1);
  };

  Tensor out({out_h, out_w, c});
  for (std::size_t oy = 0; oy < out_h; ++oy) {
    const double sy = src(oy, out_h, in_h);
    const std::size_t y0 = static_cast<std::size_t>(sy);
    const std::size_t y1 = std::min(y0 + 1, in_h - 1);
    const double fy = sy - static_cast<double>(y0);
    for (std::size_t ox = 0; ox < out_w; ++ox) {
      const double sx = src(ox, out_w, in_w);
      const std::size_t x0 = static_cast<std::size_t>(sx);
      const std::size_t x1 = std::min(x0 + 1, in_w - 1);
      const double fx = sx - static_cast<double>(x0);
      for (std::size_t ch = 0; ch < c; ++ch) {
        const double v00 = frame(y0, x0, ch), v01 = frame(y0, x1, ch);
        const double v10 = frame(y1, x0, ch), v11 = frame(y1, x1, ch);
        out(oy, ox, ch) = (1.0 - fy) * ((1.0 - fx) * v00 + fx * v01) +
                          fy * ((1.0 - fx) * v10 + fx * v11);
      }
    }
  }
  return out;
}

namespace {
constexpr char kDatasetMagic[4] = {'V', 'R', 'T', 'D'};
constexpr std::uint32_t kDatasetVersion = 1;
}  // namespace

void save_dataset(const DatasetContainer& ds, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open " + path + " for writing");
  os.write(kDatasetMagic, 4);
  write_u32(os, kDatasetVersion);
  write_u32(os, static_cast<std::uint32_t>(ds.size()));
  write_u32(os, static_cast<std::uint32_t>(ds.num_classes()));
  write_u32(os, static_cast<std::uint32_t>(ds.sequence_length()));
  write_u32(os, static_cast<std::uint32_t>(ds.height()));
  write_u32(os, static_cast<std::uint32_t>(ds.width()));
  write_u32(os, static_cast<std::uint32_t>(ds.channels()));
  for (const std::string& name : ds.class_names()) write_string(os, name);
  for (const FrameSequence& s : ds.samples()) {
    write_string(os, s.source_id);
    write_u32(os, static_cast<std::uint32_t>(s.label));
    write_f32_frames(os, s.frames);
  }
  if (!os) throw DataError("write failed for " + path);
}

DatasetContainer load_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kDatasetMagic, 4) != 0) {
    throw DataError("not a dataset file (bad magic): " + path);
  }
  const std::uint32_t version = read_u32(is, path);
  if (version != kDatasetVersion) {
    throw DataError("unsupported dataset version " + std::to_string(version) + " in " +
                    path);
  }
  const std::uint32_t count = read_u32(is, path);
  const std::uint32_t classes = read_u32(is, path);
  const std::uint32_t t = read_u32(is, path);
  const std::uint32_t h = read_u32(is, path);
  const std::uint32_t w = read_u32(is, path);
  const std::uint32_t c = read_u32(is, path);
  if (count == 0 || classes == 0 || t == 0 || h == 0 || w == 0 || c == 0) {
    throw DataError("corrupt dataset header in " + path);
  }

  std::vector<std::string> names(classes);
  for (auto& n : names) n = read_string(is, path);

  std::vector<FrameSequence> samples;
  samples.reserve(count);
  const std::size_t frame_values = static_cast<std::size_t>(t) * h * w * c;
  for (std::uint32_t i = 0; i < count; ++i) {
    FrameSequence s;
    s.source_id = read_string(is, path);
    s.label = static_cast<int>(read_u32(is, path));
    Tensor frames({t, h, w, c});
    for (std::size_t j = 0; j < frame_values; ++j) {
      const std::uint32_t bits = read_u32(is, path);
      float f;
      std::memcpy(&f, &bits, 4);
      frames[j] = static_cast<double>(f);
    }
    s.frames = std::move(frames);
    samples.push_back(std::move(s));
  }
  return DatasetContainer(std::move(samples), std::move(names));
}

BatchGenerator::BatchGenerator(const DatasetContainer& ds, std::size_t batch_size,
                               std::uint64_t seed, bool shuffle)
    : ds_(&ds), batch_size_(batch_size), shuffle_(shuffle), rng_(seed) {
  if (batch_size == 0) throw ValueError("batch_size must be >= 1");
  order_.resize(ds.size());
  std::iota(order_.begin(), order_.end(), 0);
  if (shuffle_) std::shuffle(order_.begin(), order_.end(), rng_);
}

bool BatchGenerator::next(Batch& out) {
  if (cursor_ >= order_.size()) return false;
  const std::size_t take = std::min(batch_size_, order_.size() - cursor_);
  out.sequences.assign(take, Tensor());
  out.labels.assign(take, 0);
  for (std::size_t i = 0; i < take; ++i) {
    const FrameSequence& s = ds_->sample(order_[cursor_ + i]);
    out.sequences[i] = s.frames;
    out.labels[i] = s.label;
  }
  cursor_ += take;
  return true;
}

void BatchGenerator::reset() {
  cursor_ = 0;
  if (shuffle_) std::shuffle(order_.begin(), order_.end(), rng_);
}

std::size_t BatchGenerator::batches_per_epoch() const {
  return (order_.size() + batch_size_ - 1) / batch_size_;
}

namespace {

const char* kMotionNames[8] = {"right",   "left",   "up",     "down",
                               "diag_se", "diag_ne", "circle", "blink"};

struct Pose {
  double x, y;  // top-left corner of the square, continuous pixel coords
};

Pose motion_position(std::size_t cls, Pose start, double v, std::size_t t,
                     std::size_t total) {
  const double s = static_cast<double>(t);
  switch (cls) {
    case 0: return {start.x + v * s, start.y};
    case 1: return {start.x - v * s, start.y};
    case 2: return {start.x, start.y - v * s};
    case 3: return {start.x, start.y + v * s};
    case 4: return {start.x + v * s, start.y + v * s};
    case 5: return {start.x + v * s, start.y - v * s};
    case 6: {
      // clockwise orbit that starts exactly at the shared pose
      const double r = v * static_cast<double>(total - 1) / 2.0;
      const double theta = 2.0 * 3.14159265358979323846 * s / static_cast<double>(total);
      return {start.x - r + r * std::cos(theta), start.y - r * std::sin(theta)};
    }
    default: return start;  // 7: stationary (brightness blinks instead)
  }
}

// Coverage of pixel cell [px, px+1) x [py, py+1) by the square with top-left
// (pose.x, pose.y) and the given side length.
double square_coverage(const Pose& pose, double side, std::size_t px, std::size_t py) {
  const double ox = std::min(pose.x + side, static_cast<double>(px + 1)) -
                    std::max(pose.x, static_cast<double>(px));
  const double oy = std::min(pose.y + side, static_cast<double>(py + 1)) -
                    std::max(pose.y, static_cast<double>(py));
  if (ox <= 0.0 || oy <= 0.0) return 0.0;
  return ox * oy;
}

}  // namespace

DatasetContainer synthetic_dataset(std::size_t num_classes,
                                   std::size_t samples_per_class, std::size_t t,
                                   std::size_t h, std::size_t w, std::uint64_t seed) {
  if (num_classes < 2 || num_classes > 8) {
    throw ValueError("synthetic_dataset supports 2..8 classes, got " +
                     std::to_string(num_classes));
  }
  if (samples_per_class == 0) throw ValueError("samples_per_class must be >= 1");
  if (t < 2) throw ValueError("synthetic sequences need at least 2 frames");
  if (h < 8 || w < 8) throw ValueError("synthetic frames must be at least 8x8");

  const double side = std::max(3.0, static_cast<double>(std::min(h, w)) / 6.0);
  const double span = static_cast<double>(std::min(h, w)) - side - 2.0;
  const double v =
      std::min(0.6, span / (2.0 * static_cast<double>(t - 1)));
  const double margin = v * static_cast<double>(t - 1);

  std::vector<FrameSequence> samples;
  samples.reserve(num_classes * samples_per_class);

  for (std::size_t cls = 0; cls < num_classes; ++cls) {
    for (std::size_t j = 0; j < samples_per_class; ++j) {
      // All randomness is drawn in a class-independent order from a stream
      // keyed only by (seed, sample index), so frame 0 (pose, noise,
      // brightness) is identical across classes: single frames stay
      // ambiguous and only the motion separates the classes.
      std::seed_seq ss{static_cast<std::uint32_t>(seed),
                       static_cast<std::uint32_t>(seed >> 32),
                       static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(j >> 32)};
      std::mt19937_64 rng(ss);
      std::uniform_real_distribution<double> noise(0.0, 0.3);

      const double lo_x = 1.0 + margin, hi_x = static_cast<double>(w) - side - 1.0 - margin;
      const double lo_y = 1.0 + margin, hi_y = static_cast<double>(h) - side - 1.0 - margin;
      std::uniform_real_distribution<double> px(lo_x, hi_x), py(lo_y, hi_y);
      const Pose start{px(rng), py(rng)};

      Tensor frames({t, h, w, 1});
      for (std::size_t step = 0; step < t; ++step) {
        const Pose pos = motion_position(cls, start, v, step, t);
        const double brightness = (cls == 7 && step % 2 == 1) ? 0.5 : 1.0;
        for (std::size_t y = 0; y < h; ++y) {
          for (std::size_t x = 0; x < w; ++x) {
            const double bg = noise(rng);
            const double cov = square_coverage(pos, side, x, y);
            frames(step, y, x, 0) = cov * brightness + (1.0 - cov) * bg;
          }
        }
      }

      FrameSequence s;
      s.frames = std::move(frames);
      s.label = static_cast<int>(cls);
      std::ostringstream id;
      id << "synthetic/" << kMotionNames[cls] << "/" << j;
      s.source_id = id.str();
      samples.push_back(std::move(s));
    }
  }

  std::vector<std::string> names(kMotionNames, kMotionNames + num_classes);
  return DatasetContainer(std::move(samples), std::move(names));
}

namespace {

void skip_pnm_whitespace(std::istream& is) {
  for (;;) {
    const int c = is.peek();
    if (c == '#') {
      std::string line;
      std::getline(is, line);
    } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      is.get();
    } else {
      return;
    }
  }
}

std::size_t read_pnm_number(std::istream& is, const std::string& path) {
  skip_pnm_whitespace(is);
  std::size_t v = 0;
  bool any = false;
  for (;;) {
    const int c = is.peek();
    if (c < '0' || c > '9') break;
    v = v * 10 + static_cast<std::size_t>(is.get() - '0');
    any = true;
  }
  if (!any) throw DataError("malformed image header in " + path);
  return v;
}

}  // namespace

Tensor load_image(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open image " + path);
  char m0 = 0, m1 = 0;
  is.get(m0);
  is.get(m1);
  std::size_t channels;
  if (m0 == 'P' && m1 == '5') {
    channels = 1;
  } else if (m0 == 'P' && m1 == '6') {
    channels = 3;
  } else {
    throw DataError("unsupported image format (want binary PGM/PPM) in " + path);
  }
  const std::size_t w = read_pnm_number(is, path);
  const std::size_t h = read_pnm_number(is, path);
  const std::size_t maxval = read_pnm_number(is, path);
  if (w == 0 || h == 0 || maxval == 0 || maxval > 65535) {
    throw DataError("malformed image header in " + path);
  }
  is.get();  // single whitespace byte after maxval

  const std::size_t values = w * h * channels;
  const std::size_t bytes_per = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> raw(values * bytes_per);
  if (!is.read(reinterpret_cast<char*>(raw.data()),
               static_cast<std::streamsize>(raw.size()))) {
    throw DataError("truncated image data in " + path);
  }

  Tensor out({h, w, channels});
  for (std::size_t i = 0; i < values; ++i) {
    std::size_t raw_v;
    if (bytes_per == 1) {
      raw_v = raw[i];
    } else {
      raw_v = (static_cast<std::size_t>(raw[2 * i]) << 8) | raw[2 * i + 1];
    }
    out[i] = static_cast<double>(raw_v) / static_cast<double>(maxval);
  }
  return out;
}

namespace {
void save_pnm(const Tensor& frame, const std::string& path, std::size_t channels,
              const char* magic) {
  if (frame.rank() != 3 || frame.dim(2) != channels) {
    throw ShapeError("expected [H,W," + std::to_string(channels) + "] frame, got " +
                     shape_str(frame.shape()));
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open " + path + " for writing");
  os << magic << "\n" << frame.dim(1) << " " << frame.dim(0) << "\n255\n";
  for (std::size_t i = 0; i < frame.size(); ++i) {
    const double clamped = std::clamp(frame[i], 0.0, 1.0);
    os.put(static_cast<char>(static_cast<unsigned char>(std::lround(clamped * 255.0))));
  }
  if (!os) throw DataError("write failed for " + path);
}
}  // namespace

void save_pgm(const Tensor& frame, const std::string& path) {
  save_pnm(frame, path, 1, "P5");
}

void save_ppm(const Tensor& frame, const std::string& path) {
  save_pnm(frame, path, 3, "P6");
}

DatasetContainer ingest_image_directory(const std::string& root,
                                        const ModelConfig& config) {
  const fs::path root_path(root);
  if (!fs::is_directory(root_path)) {
    throw DataError("ingest root is not a directory: " + root);
  }

  std::vector<fs::path> class_dirs;
  for (const auto& entry : fs::directory_iterator(root_path)) {
    if (entry.is_directory()) class_dirs.push_back(entry.path());
  }
  std::sort(class_dirs.begin(), class_dirs.end());
  if (class_dirs.empty()) throw DataError("no class directories under " + root);

  std::vector<std::string> class_names;
  std::vector<FrameSequence> samples;
  for (std::size_t cls = 0; cls < class_dirs.size(); ++cls) {
    class_names.push_back(class_dirs[cls].filename().string());

    std::vector<fs::path> sample_dirs;
    for (const auto& entry : fs::directory_iterator(class_dirs[cls])) {
      if (entry.is_directory()) sample_dirs.push_back(entry.path());
    }
    std::sort(sample_dirs.begin(), sample_dirs.end());
    if (sample_dirs.empty()) {
      throw DataError("class directory has no samples: " + class_dirs[cls].string());
    }

    for (const fs::path& sample_dir : sample_dirs) {
      std::vector<fs::path> frame_files;
      for (const auto& entry : fs::directory_iterator(sample_dir)) {
        if (entry.is_regular_file()) frame_files.push_back(entry.path());
      }
      std::sort(frame_files.begin(), frame_files.end());
      if (frame_files.empty()) {
        throw DataError("sample directory has no frames: " + sample_dir.string());
      }

      const std::vector<std::size_t> keep =
          subsample_indices(frame_files.size(), config.sequence_length);
      Tensor frames({config.sequence_length, config.image_height, config.image_width,
                     config.channels});
      const std::size_t frame_values = config.frame_values();
      for (std::size_t i = 0; i < keep.size(); ++i) {
        Tensor img = load_image(frame_files[keep[i]].string());
        if (img.dim(2) != config.channels) {
          throw DataError("image " + frame_files[keep[i]].string() + " has " +
                          std::to_string(img.dim(2)) + " channels, config expects " +
                          std::to_string(config.channels));
        }
        Tensor resized = resize_frame(img, config.image_height, config.image_width);
        std::copy_n(resized.data().data(), frame_values,
                    frames.data().data() + i * frame_values);
      }

      FrameSequence s;
      s.frames = std::move(frames);
      s.label = static_cast<int>(cls);
      s.source_id = fs::relative(sample_dir, root_path).string();
      samples.push_back(std::move(s));
    }
  }
  return DatasetContainer(std::move(samples), std::move(class_names));
}

std::pair<DatasetContainer, DatasetContainer> split_dataset(const DatasetContainer& ds,
                                                            double train_fraction,
                                                            std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValueError("train_fraction must be inside (0,1)");
  }
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::size_t train_count = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(ds.size())));
  train_count = std::clamp<std::size_t>(train_count, 1, ds.size() - 1);

  std::vector<FrameSequence> train, valid;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const FrameSequence& s = ds.sample(order[i]);
    (i < train_count ? train : valid).push_back(s);
  }
  return {DatasetContainer(std::move(train), ds.class_names()),
          DatasetContainer(std::move(valid), ds.class_names())};
}

}  // namespace vitret
