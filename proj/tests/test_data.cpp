#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "vitret/data.hpp"

using namespace vitret;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const char* tag) {
  fs::path p = fs::temp_directory_path() / (std::string("vitret_test_") + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Tensor ramp_frames(std::size_t n, std::size_t h, std::size_t w, std::size_t c) {
  Tensor t({n, h, w, c});
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = static_cast<double>(i % 97) / 97.0;
  }
  return t;
}

// centroid x/y of one synthetic frame, weighting bright pixels only so the
// noise floor (<= 0.3) does not bias the estimate
std::pair<double, double> bright_centroid(const Tensor& frames, std::size_t t) {
  double sx = 0.0, sy = 0.0, mass = 0.0;
  for (std::size_t y = 0; y < frames.dim(1); ++y) {
    for (std::size_t x = 0; x < frames.dim(2); ++x) {
      const double v = frames(t, y, x, 0);
      if (v > 0.35) {
        sx += v * static_cast<double>(x);
        sy += v * static_cast<double>(y);
        mass += v;
      }
    }
  }
  REQUIRE(mass > 0.0);
  return {sx / mass, sy / mass};
}

}  // namespace

TEST_CASE("subsample indices follow the floor formula") {
  // N == target: identity
  auto same = subsample_indices(20, 20);
  for (std::size_t i = 0; i < 20; ++i) CHECK(same[i] == i);

  // N=100, T=20 -> 0,5,10,...,95
  auto idx = subsample_indices(100, 20);
  for (std::size_t i = 0; i < 20; ++i) CHECK(idx[i] == 5 * i);

  // N=5, T=20 -> 0..4 then 4 repeated
  auto fill = subsample_indices(5, 20);
  for (std::size_t i = 0; i < 5; ++i) CHECK(fill[i] == i);
  for (std::size_t i = 5; i < 20; ++i) CHECK(fill[i] == 4);

  CHECK_THROWS_AS(subsample_indices(0, 20), ValueError);
}

TEST_CASE("subsample_frames selects whole frames in order") {
  Tensor raw = ramp_frames(10, 2, 3, 1);
  Tensor out = subsample_frames(raw, 4);
  REQUIRE(out.shape() == Shape{4, 2, 3, 1});
  auto idx = subsample_indices(10, 4);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      CHECK(out[i * 6 + j] == raw[idx[i] * 6 + j]);
    }
  }
  // order preserved: indices non-decreasing
  for (std::size_t i = 1; i < idx.size(); ++i) CHECK(idx[i] >= idx[i - 1]);

  CHECK_THROWS_AS(subsample_frames(Tensor({2, 3}), 4), ShapeError);
}

TEST_CASE("resize_frame constant and identity cases") {
  Tensor flat = Tensor::full({3, 5, 1}, 0.5);
  Tensor grown = resize_frame(flat, 7, 9);
  REQUIRE(grown.shape() == Shape{7, 9, 1});
  for (std::size_t i = 0; i < grown.size(); ++i) CHECK(grown[i] == 0.5);

  Tensor ramp({2, 2, 3});
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 0.01 * double(i);
  Tensor same = resize_frame(ramp, 2, 2);
  for (std::size_t i = 0; i < ramp.size(); ++i) CHECK(same[i] == ramp[i]);

  CHECK_THROWS_AS(resize_frame(ramp, 0, 2), ValueError);
  CHECK_THROWS_AS(resize_frame(Tensor({2, 2}), 2, 2), ShapeError);
}

TEST_CASE("resize_frame bilinear checkerboard oracle") {
  Tensor checker({2, 2, 1}, {0.0, 1.0, 1.0, 0.0});
  Tensor out = resize_frame(checker, 4, 4);
  // corner-aligned grid at x,y in {0, 1/3, 2/3, 1}; value = x + y - 2xy
  const double g[4] = {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      const double want = g[c] + g[r] - 2.0 * g[c] * g[r];
      CHECK(out(r, c, 0) == doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("resize_frame output stays within input range") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  Tensor src({5, 7, 1});
  double lo = 1.0, hi = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    src[i] = d(rng);
    lo = std::min(lo, src[i]);
    hi = std::max(hi, src[i]);
  }
  for (auto [oh, ow] : {std::pair<std::size_t, std::size_t>{3, 4},
                        std::pair<std::size_t, std::size_t>{11, 13},
                        std::pair<std::size_t, std::size_t>{1, 1}}) {
    Tensor out = resize_frame(src, oh, ow);
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(out[i] >= lo);
      CHECK(out[i] <= hi);
    }
  }
}

TEST_CASE("dataset container validates its inputs") {
  Tensor good({2, 2, 2, 1}, std::vector<double>(8, 0.5));
  FrameSequence s{good, 0, "a"};

  CHECK_THROWS_AS(DatasetContainer({}, {"x"}), ValueError);
  CHECK_THROWS_AS(DatasetContainer({s}, {}), ValueError);

  FrameSequence bad_label{good, 3, "b"};
  CHECK_THROWS_AS(DatasetContainer({s, bad_label}, {"x", "y"}), ValueError);

  FrameSequence bad_shape{Tensor({2, 2, 3, 1}, std::vector<double>(12, 0.5)), 0, "c"};
  CHECK_THROWS_AS(DatasetContainer({s, bad_shape}, {"x"}), ShapeError);

  FrameSequence bad_range{Tensor({2, 2, 2, 1}, std::vector<double>(8, 1.5)), 0, "d"};
  CHECK_THROWS_AS(DatasetContainer({bad_range}, {"x"}), ValueError);

  DatasetContainer ok({s}, {"x"});
  CHECK(ok.size() == 1);
  CHECK(ok.sequence_length() == 2);
  CHECK(ok.height() == 2);
  CHECK(ok.width() == 2);
  CHECK(ok.channels() == 1);
}

TEST_CASE("dataset save/load round-trip is byte-lossless") {
  DatasetContainer ds = synthetic_dataset(3, 2, 4, 12, 12, 42);
  const fs::path dir = temp_dir("roundtrip");
  const std::string path = (dir / "ds.vrtd").string();
  save_dataset(ds, path);
  DatasetContainer back = load_dataset(path);

  REQUIRE(back.size() == ds.size());
  REQUIRE(back.class_names() == ds.class_names());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(back.sample(i).label == ds.sample(i).label);
    CHECK(back.sample(i).source_id == ds.sample(i).source_id);
    REQUIRE(back.sample(i).frames.shape() == ds.sample(i).frames.shape());
    for (std::size_t j = 0; j < ds.sample(i).frames.size(); ++j) {
      CHECK(back.sample(i).frames[j] == ds.sample(i).frames[j]);
    }
  }

  // second save of the loaded container produces identical bytes
  const std::string path2 = (dir / "ds2.vrtd").string();
  save_dataset(back, path2);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(b1 == b2);
  fs::remove_all(dir);
}

TEST_CASE("dataset load rejects bad magic, version and truncation") {
  const fs::path dir = temp_dir("badfiles");
  const std::string good_path = (dir / "good.vrtd").string();
  DatasetContainer ds = synthetic_dataset(2, 1, 3, 10, 10, 7);
  save_dataset(ds, good_path);

  std::ifstream in(good_path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();

  const std::string bad_magic_path = (dir / "magic.vrtd").string();
  std::string corrupted = bytes;
  corrupted[0] = 'X';
  std::ofstream(bad_magic_path, std::ios::binary) << corrupted;
  CHECK_THROWS_AS(load_dataset(bad_magic_path), DataError);

  const std::string bad_version_path = (dir / "version.vrtd").string();
  corrupted = bytes;
  corrupted[4] = 99;
  std::ofstream(bad_version_path, std::ios::binary) << corrupted;
  CHECK_THROWS_AS(load_dataset(bad_version_path), DataError);

  const std::string truncated_path = (dir / "short.vrtd").string();
  std::ofstream(truncated_path, std::ios::binary) << bytes.substr(0, bytes.size() / 2);
  CHECK_THROWS_AS(load_dataset(truncated_path), DataError);

  CHECK_THROWS_AS(load_dataset((dir / "missing.vrtd").string()), DataError);
  fs::remove_all(dir);
}

TEST_CASE("batch generator yields 4,4,2 for n=10 batch=4") {
  DatasetContainer ds = synthetic_dataset(2, 5, 2, 10, 10, 3);
  REQUIRE(ds.size() == 10);
  BatchGenerator gen(ds, 4, 1, false);
  CHECK(gen.batches_per_epoch() == 3);
  std::vector<std::size_t> sizes;
  Batch b;
  while (gen.next(b)) sizes.push_back(b.size());
  REQUIRE(sizes.size() == 3);
  CHECK(sizes[0] == 4);
  CHECK(sizes[1] == 4);
  CHECK(sizes[2] == 2);

  CHECK_THROWS_AS(BatchGenerator(ds, 0, 1, false), ValueError);
}

TEST_CASE("batch generator shuffle is seed-deterministic and partitions labels") {
  DatasetContainer ds = synthetic_dataset(4, 3, 2, 10, 10, 11);

  auto collect = [&](std::uint64_t seed) {
    BatchGenerator gen(ds, 5, seed, true);
    std::vector<int> labels;
    Batch b;
    while (gen.next(b)) {
      for (int l : b.labels) labels.push_back(l);
    }
    return labels;
  };

  CHECK(collect(9) == collect(9));
  CHECK(collect(9) != collect(10));

  // multiset of labels equals the dataset's labels regardless of shuffle
  std::map<int, int> want, got;
  for (const auto& s : ds.samples()) want[s.label]++;
  for (int l : collect(9)) got[l]++;
  CHECK(want == got);
}

TEST_CASE("batch generator reset redraws the epoch order") {
  DatasetContainer ds = synthetic_dataset(2, 8, 2, 10, 10, 17);
  BatchGenerator gen(ds, 16, 5, true);
  Batch b;
  REQUIRE(gen.next(b));
  const std::vector<int> first = b.labels;
  CHECK_FALSE(gen.next(b));
  gen.reset();
  REQUIRE(gen.next(b));
  // same multiset, almost surely different order after the redraw
  std::multiset<int> m1(first.begin(), first.end()), m2(b.labels.begin(), b.labels.end());
  CHECK(m1 == m2);
  CHECK(first != b.labels);
}

TEST_CASE("synthetic dataset determinism and class balance") {
  DatasetContainer a = synthetic_dataset(4, 3, 5, 16, 16, 77);
  DatasetContainer b = synthetic_dataset(4, 3, 5, 16, 16, 77);
  REQUIRE(a.size() == 12);
  std::map<int, int> counts;
  for (std::size_t i = 0; i < a.size(); ++i) {
    counts[a.sample(i).label]++;
    REQUIRE(a.sample(i).frames.shape() == b.sample(i).frames.shape());
    for (std::size_t j = 0; j < a.sample(i).frames.size(); ++j) {
      CHECK(a.sample(i).frames[j] == b.sample(i).frames[j]);
    }
  }
  for (auto& [cls, n] : counts) CHECK(n == 3);

  CHECK_THROWS_AS(synthetic_dataset(1, 3, 5, 16, 16, 0), ValueError);
  CHECK_THROWS_AS(synthetic_dataset(9, 3, 5, 16, 16, 0), ValueError);
}

TEST_CASE("synthetic class 0 moves right; class 1 moves left") {
  DatasetContainer ds = synthetic_dataset(2, 4, 8, 32, 32, 1234);
  for (const auto& s : ds.samples()) {
    double prev_x = bright_centroid(s.frames, 0).first;
    for (std::size_t t = 1; t < 8; ++t) {
      const double x = bright_centroid(s.frames, t).first;
      if (s.label == 0) {
        CHECK(x > prev_x);
      } else {
        CHECK(x < prev_x);
      }
      prev_x = x;
    }
  }
}

TEST_CASE("synthetic frame 0 is identical across classes for one sample index") {
  // classes 0 (right) and 2 (up) share pose, noise and brightness at t=0
  DatasetContainer ds = synthetic_dataset(4, 2, 6, 24, 24, 555);
  const std::size_t frame_values = 24 * 24;
  for (std::size_t j = 0; j < 2; ++j) {
    const Tensor& f0 = ds.sample(0 * 2 + j).frames;  // class 0, sample j
    const Tensor& f2 = ds.sample(2 * 2 + j).frames;  // class 2, sample j
    for (std::size_t i = 0; i < frame_values; ++i) {
      CHECK(f0[i] == f2[i]);
    }
    // later frames differ (different motion)
    bool differs = false;
    for (std::size_t i = frame_values; i < f0.size() && !differs; ++i) {
      differs = f0[i] != f2[i];
    }
    CHECK(differs);
  }
}

TEST_CASE("synthetic blink class alternates square brightness in place") {
  DatasetContainer ds = synthetic_dataset(8, 1, 6, 32, 32, 321);
  const FrameSequence* blink = nullptr;
  for (const auto& s : ds.samples()) {
    if (s.source_id.find("blink") != std::string::npos) blink = &s;
  }
  REQUIRE(blink != nullptr);
  auto [x0, y0] = bright_centroid(blink->frames, 0);
  auto [x2, y2] = bright_centroid(blink->frames, 2);
  // the square is stationary; background noise jitters the estimator slightly
  CHECK(std::abs(x0 - x2) < 0.05);
  CHECK(std::abs(y0 - y2) < 0.05);

  // peak value drops on odd frames
  auto peak = [&](std::size_t t) {
    double m = 0.0;
    for (std::size_t i = 0; i < 32 * 32; ++i) {
      m = std::max(m, blink->frames[t * 32 * 32 + i]);
    }
    return m;
  };
  CHECK(peak(0) > 0.9);
  CHECK(peak(1) < 0.65);
  CHECK(peak(1) > 0.4);
}

TEST_CASE("image files round-trip through PGM and PPM") {
  const fs::path dir = temp_dir("pnm");
  Tensor gray({5, 7, 1});
  for (std::size_t i = 0; i < gray.size(); ++i) {
    gray[i] = static_cast<double>(i) / double(gray.size());
  }
  const std::string gray_path = (dir / "g.pgm").string();
  save_pgm(gray, gray_path);
  Tensor gray_back = load_image(gray_path);
  REQUIRE(gray_back.shape() == gray.shape());
  for (std::size_t i = 0; i < gray.size(); ++i) {
    CHECK(gray_back[i] == doctest::Approx(gray[i]).epsilon(1.0 / 255.0));
  }

  Tensor rgb({4, 3, 3});
  for (std::size_t i = 0; i < rgb.size(); ++i) rgb[i] = (i % 11) / 10.0;
  const std::string rgb_path = (dir / "c.ppm").string();
  save_ppm(rgb, rgb_path);
  Tensor rgb_back = load_image(rgb_path);
  REQUIRE(rgb_back.shape() == rgb.shape());
  for (std::size_t i = 0; i < rgb.size(); ++i) {
    CHECK(rgb_back[i] == doctest::Approx(rgb[i]).epsilon(1.0 / 255.0));
  }

  // 16-bit PGM with comments parses too
  const std::string deep_path = (dir / "deep.pgm").string();
  {
    std::ofstream os(deep_path, std::ios::binary);
    os << "P5\n# a comment\n2 2\n65535\n";
    const unsigned char bytes[8] = {0, 0, 0xff, 0xff, 0x80, 0x00, 0x40, 0x00};
    os.write(reinterpret_cast<const char*>(bytes), 8);
  }
  Tensor deep = load_image(deep_path);
  CHECK(deep[0] == 0.0);
  CHECK(deep[1] == 1.0);
  CHECK(deep[2] == doctest::Approx(0x8000 / 65535.0).epsilon(1e-9));

  CHECK_THROWS_AS(load_image((dir / "nope.pgm").string()), DataError);
  const std::string bad = (dir / "bad.pgm").string();
  std::ofstream(bad, std::ios::binary) << "P9 junk";
  CHECK_THROWS_AS(load_image(bad), DataError);
  const std::string cut = (dir / "cut.pgm").string();
  std::ofstream(cut, std::ios::binary) << "P5\n4 4\n255\nxy";
  CHECK_THROWS_AS(load_image(cut), DataError);
  fs::remove_all(dir);
}

TEST_CASE("directory ingestion builds a sorted, resized container") {
  const fs::path dir = temp_dir("ingest");
  // two classes, two samples each; frames of varying counts and sizes
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  for (const char* cls : {"walk", "jump"}) {
    for (const char* sample : {"s0", "s1"}) {
      fs::create_directories(dir / cls / sample);
      const std::size_t frames = (std::string(cls) == "walk") ? 9 : 3;
      for (std::size_t f = 0; f < frames; ++f) {
        Tensor img({6, 8, 1});
        for (std::size_t i = 0; i < img.size(); ++i) img[i] = d(rng);
        char name[32];
        std::snprintf(name, sizeof name, "frame_%04zu.pgm", f);
        save_pgm(img, (dir / cls / sample / name).string());
      }
    }
  }

  ModelConfig cfg;
  cfg.sequence_length = 5;
  cfg.image_height = 4;
  cfg.image_width = 4;
  cfg.channels = 1;
  DatasetContainer ds = ingest_image_directory(dir.string(), cfg);
  CHECK(ds.size() == 4);
  REQUIRE(ds.class_names() == std::vector<std::string>{"jump", "walk"});
  CHECK(ds.sequence_length() == 5);
  CHECK(ds.height() == 4);
  CHECK(ds.width() == 4);
  for (const auto& s : ds.samples()) {
    CHECK(s.frames.shape() == Shape{5, 4, 4, 1});
    CHECK(ds.class_names()[s.label].size() == 4);
  }
  // labels follow sorted class order: jump=0, walk=1
  CHECK(ds.sample(0).label == 0);
  CHECK(ds.sample(2).label == 1);

  // empty sample directory is an explicit error naming the path
  fs::create_directories(dir / "walk" / "s2");
  try {
    ingest_image_directory(dir.string(), cfg);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("s2") != std::string::npos);
  }
  fs::remove_all(dir / "walk" / "s2");

  // channel mismatch is an error naming the file
  Tensor rgb({4, 4, 3});
  for (std::size_t i = 0; i < rgb.size(); ++i) rgb[i] = 0.25;
  save_ppm(rgb, (dir / "jump" / "s0" / "frame_9999.ppm").string());
  CHECK_THROWS_AS(ingest_image_directory(dir.string(), cfg), DataError);

  fs::remove_all(dir);
}

TEST_CASE("split_dataset produces a seeded 80/20 partition") {
  DatasetContainer ds = synthetic_dataset(4, 5, 2, 10, 10, 2024);
  auto [train, valid] = split_dataset(ds, 0.8, 9);
  CHECK(train.size() == 16);
  CHECK(valid.size() == 4);
  CHECK(train.class_names() == ds.class_names());

  auto [train2, valid2] = split_dataset(ds, 0.8, 9);
  for (std::size_t i = 0; i < train.size(); ++i) {
    CHECK(train.sample(i).source_id == train2.sample(i).source_id);
  }

  // together they cover the dataset exactly once
  std::multiset<std::string> ids;
  for (const auto& s : train.samples()) ids.insert(s.source_id);
  for (const auto& s : valid.samples()) ids.insert(s.source_id);
  std::multiset<std::string> want;
  for (const auto& s : ds.samples()) want.insert(s.source_id);
  CHECK(ids == want);

  CHECK_THROWS_AS(split_dataset(ds, 0.0, 1), ValueError);
  CHECK_THROWS_AS(split_dataset(ds, 1.0, 1), ValueError);
}
