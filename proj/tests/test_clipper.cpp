#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "framealign/clipper.hpp"
#include "framealign/error.hpp"

using namespace framealign;

namespace {

double direct_db(const AudioClip& c, std::size_t start, std::size_t len) {
  double acc = 0.0;
  for (std::size_t k = start; k < start + len; ++k) acc += c.samples[k] * c.samples[k];
  acc /= static_cast<double>(len);
  return acc == 0.0 ? -120.0 : 10.0 * std::log10(acc);
}

}  // namespace

TEST(Envelope, ConstantSignals) {
  AudioClip one = fixtures::silence(1.0);
  std::fill(one.samples.begin(), one.samples.end(), 1.0);
  for (double v : energy_envelope(one, 0.1, 0.05).window_db) EXPECT_EQ(v, 0.0);

  for (double v : energy_envelope(fixtures::silence(1.0), 0.1, 0.05).window_db) {
    EXPECT_EQ(v, kSilenceFloorDb);
  }

  AudioClip tenth = fixtures::silence(1.0);
  std::fill(tenth.samples.begin(), tenth.samples.end(), 0.1);
  for (double v : energy_envelope(tenth, 0.1, 0.05).window_db) EXPECT_NEAR(v, -20.0, 1e-9);
}

TEST(Envelope, EntriesMatchDirectSummation) {
  const AudioClip c = fixtures::noise(2.0, 0.3, 17);
  const auto env = energy_envelope(c, 0.1, 0.05);
  EXPECT_EQ(env.window_samples, 1600u);
  EXPECT_EQ(env.hop_samples, 800u);
  EXPECT_EQ(env.window_db.size(), (c.size() - 1600) / 800 + 1);
  for (std::size_t i = 0; i < env.window_db.size(); ++i) {
    EXPECT_NEAR(env.window_db[i], direct_db(c, i * 800, 1600), 1e-9);
  }
}

TEST(Envelope, GainShiftsEveryEntryExactly) {
  const AudioClip c = fixtures::noise(1.0, 0.2, 9);
  for (double g : {-12.0, 3.5, 6.0}) {
    AudioClip s = c;
    for (double& v : s.samples) v *= std::pow(10.0, g / 20.0);
    const auto a = energy_envelope(c, 0.1, 0.05).window_db;
    const auto b = energy_envelope(s, 0.1, 0.05).window_db;
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(b[i] - a[i], g, 1e-9);
  }
}

TEST(Envelope, ShorterThanWindowIsAnError) {
  EXPECT_THROW(energy_envelope(fixtures::silence(0.05), 0.1, 0.05), Error);
  EXPECT_THROW(energy_envelope(fixtures::silence(1.0), 0.1, 0.0), Error);
}

TEST(Segment, ToneFixtureBoundaries) {
  const ClipperParams p;
  const auto seg = extract_event_segment(fixtures::tone_fixture(), p);
  ASSERT_TRUE(seg.has_value());
  EXPECT_NEAR(seg->onset_s, 2.0, p.hop_s + 1e-9);
  EXPECT_NEAR(seg->offset_s, 5.0, p.hop_s + 1e-9);
  EXPECT_NEAR(seg->duration_s(), 3.0, 2 * p.hop_s);
  EXPECT_EQ(seg->audio.size(),
            static_cast<std::size_t>(std::llround(seg->duration_s() * 16000)));
}

TEST(Segment, SilenceAndShortBurstYieldNone) {
  const ClipperParams p;
  EXPECT_FALSE(extract_event_segment(fixtures::silence(8.0), p).has_value());
  EXPECT_FALSE(extract_event_segment(fixtures::tone_fixture(3.0, 3.4), p).has_value());
}

TEST(Segment, TooLongIsRejected) {
  ClipperParams p;
  EXPECT_FALSE(extract_event_segment(fixtures::tone_fixture(0.5, 9.5, 10.0), p).has_value());
  p.max_dur_s = 9.5;
  EXPECT_TRUE(extract_event_segment(fixtures::tone_fixture(0.5, 9.5, 10.0), p).has_value());
}

TEST(Segment, ShortGapsAreBridgedLongGapsEndTheRun) {
  const ClipperParams p;  // merge_gap_s = 0.2
  AudioClip c = fixtures::silence(8.0);
  const double a = fixtures::dbfs_amplitude(-6.0) * std::sqrt(2.0);
  fixtures::add_tone(c, 1.0, 2.0, a);
  fixtures::add_tone(c, 2.15, 3.0, a);  // 0.15 s hole: bridged
  fixtures::add_tone(c, 4.0, 5.5, a);   // 1 s hole: second run, ignored
  const auto seg = extract_event_segment(c, p);
  ASSERT_TRUE(seg.has_value());
  EXPECT_NEAR(seg->onset_s, 1.0, p.hop_s + 1e-9);
  EXPECT_NEAR(seg->offset_s, 3.0, p.hop_s + 1e-9);
}

TEST(Segment, OnlyTheFirstRunCounts) {
  // A short first burst followed by a long event: the first run is too
  // short, so the clip yields nothing.
  AudioClip c = fixtures::silence(8.0);
  const double a = fixtures::dbfs_amplitude(-6.0) * std::sqrt(2.0);
  fixtures::add_tone(c, 0.5, 0.8, a);
  fixtures::add_tone(c, 3.0, 6.0, a);
  EXPECT_FALSE(extract_event_segment(c, ClipperParams{}).has_value());
}

TEST(Segment, ShiftingTheBurstShiftsTheOnset) {
  const ClipperParams p;
  const auto base = extract_event_segment(fixtures::tone_fixture(1.0, 3.0), p);
  ASSERT_TRUE(base);
  for (double shift : {0.37, 1.0, 2.63}) {
    const auto moved = extract_event_segment(fixtures::tone_fixture(1.0 + shift, 3.0 + shift), p);
    ASSERT_TRUE(moved);
    EXPECT_NEAR(moved->onset_s - base->onset_s, shift, p.hop_s + 1e-9);
  }
}

TEST(Segment, ActiveWindowsInsideRunAreAboveThreshold) {
  const ClipperParams p;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng r(seed);
    AudioClip c = fixtures::silence(8.0);
    const double on = r.uniform(0.2, 3.0);
    const double len = r.uniform(1.2, 4.0);
    fixtures::add_tone(c, on, on + len, r.uniform(0.2, 0.9));
    const auto seg = extract_event_segment(c, p);
    ASSERT_TRUE(seg);
    EXPECT_GE(seg->duration_s(), p.min_dur_s);
    EXPECT_LE(seg->duration_s(), p.max_dur_s);
    const auto env = energy_envelope(c, p.window_s, p.hop_s);
    const auto first = static_cast<std::size_t>(std::llround(seg->onset_s / p.hop_s));
    const auto last_end = static_cast<std::size_t>(std::llround(seg->offset_s * 16000));
    for (std::size_t i = first; i * env.hop_samples + env.window_samples <= last_end; ++i) {
      EXPECT_GE(env.window_db[i], p.threshold_db) << "seed " << seed << " window " << i;
    }
  }
}

TEST(Bank, OneAcceptedTwoRejected) {
  fixtures::TempDir dir;
  write_wav(fixtures::tone_fixture(), dir / "ok.wav");
  write_wav(fixtures::silence(8.0), dir / "silent.wav");
  write_wav(fixtures::tone_fixture(3.0, 3.4), dir / "short.wav");
  write_jsonl(dir / "in.jsonl", {Json{{"id", "ok"}, {"audio", "ok.wav"}, {"label", "beep"}},
                                 Json{{"id", "silent"}, {"audio", "silent.wav"}, {"label", "x"}},
                                 Json{{"id", "short"}, {"audio", "short.wav"}, {"label", "y"}}});
  const auto res = clip_event_bank(dir / "in.jsonl", dir / "out", ClipperParams{}, 2);
  ASSERT_EQ(res.events.size(), 1u);
  ASSERT_EQ(res.rejections.size(), 2u);
  EXPECT_EQ(res.events[0].id, "ok");
  EXPECT_EQ(res.events[0].label, "beep");
  EXPECT_EQ(res.rejections[0].source_id, "silent");
  EXPECT_EQ(res.rejections[0].reason, "no window above threshold");
  EXPECT_EQ(res.rejections[1].source_id, "short");
  EXPECT_NE(res.rejections[1].reason.find("too short"), std::string::npos);

  const auto rows = read_events(dir / "out" / "events.jsonl");
  ASSERT_EQ(rows.size(), 1u);
  const AudioClip cut = read_wav(dir / "out" / rows[0].audio);
  EXPECT_NEAR(cut.duration_s(), rows[0].duration_s, 1e-9);
  EXPECT_EQ(read_jsonl(dir / "out" / "rejections.jsonl").size(), 2u);

  // No randomness: a rerun produces the same bytes.
  const std::string first = fixtures::slurp(dir / "out" / "events.jsonl");
  clip_event_bank(dir / "in.jsonl", dir / "out", ClipperParams{}, 1);
  EXPECT_EQ(fixtures::slurp(dir / "out" / "events.jsonl"), first);
}

TEST(Bank, ErrorPaths) {
  fixtures::TempDir dir;
  write_jsonl(dir / "empty.jsonl", {});
  try {
    clip_event_bank(dir / "empty.jsonl", dir / "out", ClipperParams{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("no inputs"), std::string::npos);
  }
  write_jsonl(dir / "missing.jsonl", {Json{{"id", "a"}, {"audio", "nope.wav"}, {"label", "x"}}});
  EXPECT_THROW(clip_event_bank(dir / "missing.jsonl", dir / "out", ClipperParams{}), Error);

  // An unreadable file next to a readable one is skipped, not fatal.
  write_wav(fixtures::tone_fixture(), dir / "ok.wav");
  write_jsonl(dir / "mixed.jsonl", {Json{{"id", "a"}, {"audio", "nope.wav"}, {"label", "x"}},
                                    Json{{"id", "b"}, {"audio", "ok.wav"}, {"label", "y"}}});
  const auto res = clip_event_bank(dir / "mixed.jsonl", dir / "out", ClipperParams{});
  EXPECT_EQ(res.events.size(), 1u);
  ASSERT_EQ(res.rejections.size(), 1u);
  EXPECT_EQ(res.rejections[0].reason.rfind("unreadable", 0), 0u);
}

TEST(Bank, SampleRateMismatchIsRejected) {
  fixtures::TempDir dir;
  AudioClip c = fixtures::tone_fixture();
  c.sample_rate = 8000;
  write_wav(c, dir / "a.wav");
  write_wav(fixtures::tone_fixture(), dir / "b.wav");
  write_jsonl(dir / "in.jsonl", {Json{{"id", "a"}, {"audio", "a.wav"}, {"label", "x"}},
                                 Json{{"id", "b"}, {"audio", "b.wav"}, {"label", "y"}}});
  const auto res = clip_event_bank(dir / "in.jsonl", dir / "out", ClipperParams{});
  ASSERT_EQ(res.rejections.size(), 1u);
  EXPECT_NE(res.rejections[0].reason.find("sample rate"), std::string::npos);
}

TEST(Params, Validation) {
  ClipperParams p;
  p.hop_s = 0.2;  // window shorter than hop
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.min_dur_s = 8.0;
  EXPECT_THROW(p.validate(), Error);
}

TEST(Segment, OffGridOnsetsStayWithinOneHop) {
  // Onsets between hop boundaries used to snap to a window that is mostly
  // silence; the edge refinement keeps every case inside one hop.
  const ClipperParams p;
  for (double level : {-6.0, -14.0, -18.0}) {
    for (double on = 1.0; on < 1.05; on += 0.007) {
      AudioClip c = fixtures::silence(8.0);
      fixtures::add_tone(c, on, on + 2.0, fixtures::dbfs_amplitude(level) * std::sqrt(2.0));
      const auto seg = extract_event_segment(c, p);
      ASSERT_TRUE(seg) << level << " dB at " << on;
      EXPECT_LE(std::abs(seg->onset_s - on), p.hop_s + 1e-9) << level << " dB at " << on;
      EXPECT_LE(std::abs(seg->offset_s - (on + 2.0)), p.hop_s + 1e-9) << level << " dB at " << on;
    }
  }
}
