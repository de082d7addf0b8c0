#include <gtest/gtest.h>

#include <random>
#include <set>

#include "fixtures.hpp"
#include "hidm/codec.hpp"
#include "oracles.hpp"

using namespace hidm;

namespace {

BitBlock word_bits(std::uint64_t w, std::size_t k) {
  BitBlock b(k);
  for (std::size_t i = 0; i < k; ++i) b[i] = (w >> (k - 1 - i)) & 1u;
  return b;
}

BitBlock random_bits(std::mt19937_64& rng, std::size_t k) {
  BitBlock b(k);
  for (auto& x : b) x = rng() & 1u;
  return b;
}

}  // namespace

TEST(Encode, SmallExampleZeroWord) {
  const auto s = build(fixture::small_example());
  EXPECT_EQ(encode(s, BitBlock(4, 0)), (AmplitudeBlock(8, 1)));
}

TEST(Encode, SmallExampleWordLayout) {
  const auto s = build(fixture::small_example());
  // Top bits 01 pick (D1, D2); D1 rank 1 = 1113, D2 rank 0 from the third bit.
  const auto out = encode(s, BitBlock{0, 1, 1, 0});
  EXPECT_EQ(out, (AmplitudeBlock{1, 1, 1, 3, 1, 1, 3, 1}));
}

TEST(Encode, RejectsWrongLength) {
  const auto s = build(fixture::small_example());
  EXPECT_THROW(encode(s, BitBlock(3, 0)), SizeError);
  EXPECT_THROW(decode(s, AmplitudeBlock(7, 1)), SizeError);
}

TEST(Codec, SmallExampleIsBijective) {
  const auto s = build(fixture::small_example());
  std::set<AmplitudeBlock> words;
  for (std::uint64_t w = 0; w < 16; ++w) {
    const auto bits = word_bits(w, 4);
    const auto amps = encode(s, bits);
    words.insert(amps);
    EXPECT_EQ(decode(s, amps), bits);
  }
  EXPECT_EQ(words.size(), 16u);
}

TEST(Decode, AllThreesIsNonCodeword) {
  const auto s = build(fixture::small_example());
  try {
    decode(s, AmplitudeBlock(8, 3));
    FAIL();
  } catch (const NonCodewordError& e) {
    EXPECT_EQ(e.layer(), 0u);
    EXPECT_EQ(e.block(), 0u);
  }
}

TEST(Decode, ForeignAmplitudeIsNonCodeword) {
  const auto s = build(fixture::small_example());
  AmplitudeBlock w(8, 1);
  w[5] = 5;
  try {
    decode(s, w);
    FAIL();
  } catch (const NonCodewordError& e) {
    EXPECT_EQ(e.block(), 1u);
  }
}

TEST(Codec, ExhaustiveRoundTripOnCorpus) {
  for (const auto& v : oracle::random_corpus(3, 8, 16)) {
    const auto s = build(v);
    std::set<AmplitudeBlock> words;
    for (std::uint64_t w = 0; w < (std::uint64_t{1} << v.total_bits); ++w) {
      const auto bits = word_bits(w, v.total_bits);
      const auto amps = encode(s, bits);
      ASSERT_EQ(amps.size(), v.block_length);
      ASSERT_EQ(decode(s, amps), bits);
      words.insert(amps);
    }
    EXPECT_EQ(words.size(), std::size_t{1} << v.total_bits);
  }
}

TEST(Codec, RandomRoundTripLargeStructures) {
  std::mt19937_64 rng(2024);
  for (const auto& v : {fixture::rate_half_optimum(), fixture::rate_three_quarter_seven_layer()}) {
    const auto s = build(v);
    for (int i = 0; i < 20000; ++i) {
      const auto bits = random_bits(rng, v.total_bits);
      const auto amps = encode(s, bits);
      ASSERT_EQ(amps.size(), v.block_length);
      ASSERT_EQ(decode(s, amps), bits);
    }
  }
}

TEST(Codec, SingleCorruptionNeverSilent) {
  std::mt19937_64 rng(77);
  const auto s = build(fixture::rate_half_optimum());
  for (int i = 0; i < 2000; ++i) {
    const auto bits = random_bits(rng, 44);
    auto amps = encode(s, bits);
    const std::size_t pos = rng() % amps.size();
    amps[pos] = amps[pos] == 1 ? 3 : 1;
    try {
      const auto back = decode(s, amps);
      EXPECT_NE(back, bits);
      EXPECT_EQ(encode(s, back), amps);
    } catch (const NonCodewordError&) {
    }
  }
}

TEST(Streams, PackingIsMsbFirst) {
  const std::vector<std::uint8_t> bytes{0xA5, 0x01};
  const auto bits = unpack_bits(bytes);
  EXPECT_EQ(bits, (std::vector<std::uint8_t>{1, 0, 1, 0, 0, 1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 1}));
  EXPECT_EQ(pack_bits(bits), bytes);
  EXPECT_THROW(pack_bits(std::vector<std::uint8_t>(5, 1)), SizeError);
}

TEST(Streams, ConcatenationOfBlocks) {
  const auto s = build(fixture::small_example());
  const std::vector<std::uint8_t> packed{0x6F, 0x30};
  const auto amps = encode_stream(s, packed);
  ASSERT_EQ(amps.size(), 32u);
  const auto bits = unpack_bits(packed);
  for (std::size_t b = 0; b < 4; ++b) {
    const auto block = encode(s, std::span<const std::uint8_t>(bits).subspan(b * 4, 4));
    EXPECT_TRUE(std::equal(block.begin(), block.end(), amps.begin() + static_cast<std::ptrdiff_t>(b * 8)));
  }
  EXPECT_EQ(decode_stream(s, amps), packed);
}

TEST(Streams, PartialBlocksRejected) {
  const auto s = build(fixture::rate_half_optimum());
  EXPECT_THROW(encode_stream(s, std::vector<std::uint8_t>(5, 0)), SizeError);
  EXPECT_THROW(decode_stream(s, std::vector<std::uint8_t>(87, 1)), SizeError);
}

TEST(Streams, NonCodewordReportsWord) {
  const auto s = build(fixture::small_example());
  auto amps = encode_stream(s, std::vector<std::uint8_t>{0x12, 0x34});
  std::fill(amps.begin() + 16, amps.begin() + 24, std::uint8_t{3});
  try {
    decode_stream(s, amps);
    FAIL();
  } catch (const StreamNonCodeword& e) {
    EXPECT_EQ(e.word(), 2u);
  }
}
