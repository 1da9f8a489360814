#include <gtest/gtest.h>

#include <cstring>

#include "support/toy_data.hpp"
#include "tabsynth/checkpoint.hpp"
#include "tabsynth/errors.hpp"

namespace tabsynth {
namespace {

Checkpoint trained(std::uint64_t seed) {
  TrainConfig c;
  c.iterations = 20;
  c.num_timesteps = 20;
  c.num_layers = 2;
  c.layer_width = 32;
  c.batch_size = 32;
  c.seed = seed;
  return fit(testing::toy_mixture(200, seed), c).checkpoint;
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const Checkpoint ck = trained(3);
  const std::string bytes = serialize_checkpoint(ck);
  EXPECT_EQ(bytes.substr(0, 4), "TBDD");
  const Checkpoint back = deserialize_checkpoint(bytes);
  const auto a = ck.model.parameters();
  const auto b = back.model.parameters();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i]->size(), b[i]->size());
    EXPECT_EQ(std::memcmp(a[i]->data(), b[i]->data(), sizeof(float) * std::size_t(a[i]->size())), 0);
  }
  EXPECT_EQ(serialize_checkpoint(back), bytes);
  EXPECT_TRUE(back.preprocess.schema().same_layout(ck.preprocess.schema()));
  EXPECT_EQ(back.schedule.alpha_bar(), ck.schedule.alpha_bar());
  EXPECT_EQ(back.train_class_counts, ck.train_class_counts);
  EXPECT_EQ(back.config.seed, 3u);
}

TEST(Checkpoint, SamplingAfterReloadMatches) {
  const Checkpoint ck = trained(5);
  const Checkpoint back = deserialize_checkpoint(serialize_checkpoint(ck));
  SampleOptions o;
  o.num_rows = 50;
  o.seed = 8;
  EXPECT_EQ(to_csv(sample(ck, o)), to_csv(sample(back, o)));
}

TEST(Checkpoint, VersionMismatchRejected) {
  std::string bytes = serialize_checkpoint(trained(1));
  bytes[4] = 9;
  try {
    deserialize_checkpoint(bytes);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
}

TEST(Checkpoint, CorruptInputRejected) {
  const std::string bytes = serialize_checkpoint(trained(1));
  EXPECT_THROW(deserialize_checkpoint("XXXX"), DataError);
  EXPECT_THROW(deserialize_checkpoint(bytes.substr(0, bytes.size() / 2)), DataError);
  EXPECT_THROW(deserialize_checkpoint(bytes + "x"), DataError);
}

}  // namespace
}  // namespace tabsynth
