#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "qgd/checkpoint.hpp"

using namespace qgd;

TEST(Checkpoint, BitExactRoundTrip) {
  for (const Activation a : {Activation::relu(), Activation::elu(0.7), Activation::identity()}) {
    Mlp m = init_mlp({24, 17, 5, 1}, a, 77);
    m.layers[1].weights(0, 0) = 1.0 / 3.0;
    m.layers[2].bias[0] = -1e-300;
    const Mlp back = checkpoint_from_string(checkpoint_to_string(m));
    EXPECT_EQ(back.checksum(), m.checksum());
    EXPECT_EQ(back.layer_sizes, m.layer_sizes);
    EXPECT_EQ(back.activation, m.activation);
    EXPECT_EQ(back.seed, m.seed);
    EXPECT_EQ(back.activate_output, m.activate_output);
    EXPECT_EQ(checkpoint_to_string(back), checkpoint_to_string(m));
  }
}

TEST(Checkpoint, TruncatedNetKeepsOutputActivation) {
  const Mlp m = truncate_at_neuron(init_mlp({24, 6, 6, 1}, Activation::relu(), 1), {2, 4});
  const Mlp back = checkpoint_from_string(checkpoint_to_string(m));
  EXPECT_TRUE(back.activate_output);
  EXPECT_EQ(back.checksum(), m.checksum());
}

TEST(Checkpoint, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "qgd_checkpoint_test.ckpt";
  const Mlp m = init_mlp({24, 3, 1}, Activation::relu(), 4);
  save_checkpoint(path, m);
  EXPECT_EQ(load_checkpoint(path).checksum(), m.checksum());
  std::filesystem::remove(path);
  EXPECT_THROW(load_checkpoint(path), CheckpointError);
}

TEST(Checkpoint, RejectsCorruptInput) {
  const std::string good = checkpoint_to_string(init_mlp({24, 3, 1}, Activation::relu(), 4));
  EXPECT_THROW(checkpoint_from_string("garbage"), CheckpointError);
  EXPECT_THROW(checkpoint_from_string(good.substr(0, good.size() / 2)), CheckpointError);
  std::string bad_version = good;
  bad_version.replace(bad_version.find(" 1"), 2, " 9");
  EXPECT_THROW(checkpoint_from_string(bad_version), CheckpointError);
}
