#include <gtest/gtest.h>

#include "bbill/io.hpp"
#include "support.hpp"

using namespace bbill;

TEST(Io, ProfileRoundTrip) {
  const RadiusProfile p(9000.0, {{1, 0.05}, {5, -0.01}});
  const auto q = profile_from_json(profile_to_json(p));
  EXPECT_EQ(p, q);
  EXPECT_EQ(parse_profile(R"({"mean":1,"harmonics":[]})"), RadiusProfile::constant(1.0));
  EXPECT_EQ(parse_profile(R"({"mean":2})"), RadiusProfile::constant(2.0));
}

TEST(Io, MalformedProfiles) {
  EXPECT_THROW(parse_profile("{"), PreconditionError);
  EXPECT_THROW(parse_profile(R"({"harmonics":[]})"), PreconditionError);
  EXPECT_THROW(parse_profile(R"({"mean":1,"harmonics":[[1.5,0.1]]})"), PreconditionError);
  EXPECT_THROW(parse_profile(R"({"mean":1,"harmonics":[[1]]})"), PreconditionError);
  EXPECT_THROW(parse_profile(R"({"mean":1,"harmonics":[[1,2]]})"), PreconditionError);
}

TEST(Io, VerdictJsonHandlesInfinity) {
  const auto j = verdict_to_json(classify(RadiusProfile::constant(1.0), 0.5));
  EXPECT_EQ(j["class"], "R");
  EXPECT_TRUE(j["bounds"]["sigma"].is_null());
  EXPECT_NO_THROW({ const auto back = json::parse(j.dump()); EXPECT_EQ(back, j); });
}

TEST(Io, CertificateSerializationIsReproducible) {
  const RadiusProfile p(9000.0, {{1, 0.05}});
  const auto a = certificate_to_json(certify(p, 0.5, 1.0)).dump();
  const auto b = certificate_to_json(certify(p, 0.5, 1.0)).dump();
  EXPECT_EQ(a, b);
  const auto j = json::parse(a);
  EXPECT_EQ(j["verdict"], "certified");
  EXPECT_EQ(profile_from_json(j["profile"]), p);
}
