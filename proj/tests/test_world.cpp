#include <gtest/gtest.h>

#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "panonav/error.hpp"
#include "panonav/world.hpp"
#include "panonav/world_gen.hpp"

using namespace panonav;
using oracles::open_box;
using oracles::simple_world;

namespace {

GridWorld box_world(int w = 9, int h = 7) {
  return simple_world(open_box(w, h), {{"sofa", {2, 2}, 0}}, {{4, 3}, 0, 0}, "sofa");
}

}  // namespace

TEST(WorldStep, MoveAheadFollowsSnappedHeading) {
  GridWorld w = box_world();
  auto [p1, o1] = w.step({{4, 3}, 0, 0}, Action::MoveAhead);
  EXPECT_TRUE(o1.moved);
  EXPECT_EQ(p1.cell, (Cell{5, 3}));
  auto [p2, o2] = w.step({{4, 3}, 30, 0}, Action::MoveAhead);  // snaps to +x
  EXPECT_EQ(p2.cell, (Cell{5, 3}));
  auto [p3, o3] = w.step({{4, 3}, 60, 0}, Action::MoveAhead);  // snaps to +y
  EXPECT_EQ(p3.cell, (Cell{4, 4}));
  auto [p4, o4] = w.step({{4, 3}, 270, 0}, Action::MoveAhead);
  EXPECT_EQ(p4.cell, (Cell{4, 2}));
}

TEST(WorldStep, BlockedMoveKeepsPose) {
  GridWorld w = box_world();
  Pose at_wall{{7, 3}, 0, 0};
  auto [p, o] = w.step(at_wall, Action::MoveAhead);
  EXPECT_TRUE(o.blocked);
  EXPECT_FALSE(o.moved);
  EXPECT_EQ(p, at_wall);
}

TEST(WorldStep, TurnsRotateInThirtyDegreeSteps) {
  GridWorld w = box_world();
  Pose p{{4, 3}, 0, 0};
  p = w.step(p, Action::TurnLeft).first;
  EXPECT_EQ(p.heading, 30);
  p = w.step(p, Action::TurnRight).first;
  p = w.step(p, Action::TurnRight).first;
  EXPECT_EQ(p.heading, 330);
}

TEST(WorldStep, PitchClampsAtLimits) {
  GridWorld w = box_world();
  Pose p{{4, 3}, 0, 0};
  p = w.step(p, Action::LookUp).first;
  EXPECT_EQ(p.pitch, 30);
  auto [p2, o2] = w.step(p, Action::LookUp);
  EXPECT_EQ(p2.pitch, 30);
  p = w.step(p, Action::LookDown).first;
  p = w.step(p, Action::LookDown).first;
  EXPECT_EQ(p.pitch, -30);
  EXPECT_EQ(w.step(p, Action::LookDown).first.pitch, -30);
}

TEST(WorldStep, StopReportsStoppedAndHoldsStill) {
  GridWorld w = box_world();
  Pose p{{4, 3}, 90, 0};
  auto [q, o] = w.step(p, Action::Stop);
  EXPECT_TRUE(o.stopped);
  EXPECT_EQ(q, p);
}

TEST(WorldValidate, RejectsMalformedGrids) {
  auto rows = open_box(7, 5);
  auto objects = std::vector<ObjectInstance>{{"sofa", {2, 2}, 0}};
  Pose start{{3, 2}, 0, 0};

  auto ragged = rows;
  ragged[2] = "#.#";
  EXPECT_THROW(simple_world(ragged, objects, start, "sofa"), Error);

  auto open_edge = rows;
  open_edge[0][3] = '.';
  EXPECT_THROW(simple_world(open_edge, objects, start, "sofa"), Error);

  auto bad_char = rows;
  bad_char[2][3] = 'x';
  EXPECT_THROW(simple_world(bad_char, objects, start, "sofa"), Error);

  EXPECT_THROW(simple_world(rows, {{"sofa", {0, 0}, 0}}, start, "sofa"), Error);
  EXPECT_THROW(simple_world(rows, objects, {{0, 0}, 0, 0}, "sofa"), Error);
  EXPECT_THROW(simple_world(rows, objects, {{3, 2}, 45, 0}, "sofa"), Error);
  EXPECT_THROW(simple_world(rows, objects, start, ""), Error);
}

TEST(WorldValidate, RejectsBrokenRoomPartitions) {
  auto rows = open_box(7, 5);
  Pose start{{3, 2}, 0, 0};

  Room partial{0, "kitchen", {{1, 1}, {2, 1}}};
  EXPECT_THROW(GridWorld(rows, 0.25, {partial}, {}, start, "sofa"), Error);

  Room dup_a{0, "kitchen", oracles::free_cells(rows)};
  Room dup_b{1, "office", {{1, 1}}};
  EXPECT_THROW(GridWorld(rows, 0.25, {dup_a, dup_b}, {}, start, "sofa"), Error);

  std::vector<Cell> disconnected{{1, 1}, {3, 3}};
  Room frag{0, "kitchen", disconnected};
  EXPECT_THROW(GridWorld(rows, 0.25, {frag}, {}, start, "sofa"), Error);

  Room all{0, "kitchen", oracles::free_cells(rows)};
  EXPECT_THROW(GridWorld(rows, 0.25, {all}, {{"sofa", {2, 2}, 7}}, start, "sofa"), Error);
}

TEST(WorldSerialize, RoundTripsByteExactly) {
  GridWorld w = generate_world(12, {}, PriorTable::builtin());
  std::string bytes = w.serialize();
  GridWorld again = GridWorld::parse(bytes);
  EXPECT_EQ(again.serialize(), bytes);
  EXPECT_EQ(again.content_hash(), w.content_hash());
}

TEST(WorldSerialize, HashChangesWithContent) {
  GridWorld a = box_world();
  GridWorld b = simple_world(open_box(9, 7), {{"sofa", {2, 3}, 0}}, {{4, 3}, 0, 0}, "sofa");
  EXPECT_NE(a.content_hash(), b.content_hash());
}

TEST(WorldSerialize, RejectsGarbage) {
  EXPECT_THROW(GridWorld::parse("not json"), Error);
  EXPECT_THROW(GridWorld::parse("{\"version\": 2}"), Error);
  EXPECT_THROW(GridWorld::load("/nonexistent/world.json"), Error);
}

TEST(WorldDistance, FieldMatchesBreadthFirstSearch) {
  std::vector<std::string> rows{
      "#########",
      "#.......#",
      "#..##...#",
      "#.......#",
      "#...#...#",
      "#.......#",
      "#########",
  };
  GridWorld w = simple_world(rows, {{"sofa", {1, 1}, 0}}, {{1, 5}, 0, 0}, "sofa");
  for (Cell src : {Cell{1, 1}, Cell{7, 5}, Cell{4, 3}}) {
    auto field = w.distance_field({src});
    auto expected = oracles::bfs_hops(w, {src});
    EXPECT_EQ(field, expected) << "source " << src.x << "," << src.y;
  }
  auto multi = w.distance_field({{1, 1}, {7, 5}});
  EXPECT_EQ(multi, oracles::bfs_hops(w, {{1, 1}, {7, 5}}));
}

TEST(WorldDistance, GeneratedWorldsAgreeWithBfs) {
  for (uint64_t seed : {3u, 4u, 5u}) {
    GridWorld w = generate_world(seed, {}, PriorTable::builtin());
    Cell src = w.start().cell;
    EXPECT_EQ(w.distance_field({src}), oracles::bfs_hops(w, {src}));
  }
}

TEST(WorldDistance, KnownPathLength) {
  GridWorld w = simple_world(open_box(7, 5), {{"sofa", {5, 3}, 0}}, {{1, 1}, 0, 0}, "sofa");
  auto len = w.shortest_path_length({1, 1}, {5, 3});
  ASSERT_TRUE(len.has_value());
  EXPECT_DOUBLE_EQ(*len, 6 * 0.25);
  auto dts = w.distance_to_nearest({1, 1}, "sofa");
  ASSERT_TRUE(dts.has_value());
  EXPECT_DOUBLE_EQ(*dts, 1.5);
  EXPECT_THROW(w.distance_to_nearest({1, 1}, "piano"), Error);
}

TEST(WorldLineOfSight, WallsAndCornersBlock) {
  std::vector<std::string> rows{
      "#####",
      "#.#.#",
      "#...#",
      "#...#",
      "#####",
  };
  GridWorld w = simple_world(rows, {{"sofa", {1, 1}, 0}}, {{1, 2}, 0, 0}, "sofa");
  EXPECT_TRUE(w.line_of_sight({1, 2}, {3, 2}));
  EXPECT_FALSE(w.line_of_sight({1, 1}, {3, 1}));  // wall directly between
  EXPECT_FALSE(w.line_of_sight({1, 1}, {3, 3}));  // grazes the corner of (2,1)
  EXPECT_TRUE(w.line_of_sight({1, 2}, {3, 3}));
}

TEST(WorldGen, DeterministicForASeed) {
  GeneratorParams p;
  GridWorld a = generate_world(77, p, PriorTable::builtin());
  GridWorld b = generate_world(77, p, PriorTable::builtin());
  EXPECT_EQ(a.serialize(), b.serialize());
  GridWorld c = generate_world(78, p, PriorTable::builtin());
  EXPECT_NE(c.serialize(), a.serialize());
}

TEST(WorldGen, ProducesRequestedStructure) {
  GeneratorParams p;
  for (uint64_t seed = 1; seed <= 12; ++seed) {
    GridWorld w = generate_world(seed, p, PriorTable::builtin());
    EXPECT_EQ(static_cast<int>(w.rooms().size()), p.rooms);
    EXPECT_FALSE(w.category_cells("sofa").empty());
    EXPECT_TRUE(w.free(w.start().cell));
    EXPECT_EQ(w.start().heading % 30, 0);
    auto d = w.distance_to_nearest(w.start().cell, w.target_category());
    ASSERT_TRUE(d.has_value());
    EXPECT_GT(*d, 1.0);
  }
}

TEST(WorldGen, DeceptiveLayoutMisleadsThePrior) {
  PriorTable priors = PriorTable::builtin();
  GeneratorParams p;
  p.deceptive = true;
  p.target = "bed";
  for (uint64_t seed = 1; seed <= 8; ++seed) {
    GridWorld w = generate_world(seed, p, priors);
    int start_room = w.room_id_at(w.start().cell);
    EXPECT_EQ(w.room(start_room).type, priors.deceptive_room_for("bed"));
    auto beds = w.category_cells("bed");
    ASSERT_EQ(beds.size(), 1u);
    EXPECT_NE(w.room_id_at(beds[0]), start_room);
    auto d = w.distance_to_nearest(w.start().cell, "bed");
    ASSERT_TRUE(d.has_value());
    EXPECT_GT(*d, 1.0);
  }
}

TEST(WorldGen, ImpossibleParametersFail) {
  GeneratorParams p;
  p.width = 9;
  p.height = 9;
  p.rooms = 10;
  EXPECT_THROW(generate_world(1, p, PriorTable::builtin()), Error);
  GeneratorParams bad;
  bad.rooms = 0;
  EXPECT_THROW(generate_world(1, bad, PriorTable::builtin()), Error);
  GeneratorParams tiny;
  tiny.width = 5;
  EXPECT_THROW(generate_world(1, tiny, PriorTable::builtin()), Error);
}
