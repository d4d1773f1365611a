#include <gtest/gtest.h>

#include "evfish/detect.hpp"

using namespace evfish;

namespace {

void fill_rect(ModeFrame& f, int x0, int y0, int w, int h) {
  for (int y = y0; y < y0 + h; ++y) {
    for (int x = x0; x < x0 + w; ++x) f.at(x, y) = 255;
  }
}

}  // namespace

TEST(Blobs, EmptyFrame) { EXPECT_TRUE(detect_blobs(ModeFrame(Mode::binary, 32, 32)).empty()); }

TEST(Blobs, SingleSquare) {
  ModeFrame f(Mode::binary, 32, 32);
  fill_rect(f, 10, 20, 5, 5);
  const auto d = detect_blobs(f, 4, 5000, 7);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].frame, 7);
  EXPECT_EQ(d[0].box.w, 5);
  EXPECT_EQ(d[0].box.h, 5);
  // pixel i covers [i, i+1), so the square spans [10, 15) x [20, 25)
  EXPECT_DOUBLE_EQ(d[0].box.x, 12.5);
  EXPECT_DOUBLE_EQ(d[0].box.y, 22.5);
}

TEST(Blobs, ZeroColumnSeparatesSquares) {
  ModeFrame f(Mode::binary, 32, 32);
  fill_rect(f, 2, 2, 5, 5);
  fill_rect(f, 8, 2, 5, 5);
  EXPECT_EQ(detect_blobs(f, 4).size(), 2u);
}

TEST(Blobs, DiagonalTouchIsConnected) {
  ModeFrame f(Mode::binary, 16, 16);
  fill_rect(f, 0, 0, 3, 3);
  fill_rect(f, 3, 3, 3, 3);
  const auto d = detect_blobs(f, 1);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].box.w, 6);
}

TEST(Blobs, AreaFilter) {
  ModeFrame f(Mode::binary, 32, 32);
  fill_rect(f, 0, 0, 2, 2);    // 4
  fill_rect(f, 10, 10, 4, 4);  // 16
  fill_rect(f, 20, 20, 8, 8);  // 64
  const auto d = detect_blobs(f, 5, 20);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].box.w, 4);
  EXPECT_THROW(detect_blobs(f, 0, 10), InvariantViolation);
  EXPECT_THROW(detect_blobs(f, 10, 5), InvariantViolation);
}

TEST(Iou, Basics) {
  const Box a{5, 5, 10, 10};
  EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
  EXPECT_DOUBLE_EQ(iou(a, Box{50, 50, 10, 10}), 0.0);
  EXPECT_NEAR(iou(a, Box{10, 5, 10, 10}), 50.0 / 150.0, 1e-12);
}

TEST(DetectionCsv, FieldMapping) {
  const auto by = read_detections("frame,id,x,y,w,h,conf,class\n12,-1,100.5,200.0,30,10,0.98,target\n");
  ASSERT_EQ(by.size(), 1u);
  const auto& d = by.at(12).at(0);
  EXPECT_EQ(d.frame, 12);
  EXPECT_EQ(d.id, -1);
  EXPECT_EQ(d.box, (Box{100.5, 200.0, 30, 10}));
  EXPECT_DOUBLE_EQ(d.confidence, 0.98);
  EXPECT_EQ(d.cls, DetectionClass::target);
}

TEST(DetectionCsv, EmptyBodyAndRoundTrip) {
  EXPECT_TRUE(read_detections("frame,id,x,y,w,h,conf,class\n").empty());
  DetectionsByFrame by;
  by[0].push_back({0, -1, {1.25, 2.5, 3, 4}, 0.3, DetectionClass::target});
  by[0].push_back({0, 4, {0.1, 0.2, 0.30000000000000004, 7}, 1.0, DetectionClass::negative});
  by[9].push_back({9, 2, {1e-7, 123456.789, 1, 1}, 0.0, DetectionClass::target});
  const auto csv = write_detections(by);
  EXPECT_EQ(read_detections(csv), by);
  EXPECT_EQ(write_detections(read_detections(csv)), csv);
}

TEST(DetectionCsv, Errors) {
  const std::string head = "frame,id,x,y,w,h,conf,class\n";
  try {
    read_detections(head + "1,-1,1,1,1,1,1,target\n2,-1,zz,1,1,1,1,target\n", "d.csv");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("d.csv:3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(read_detections(head + "1,-1,1,1,0,1,1,target\n"), NegativeExtent);
  EXPECT_THROW(read_detections(head + "1,-1,1,1,1,-3,1,target\n"), NegativeExtent);
  EXPECT_THROW(read_detections(head + "1,-1,1,1,1,1,1,fish\n"), ParseError);
  EXPECT_THROW(read_detections(head + "1,-1,1,1,1,1,1.5,target\n"), ParseError);
  EXPECT_THROW(read_detections("x\n"), ParseError);
}

TEST(DetectionClass, NegativesDroppedBeforeTracking) {
  const std::vector<Detection> d{{0, -1, {}, 1, DetectionClass::negative}, {0, -1, {}, 1, DetectionClass::target}};
  EXPECT_EQ(targets_only(d).size(), 1u);
}
