#include "rdkg/errors.hpp"
#include "rdkg/lecture_space.hpp"

#include <gtest/gtest.h>

using namespace rdkg::lecture;

TEST(Markdown, HeadingTree) {
    const auto root = parse_markdown("# A\n\ntext a\n\n## B\n\ntext b\n\n# C\n");
    ASSERT_EQ(root.children.size(), 2u);
    EXPECT_EQ(root.title, kRootTitle);
    EXPECT_EQ(root.children[0].title, "A");
    ASSERT_EQ(root.children[0].children.size(), 1u);
    EXPECT_EQ(root.children[0].children[0].title, "B");
    EXPECT_EQ(root.children[1].title, "C");
    EXPECT_EQ(heading_count(root), 3u);
}

TEST(Markdown, SkippedLevelsAttachToNearestShallower) {
    const auto root = parse_markdown("# A\n### Deep\n## B\n");
    ASSERT_EQ(root.children.size(), 1u);
    ASSERT_EQ(root.children[0].children.size(), 2u);
    EXPECT_EQ(root.children[0].children[0].title, "Deep");
    EXPECT_EQ(root.children[0].children[1].title, "B");
}

TEST(Markdown, BlockKinds) {
    const auto root = parse_markdown(
        "# T\n\npara line one\ncontinues here\n\n- item one\n- item two\n\n```\ncode # not heading\n```\n\n$$\nx^2\n$$\n");
    const auto& b = root.children.at(0).blocks;
    ASSERT_EQ(b.size(), 5u);
    EXPECT_EQ(b[0].kind, BlockKind::Paragraph);
    EXPECT_EQ(b[0].line_begin, 3);
    EXPECT_EQ(b[0].line_end, 4);
    EXPECT_EQ(b[1].kind, BlockKind::ListItem);
    EXPECT_EQ(b[2].kind, BlockKind::ListItem);
    EXPECT_EQ(b[3].kind, BlockKind::Code);
    EXPECT_NE(b[3].text.find("code # not heading"), std::string::npos);
    EXPECT_EQ(b[4].kind, BlockKind::Math);
    EXPECT_EQ(heading_count(root), 1u);
}

TEST(Markdown, ClosingHashesAndPreamble) {
    const auto root = parse_markdown("intro text\n\n## Title ##\n");
    ASSERT_EQ(root.blocks.size(), 1u);
    EXPECT_EQ(root.children.at(0).title, "Title");
    EXPECT_EQ(root.children.at(0).level, 2);
}

TEST(Markdown, HashWithoutSpaceIsText) {
    const auto root = parse_markdown("#hashtag not a heading\n");
    EXPECT_EQ(heading_count(root), 0u);
    EXPECT_EQ(root.blocks.size(), 1u);
}

TEST(Markdown, EmptyInput) {
    EXPECT_THROW(parse_markdown(""), rdkg::InputError);
    EXPECT_THROW(parse_markdown(" \n\t\n"), rdkg::InputError);
}
