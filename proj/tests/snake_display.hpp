#pragma once

#include <string>
#include <vector>

// Truncated snake matrix for n1 = (4,3,2), n2 = (3,2), L = 27: '.' zero, '*' entry, '1' unit.
inline const std::vector<std::string> kExpectedSnake27 = {
    "*1.........................",
    "**1........................",
    ".**1.......................",
    "..*******1.................",
    "..********.................",
    "..********.................",
    "....*********1.............",
    "....**********.............",
    "....************1..........",
    ".......**********..........",
    ".......**********..........",
    ".........********..........",
    ".........*********1........",
    ".........**********........",
    "............*******........",
    "............**********1....",
    "..............*********....",
    "..............***********1.",
    "..............************.",
    ".................*********.",
    ".................*********.",
    "...................********",
    "...................********",
    "...................********",
    "......................*****",
    "......................*****",
    "........................***",
};
