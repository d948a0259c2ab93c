#pragma once

#include <cstdint>

namespace golden {

struct PlanRow {
    int i;  // epsilon = 2^-i
    std::int64_t J, N, N0;
};

// Hand-derived from the published recipes, evaluated outside this code base and frozen.
inline constexpr PlanRow kPaper1dIntegral[] = {{2, 4, 768, 3072},    {3, 8, 1536, 5888},    {4, 16, 3072, 12288},
                                               {5, 32, 6400, 25600}, {6, 64, 13312, 53248}};
inline constexpr PlanRow kPaper1dSeries[] = {{2, 4, 1536, 5888},     {3, 8, 4608, 17664},    {4, 16, 13312, 53248},
                                             {5, 32, 39936, 159744}, {6, 64, 120064, 480000}};
inline constexpr PlanRow kPaper5dIntegral[] = {{2, 4, 201, 11210},    {3, 8, 473, 26442},    {4, 16, 1114, 62372},
                                               {5, 32, 2628, 147128}, {6, 64, 6198, 347056}};
inline constexpr PlanRow kPaper5dSeries[] = {{2, 4, 260, 14420},     {3, 8, 936, 52236},     {4, 16, 3380, 189240},
                                             {5, 32, 12244, 685568}, {6, 64, 44352, 2483668}};
inline constexpr PlanRow kPaperSmc[] = {{2, 4, 0, 4096},     {3, 8, 0, 16384},     {4, 16, 0, 65536},
                                        {5, 32, 0, 262144}, {6, 64, 0, 1048576}};

}  // namespace golden
