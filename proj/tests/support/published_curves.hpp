#pragma once

#include <array>

// Mean cv per matching threshold (0.0 ... 0.9) for the three cameras,
// read off the published calibration curves.
namespace driftwatch::testing::published {

inline constexpr std::array<double, 10> kThresholds{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

inline constexpr std::array<double, 10> kL515{
    0.00327517407551983, 0.00325033262370047, 0.00325517626842982, 0.00326472915063283, 0.00331264057668528,
    0.00338967829808426, 0.00352776074361386, 0.00374163534842254, 0.00399053854531363, 0.00467232784095282};

inline constexpr std::array<double, 10> kRgb1{
    0.00351391206298132, 0.00354361888576765, 0.00355410914752297, 0.00355294954649995, 0.00369996215973579,
    0.00387023610650721, 0.00448170808788852, 0.004806061345135,   0.00541936730004712, 0.00621786625701838};

inline constexpr std::array<double, 10> kRgb2{
    0.00375158730203256, 0.00382898306979017, 0.00383194967357647, 0.00373130992864695, 0.00383722079794274,
    0.00396350548442644, 0.0045654557768739,  0.00511034621820423, 0.00638459979932031, 0.00849033342359757};

}  // namespace driftwatch::testing::published
