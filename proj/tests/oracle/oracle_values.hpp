#pragma once

// Generated by tests/oracle/oracle.py; do not edit.

namespace oracle {

inline constexpr double kSecureFractionE0 = 0.60063395727698445;
inline constexpr double kSecureFractionE0Default = 0.6004;
inline constexpr double kSecureFractionE032 = 0.10663585807405087;
inline constexpr double kBinaryEntropy032 = 0.20432467098027956;
inline constexpr double kDbmAt25kPhotons = -24.945950567810951;
inline constexpr double kDbmAtOnePhoton = -68.925350654531327;
inline constexpr double kDbmDoubling = 3.010299956639812;
inline constexpr double kPhotonsAtMinus25Dbm = 24690.794532707163;
inline constexpr double kCcrEstLinkDark = 0.00012134465962305567;
inline constexpr double kCcrEstDefault = 5.01e-5;
inline constexpr double kCcrEstDarkInflated = 0.00105;
inline constexpr double kAttackFractionHalf = 0.4999749987499375;
inline constexpr double kPairZ2000To0 = 44.721359549995794;
inline constexpr double kPairZ1030To970 = 1.3416407864998738;
inline constexpr double kClickProbLambda1e3 = 0.00099950016662500833;
inline constexpr double kEveClickProbMu02 = 0.18126924692201814;
inline constexpr double kSaturatedRateCps = 1.9386616485886378e+7;
inline constexpr double kMziUnequalPort1 = 1.6623727640744223;
inline constexpr double kMziUnequalPort2 = 0.33762723592557766;

}  // namespace oracle
