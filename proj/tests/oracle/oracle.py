#!/usr/bin/env python3
"""Reference values computed with mpmath, independent of the C++ code.

Usage:
  oracle.py              print the C++ header
  oracle.py --check FILE exit 1 unless FILE matches the printed header
"""
import sys

import mpmath as mp

mp.mp.dps = 40

H = mp.mpf("6.62607015e-34")
C = mp.mpf("299792458")


def h2(e):
    e = mp.mpf(e)
    if e == 0 or e == 1:
        return mp.mpf(0)
    return -e * mp.log(e, 2) - (1 - e) * mp.log(1 - e, 2)


def secure_fraction(mu, eta_t, e, f, delta_ccr):
    mu, eta_t, e, f = (mp.mpf(x) for x in (mu, eta_t, e, f))
    tau = -mp.log(1 - e**2 - (1 - 6 * e) ** 2 / 2, 2)
    return (1 - 2 * mu * (1 - eta_t)) * tau - f * h2(e) - mp.mpf(delta_ccr)


def dbm(photons, clock_hz, wavelength_nm):
    energy = H * C / (mp.mpf(wavelength_nm) * mp.mpf("1e-9"))
    watts = mp.mpf(photons) * mp.mpf(clock_hz) * energy
    return 10 * mp.log10(watts / mp.mpf("1e-3"))


def photons(dbm_value, clock_hz, wavelength_nm):
    energy = H * C / (mp.mpf(wavelength_nm) * mp.mpf("1e-9"))
    watts = mp.mpf("1e-3") * mp.power(10, mp.mpf(dbm_value) / 10)
    return watts / (mp.mpf(clock_hz) * energy)


def ccr_est(mu, t, eta, d):
    return mp.mpf(mu) * mp.mpf(t) * mp.mpf(eta) / 4 + mp.mpf(d)


def attack_fraction(ccr_exp, est):
    x = (mp.mpf(ccr_exp) - mp.mpf(est)) / (1 - mp.mpf(est))
    return min(max(x, mp.mpf(0)), mp.mpf(1))


def z(a, b):
    return abs(mp.mpf(a) - b) / mp.sqrt(mp.mpf(a) + b)


def renewal_rate(lam_eta, dead, clock_hz):
    # Click with probability p in each Ready slot, then `dead` blind slots.
    p = 1 - mp.exp(-mp.mpf(lam_eta))
    return mp.mpf(clock_hz) / (dead + 1 / p)


def mzi_ports(a, b, dphi):
    # |sqrt(a) e^{i dphi} +- sqrt(b)|^2 / 4 with complex arithmetic.
    cur = mp.sqrt(a) * mp.expj(dphi)
    prev = mp.sqrt(b)
    return abs(cur + prev) ** 2 / 4, abs(cur - prev) ** 2 / 4


T_LINK = mp.power(10, mp.mpf(-18) / 10)
T_DEFAULT = mp.power(10, mp.mpf(-20) / 10)

VALUES = [
    ("kSecureFractionE0", secure_fraction("0.2", T_LINK * mp.mpf("0.1"), 0, "1.16", 0)),
    ("kSecureFractionE0Default", secure_fraction("0.2", T_DEFAULT * mp.mpf("0.1"), 0, "1.16", 0)),
    ("kSecureFractionE032",
     secure_fraction("0.2", T_LINK * mp.mpf("0.1"), "0.032", "1.16", "9e-5")),
    ("kBinaryEntropy032", h2("0.032")),
    ("kDbmAt25kPhotons", dbm("2.5e4", "1e9", "1551")),
    ("kDbmAtOnePhoton", dbm(1, "1e9", "1551")),
    ("kDbmDoubling", dbm(2, "1e9", "1551") - dbm(1, "1e9", "1551")),
    ("kPhotonsAtMinus25Dbm", photons(-25, "1e9", "1551")),
    ("kCcrEstLinkDark", ccr_est("0.2", T_LINK, "0.1", "4.21e-5")),
    ("kCcrEstDefault", ccr_est("0.2", T_DEFAULT, "0.1", "1e-7")),
    ("kCcrEstDarkInflated", ccr_est("0.2", T_DEFAULT, "0.1", "1e-3")),
    ("kAttackFractionHalf", attack_fraction("0.5", "5e-5")),
    ("kPairZ2000To0", z(2000, 0)),
    ("kPairZ1030To970", z(1030, 970)),
    ("kClickProbLambda1e3", 1 - mp.exp(mp.mpf("-0.001"))),
    ("kEveClickProbMu02", 1 - mp.exp(mp.mpf("-0.2"))),
    ("kSaturatedRateCps", renewal_rate(1, 50, "1e9")),
    ("kMziUnequalPort1", mzi_ports(mp.mpf(3), mp.mpf(1), mp.mpf("0.7"))[0]),
    ("kMziUnequalPort2", mzi_ports(mp.mpf(3), mp.mpf(1), mp.mpf("0.7"))[1]),
]


def header():
    lines = [
        "#pragma once",
        "",
        "// Generated by tests/oracle/oracle.py; do not edit.",
        "",
        "namespace oracle {",
        "",
    ]
    for name, value in VALUES:
        lines.append(f"inline constexpr double {name} = {mp.nstr(value, 17, min_fixed=-5, max_fixed=5)};")
    lines += ["", "}  // namespace oracle", ""]
    return "\n".join(lines)


def main(argv):
    text = header()
    if len(argv) == 3 and argv[1] == "--check":
        with open(argv[2], encoding="utf-8") as f:
            if f.read() != text:
                print(f"{argv[2]} is stale; regenerate with oracle.py", file=sys.stderr)
                return 1
        print("oracle values match")
        return 0
    sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
