#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "switchsim/angles.hpp"
#include "switchsim/descriptor.hpp"
#include "switchsim/detection_sim.hpp"
#include "switchsim/errors.hpp"

using namespace switchsim;

namespace {

ExperimentDescriptor preset_descriptor(Preset preset) {
    ExperimentDescriptor desc;
    desc.preset = preset;
    return desc;
}

} // namespace

TEST_CASE("source and scan validation") {
    SourceConfig cfg;
    cfg.rep_rate = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = SourceConfig{};
    cfg.dwell_time = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = SourceConfig{};
    cfg.rep_rate = 10.0;
    cfg.dwell_time = 0.05;   // below one pulse per dwell
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = SourceConfig{};
    cfg.det1_efficiency = 1.2;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = SourceConfig{};
    cfg.dark_rate_1 = cfg.rep_rate * 2.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    ScanSpec spec;
    spec.delay_step_um = 0.0;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec = ScanSpec{};
    spec.n_steps = 1;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec = ScanSpec{};
    spec.n_steps = 10;   // 0.36 um span, under three fringes
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

    spec = ScanSpec{};
    CHECK(spec.delay_at(3) == doctest::Approx(0.12).epsilon(1e-12));
    CHECK(spec.phi_ref_at(3) == doctest::Approx(two_pi * 0.12 / 0.810).epsilon(1e-12));
}

TEST_CASE("a dead source with no noise never clicks") {
    SourceConfig cfg;
    cfg.switch_params = SwitchParams{0.0, 0.0, 0.0, 0.0, 0.9};
    PulseProbabilities p = per_pulse_probabilities(cfg, 0.3);
    CHECK(p.p_none == 1.0);
    CHECK(p.p_d1_only == 0.0);
    CHECK(p.p_d2_only == 0.0);
    CHECK(p.p_both == 0.0);
}

TEST_CASE("dark counts alone follow the independent two-detector formula") {
    SourceConfig cfg;
    cfg.switch_params = SwitchParams{0.0, 0.0, 0.0, 0.0, 0.9};
    cfg.dark_rate_1 = 100.0;
    cfg.dark_rate_2 = 50.0;
    double d1 = 100.0 / cfg.rep_rate, d2 = 50.0 / cfg.rep_rate;
    PulseProbabilities p = per_pulse_probabilities(cfg, 0.0);
    CHECK(p.p_both == doctest::Approx(d1 * d2).epsilon(1e-12));
    CHECK(p.p_d1_only == doctest::Approx(d1 * (1.0 - d2)).epsilon(1e-12));
    CHECK(p.p_d2_only == doctest::Approx((1.0 - d1) * d2).epsilon(1e-12));
    CHECK(p.p_none == doctest::Approx((1.0 - d1) * (1.0 - d2)).epsilon(1e-12));
}

TEST_CASE("the accidental floor is a correlated coincidence source") {
    SourceConfig cfg;
    cfg.switch_params = SwitchParams{0.0, 0.0, 0.0, 0.0, 0.9};
    cfg.accidental_floor = 4000.0;
    PulseProbabilities p = per_pulse_probabilities(cfg, 0.0);
    CHECK(p.p_both == doctest::Approx(4000.0 / cfg.rep_rate).epsilon(1e-12));
    CHECK(p.p_d1_only == 0.0);
    CHECK(p.p_d2_only == 0.0);
}

TEST_CASE("per-pulse probabilities are a distribution with consistent marginals") {
    for (Preset preset : {Preset::small, Preset::large}) {
        SourceConfig cfg = preset_descriptor(preset).source_config(deg_to_rad(95.0));
        for (double phi : {0.0, 0.9, 2.4, 4.4, 5.9}) {
            PulseProbabilities p = per_pulse_probabilities(cfg, phi);
            for (double v : {p.p_none, p.p_d1_only, p.p_d2_only, p.p_both}) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
            CHECK(p.p_none + p.p_d1_only + p.p_d2_only + p.p_both ==
                  doctest::Approx(1.0).epsilon(1e-12));
            CHECK(p.p_d1 == doctest::Approx(p.p_both + p.p_d1_only).epsilon(1e-12));
            CHECK(p.p_d2 == doctest::Approx(p.p_both + p.p_d2_only).epsilon(1e-12));
            CHECK(p.p_both <= p.p_d1 + 1e-15);
            CHECK(p.p_both <= p.p_d2 + 1e-15);
        }
    }
}

TEST_CASE("an out-of-region conditional amplitude is rejected loudly") {
    SourceConfig cfg;
    // Tiny control amplitude under a sizable pair amplitude: the conditional
    // click probability blows far past 1.
    cfg.switch_params = SwitchParams{0.1, 0.001, 0.01, 0.0, 0.9};
    CHECK_THROWS_AS(per_pulse_probabilities(cfg, 0.0), ModelValidityError);
}

TEST_CASE("with the pair source off, coincidences integrate to the accidental rate") {
    ExperimentDescriptor desc = preset_descriptor(Preset::small);
    SourceConfig cfg = desc.source_config(deg_to_rad(95.0));
    cfg.switch_params.a_dc = 0.0;
    cfg.switch_params.ref_amp = 0.0;

    // Deterministic identity: the harmonized calibration makes the product
    // of singles rates integrate exactly to the measured accidental rate.
    PulseProbabilities p = per_pulse_probabilities(cfg, 1.3);
    CHECK(p.p_both * cfg.rep_rate == doctest::Approx(256.0).epsilon(1e-9));

    cfg.dwell_time = 40.0;
    cfg.rng_seed = 7;
    ScanSpec spec;
    auto records = simulate_scan(cfg, spec);
    double sum = 0.0;
    for (const auto& rec : records) sum += double(rec.coincidences);
    double mean = sum / double(records.size());
    double expected = 256.0 * 40.0;
    double sigma_mean = std::sqrt(expected / double(records.size()));
    CHECK(std::abs(mean - expected) < 5.0 * sigma_mean);
}

TEST_CASE("with the beams blocked, coincidences integrate to the pair rate") {
    ExperimentDescriptor desc = preset_descriptor(Preset::large);
    SourceConfig cfg = desc.source_config(deg_to_rad(95.0));
    cfg.switch_params.alpha = 0.0;
    cfg.switch_params.ref_amp = 0.0;

    PulseProbabilities p = per_pulse_probabilities(cfg, 0.4);
    CHECK(p.p_both * cfg.rep_rate == doctest::Approx(5.2).epsilon(1e-9));

    cfg.dwell_time = 40.0;   // 208 expected coincidences per bin
    cfg.rng_seed = 9;
    ScanSpec spec;
    auto records = simulate_scan(cfg, spec);
    double sum = 0.0, sumsq = 0.0;
    for (const auto& rec : records) {
        sum += double(rec.coincidences);
        sumsq += double(rec.coincidences) * double(rec.coincidences);
    }
    double n = double(records.size());
    double mean = sum / n;
    double sd = std::sqrt(sumsq / n - mean * mean);
    CHECK(std::abs(mean - 208.0) < 5.0 * std::sqrt(208.0 / n));
    // Near-Poisson bin scatter: relative spread about 1/sqrt(208) ~ 6.9%.
    CHECK(sd / mean > 0.04);
    CHECK(sd / mean < 0.10);
}

TEST_CASE("scan simulation is deterministic and respects count ordering") {
    SourceConfig cfg = preset_descriptor(Preset::large).source_config(deg_to_rad(95.0));
    cfg.dwell_time = 2.0;
    cfg.rng_seed = 42;
    ScanSpec spec;

    auto a = simulate_scan(cfg, spec);
    auto b = simulate_scan(cfg, spec);
    REQUIRE(a.size() == b.size());
    bool identical = true;
    for (std::size_t i = 0; i < a.size(); ++i)
        identical = identical && a[i].coincidences == b[i].coincidences &&
                    a[i].singles_1 == b[i].singles_1 && a[i].singles_2 == b[i].singles_2;
    CHECK(identical);

    cfg.rng_seed = 43;
    auto c = simulate_scan(cfg, spec);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i)
        differs = differs || a[i].singles_1 != c[i].singles_1;
    CHECK(differs);

    for (const auto& rec : a) {
        CHECK(rec.n_pulses == std::llround(cfg.rep_rate * cfg.dwell_time));
        CHECK(rec.coincidences >= 0);
        CHECK(rec.coincidences <= rec.singles_1);
        CHECK(rec.coincidences <= rec.singles_2);
        CHECK(rec.singles_1 <= rec.n_pulses);
        CHECK(rec.singles_2 <= rec.n_pulses);
    }
    for (int i = 0; i < spec.n_steps; ++i) {
        CHECK(a[std::size_t(i)].delay_um == doctest::Approx(spec.delay_at(i)).epsilon(1e-12));
        CHECK(a[std::size_t(i)].phi_ref_rad ==
              doctest::Approx(spec.phi_ref_at(i)).epsilon(1e-12));
    }
}

TEST_CASE("the pulse count is the rounded rep-rate dwell product") {
    SourceConfig cfg;
    cfg.rep_rate = 3.0;
    cfg.dwell_time = 0.5;
    cfg.switch_params = SwitchParams{0.0, 0.0, 0.0, 0.0, 0.9};
    ScanSpec spec;
    spec.n_steps = 5;
    spec.delay_step_um = 1.0;
    auto records = simulate_scan(cfg, spec);
    for (const auto& rec : records) CHECK(rec.n_pulses == 2);
}

TEST_CASE("calibration from rates round-trips the forward rate model") {
    const double rep = 8.0e7, eta1 = 0.7, eta2 = 0.9, t = 0.8, theta = 1.1;
    const double alpha = 0.05, beta = 0.2, ref = 0.1, a_dc_mag = 0.004;

    MeasuredRates rates;
    rates.singles_1_signal = rep * eta1 * t * alpha * alpha;
    rates.singles_1_reference = rep * eta1 * (1.0 - t) * ref * ref;
    rates.singles_2 = rep * eta2 * beta * beta;
    rates.accidental_coinc = rates.singles_1_signal * rates.singles_2 / rep;
    double r = a_dc_mag / (alpha * beta);
    rates.dc_coinc = rates.accidental_coinc * r * r;

    SwitchParams params = calibrate_from_rates(rates, rep, eta1, eta2, t, theta);
    CHECK(std::abs(params.alpha - alpha) < 1e-12);
    CHECK(std::abs(params.beta - beta) < 1e-12);
    CHECK(std::abs(params.ref_amp - ref) < 1e-12);
    CHECK(std::abs(params.a_dc) == doctest::Approx(a_dc_mag).epsilon(1e-12));
    CHECK(params.theta_p() == doctest::Approx(theta).epsilon(1e-12));
    CHECK(params.bs2_transmissivity == t);
}

TEST_CASE("calibration edge cases and rejections") {
    MeasuredRates rates{88e3, 79e3, 282e3, 256.0, 4.7};
    SwitchParams small = calibrate_from_rates(rates, 8.0e7, 1.0, 1.0, 0.9, 0.0);
    CHECK(small.r() == doctest::Approx(std::sqrt(4.7 / 256.0)).epsilon(1e-12));

    MeasuredRates large{700.0, 8600.0, 129e3, 1.1, 5.2};
    CHECK(calibrate_from_rates(large, 8.0e7, 1.0, 1.0, 0.9, 0.0).r() ==
          doctest::Approx(std::sqrt(5.2 / 1.1)).epsilon(1e-12));

    MeasuredRates no_pairs = rates;
    no_pairs.dc_coinc = 0.0;
    CHECK(std::abs(calibrate_from_rates(no_pairs, 8.0e7, 1.0, 1.0, 0.9, 0.0).a_dc) == 0.0);

    MeasuredRates no_acc = rates;
    no_acc.accidental_coinc = 0.0;
    CHECK_THROWS_AS(calibrate_from_rates(no_acc, 8.0e7, 1.0, 1.0, 0.9, 0.0),
                    std::invalid_argument);

    MeasuredRates too_bright = rates;
    too_bright.singles_2 = 8.0e7 * 0.9 + 1.0;
    CHECK_THROWS_AS(calibrate_from_rates(too_bright, 8.0e7, 1.0, 0.9, 0.9, 0.0),
                    ModelValidityError);

    CHECK_THROWS_AS(calibrate_from_rates(rates, 8.0e7, 1.0, 1.0, 1.0, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(calibrate_from_rates(rates, 0.0, 1.0, 1.0, 0.9, 0.0),
                    std::invalid_argument);
}

TEST_CASE("the harmonized calibration reproduces the measured accidental rate") {
    for (Preset preset : {Preset::small, Preset::large}) {
        ExperimentDescriptor desc = preset_descriptor(preset);
        MeasuredRates rates = desc.resolved_rates();
        SwitchParams eff = desc.switch_params(deg_to_rad(95.0));

        double s1 = desc.rep_rate * desc.det1_efficiency * desc.bs2_transmissivity *
                    std::norm(eff.alpha);
        double s2 = desc.rep_rate * desc.det2_efficiency * std::norm(eff.beta);
        CHECK(s1 * s2 / desc.rep_rate ==
              doctest::Approx(rates.accidental_coinc).epsilon(1e-9));
        // Harmonizing the singles must not move the rate ratio.
        CHECK(eff.r() == doctest::Approx(desc.rate_ratio()).epsilon(1e-12));
    }
}

TEST_CASE("the large calibration lands on its pinned effective amplitudes") {
    ExperimentDescriptor desc = preset_descriptor(Preset::large);
    CHECK(desc.harmonization_factor() ==
          doctest::Approx(0.9871825295366454).epsilon(1e-12));
    SwitchParams eff = desc.switch_params(deg_to_rad(95.0));
    CHECK(std::abs(eff.alpha) == doctest::Approx(0.0030980006336427243).epsilon(1e-12));
    CHECK(std::abs(eff.beta) == doctest::Approx(0.03989776721669824).epsilon(1e-12));
    CHECK(std::abs(eff.ref_amp) == doctest::Approx(0.03257639051908443).epsilon(1e-12));
    CHECK(std::abs(eff.a_dc) == doctest::Approx(0.000268741924943285).epsilon(1e-12));
    CHECK(eff.r() == doctest::Approx(2.174229226018436).epsilon(1e-12));
}
