use crharq::channel::{detection_prob, false_alarm_prob};
use crharq::harq::{p0, pm, ScenarioHistory};
use crharq::numerics::SeriesControl;
use crharq::{build_chain, scenario_profile, throughput_metrics, ChainOptions, HarqChain, HistoryWeighting, SystemParams};

#[test]
fn baseline_sensing_probabilities() {
    let params = SystemParams::baseline();
    // 1 − p(28, 20) and 1 − p(14, 20) from a 40-digit oracle.
    assert!((false_alarm_prob(&params).unwrap() - 0.047_807_109_171_434_2).abs() < 1e-15);
    assert!((detection_prob(&params).unwrap() - 0.923_495_059_758_142_9).abs() < 1e-14);
}

#[test]
fn compositions_cover_multinomial_mass() {
    let q = [0.1, 0.2, 0.3, 0.4];
    for m in 0..7 {
        let hs = ScenarioHistory::compositions(m);
        assert_eq!(hs.len() as u32, (m + 1) * (m + 2) * (m + 3) / 6);
        let total: f64 = hs.iter().map(|h| h.weight(&q)).sum();
        assert!((total - 1.0).abs() < 1e-13);
    }
}

#[test]
fn failure_probabilities_fall_with_attempts() {
    let params = SystemParams::baseline();
    let profile = scenario_profile(&params).unwrap();
    let chain = build_chain(&profile, params.fading_power, 6, &ChainOptions::default()).unwrap();
    assert!(chain.p.windows(2).all(|w| w[1] < w[0]), "{:?}", chain.p);
}

#[test]
fn single_scenario_reduces_to_erlang_ratio() {
    // Only the idle/detected scenario: S_m is Erlang(m, ζσ_h²) and
    // p_m = p(κ/ζ, m+1) / p(κ/ζ, m).
    let mut params = SystemParams::baseline();
    params.primary_activity_prob = 0.0;
    params.detection_threshold = 1e3;
    let profile = scenario_profile(&params).unwrap();
    assert_eq!(profile.q[3], 1.0);
    let ctl = SeriesControl::default();
    let x = profile.kappa / profile.zeta[3];
    let g = |k: f64| crharq::numerics::reg_lower_gamma(x, k).unwrap();
    assert!((p0(&profile, 1.0) - g(1.0)).abs() < 1e-15);
    for m in 1..5u32 {
        for w in [HistoryWeighting::Prior, HistoryWeighting::Posterior] {
            let got = pm(m, &profile, 1.0, &ctl, w).unwrap();
            let expected = g(m as f64 + 1.0) / g(m as f64);
            assert!((got - expected).abs() < 1e-12, "m = {m}: {got} vs {expected}");
        }
    }
}

#[test]
fn deadline_one_never_retransmits() {
    let params = SystemParams { deadline_frames: 1, ..SystemParams::baseline() };
    let profile = scenario_profile(&params).unwrap();
    let chain = build_chain(&profile, params.fading_power, 1, &ChainOptions::default()).unwrap();
    assert_eq!(chain.pi, vec![1.0]);
    assert_eq!(chain.p_lost, chain.p[0]);
    let tp = throughput_metrics(&chain, &params);
    assert!((tp.service_rate_bcu - 1.5).abs() < 1e-12);
}

#[test]
fn zero_payload_serves_nothing_and_loses_nothing() {
    let params = SystemParams { packet_bits: 0, ..SystemParams::baseline() };
    let profile = scenario_profile(&params).unwrap();
    let chain = build_chain(&profile, params.fading_power, 4, &ChainOptions::default()).unwrap();
    assert_eq!(chain.p, vec![0.0; 4]);
    assert_eq!(chain.p_lost, 0.0);
    assert_eq!(chain.pi0(), 1.0);
    let tp = throughput_metrics(&chain, &params);
    assert_eq!(tp.service_rate_bcu, 0.0);
    assert_eq!(tp.goodput_bcu, 0.0);
}

#[test]
fn columns_of_transition_matrix_sum_to_one() {
    let chain = HarqChain::from_failure_probs(vec![0.9, 0.5, 0.1, 0.7, 0.3]).unwrap();
    for from in 0..5 {
        let s: f64 = (0..5).map(|to| chain.phi[to][from]).sum();
        assert!((s - 1.0).abs() < 1e-15);
    }
    assert!(HarqChain::from_failure_probs(vec![]).is_err());
    assert!(HarqChain::from_failure_probs(vec![1.2]).is_err());
}
