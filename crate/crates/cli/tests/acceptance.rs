//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::process::Command;

use fleming_core::bounds::{classify_dichotomy, default_probes, find_passage_time, VerdictKind};
use fleming_core::campaign::{run_campaign, CampaignConfig, CampaignReport};
use fleming_core::dynamics::{energy_spread, linspace, survival_probability_mixed, survival_probability_pure};
use fleming_core::intelligent::{construct_mixed_intelligent, variance_mixing};
use fleming_core::odecmp::{strictness_propagation, verify_solution_residual, z_c, ComparisonSample};
use fleming_core::states::validate_density;
use fleming_core::{tol, ComplexMatrix, Hamiltonian, MixedIntelligentSpec, PureState, C64};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn e(dim: usize, i: usize) -> Vec<C64> {
    let mut v = vec![re(0.0); dim];
    v[i] = re(1.0);
    v
}

fn pure_pair() -> (PureState, Hamiltonian) {
    (PureState::new(vec![re(FRAC_1_SQRT_2), re(FRAC_1_SQRT_2)]).unwrap(), Hamiltonian::diagonal(&[0.0, 2.0]))
}

fn mixed_spec(weights: Vec<f64>) -> (MixedIntelligentSpec, Hamiltonian) {
    let spec = MixedIntelligentSpec {
        dim: 4,
        omega1: 0.0,
        omega2: 2.0,
        weights,
        basis1: vec![e(4, 0), e(4, 1)],
        basis2: vec![e(4, 2), e(4, 3)],
    };
    (spec, Hamiltonian::diagonal(&[0.0, 0.0, 2.0, 2.0]))
}

fn pure_saturation() -> Outcome {
    let (phi, h) = pure_pair();
    let worst = linspace(-PI, PI, 201)
        .into_iter()
        .map(|t| (survival_probability_pure(&phi, &h, t).unwrap() - t.cos().powi(2)).abs())
        .fold(0.0, f64::max);
    outcome(worst <= 1e-12, format!("max |P - cos^2 t| = {worst:.3e} (tol 1e-12)"))
}

fn mixed_saturation() -> Outcome {
    let mut worst = 0.0_f64;
    for w in [vec![0.5, 0.5], vec![0.75, 0.25], vec![0.9, 0.1]] {
        let (spec, h) = mixed_spec(w);
        let rho = construct_mixed_intelligent(&spec, &h).unwrap();
        let dh = energy_spread(&rho, &h).unwrap();
        for t in linspace(0.0, PI / dh, 201) {
            let p = survival_probability_mixed(&rho, &h, t).unwrap();
            worst = worst.max((p - (dh * t).cos().powi(2)).abs());
        }
    }
    outcome(worst <= 1e-10, format!("max |P - cos^2(dh t)| over three weight vectors = {worst:.3e} (tol 1e-10)"))
}

fn fleming_campaign(r: &CampaignReport) -> Outcome {
    let s = &r.summary;
    let min = s.min_fleming_margin.unwrap_or(f64::NAN);
    outcome(
        s.instances == 1000 && min >= -1e-9 && s.fleming_violations == 0 && s.errors == 0,
        format!("{} instances, min margin {min:.3e}, {} violations", s.instances, s.fleming_violations),
    )
}

fn dichotomy(r: &CampaignReport) -> Outcome {
    let v = &r.summary.verdicts;
    let all_classified = v.unclassified == 0 && v.stationary + v.strictly_above + v.saturating == r.summary.instances;

    let mut constructed_ok = true;
    for w in [vec![0.5, 0.5], vec![0.75, 0.25], vec![0.9, 0.1]] {
        let (spec, h) = mixed_spec(w);
        let rho = construct_mixed_intelligent(&spec, &h).unwrap();
        let dh = energy_spread(&rho, &h).unwrap();
        let verdict = classify_dichotomy(&rho, &h, &default_probes(dh), tol::EQ_TOL).unwrap();
        constructed_ok &= verdict.kind == VerdictKind::Saturating && verdict.structural_confirmation;
    }
    let (phi, h) = pure_pair();
    let pure = classify_dichotomy(&phi.to_density(), &h, &default_probes(1.0), tol::EQ_TOL).unwrap();
    constructed_ok &= pure.kind == VerdictKind::Saturating && pure.structural_confirmation;

    let skew = PureState::new(vec![re(0.6f64.sqrt()), re(0.4f64.sqrt())]).unwrap().to_density();
    let dh = energy_spread(&skew, &h).unwrap();
    let skew_kind = classify_dichotomy(&skew, &h, &default_probes(dh), tol::EQ_TOL).unwrap().kind;

    outcome(
        all_classified && constructed_ok && skew_kind == VerdictKind::StrictlyAbove,
        format!(
            "campaign {}/{}/{} stationary/strict/saturating; constructed saturating: {constructed_ok}; 0.6/0.4 split: {skew_kind:?}",
            v.stationary, v.strictly_above, v.saturating
        ),
    )
}

fn mt_inequality(r: &CampaignReport) -> Outcome {
    let s = &r.summary;
    outcome(
        s.mt_violations == 0 && s.errors == 0 && r.config.bound_tol <= 1e-9,
        format!("min margin {:.3e}, {} violations", s.min_mt_margin.unwrap_or(f64::NAN), s.mt_violations),
    )
}

fn derivative_oracles(r: &CampaignReport) -> Outcome {
    let s = &r.summary;
    let d1 = s.max_derivative_error.unwrap_or(f64::NAN);
    let d2 = s.max_d2_error.unwrap_or(f64::NAN);
    outcome(d1 <= 1e-6 && d2 <= 1e-6, format!("max |P' - FD| = {d1:.3e}, max |D2 - FD| = {d2:.3e} (tol 1e-6)"))
}

fn variance_mixing_lemma(r: &CampaignReport) -> Outcome {
    let campaign_ok = r.instances.iter().all(|i| {
        i.mixing_residual.abs() <= 1e-12 * (1.0 + i.mixing_total.abs()) && i.mixing_between >= -1e-12
    });
    let h = Hamiltonian::diagonal(&[0.0, 1.0]);
    let rho = validate_density(&ComplexMatrix::from_diagonal(&[0.5, 0.5]), tol::RANK_TOL).unwrap();
    let m = variance_mixing(&rho, &h).unwrap();
    let hand = (m.total - 0.25).abs() <= 1e-15 && m.within.abs() <= 1e-15 && (m.between - 0.25).abs() <= 1e-15;
    outcome(
        campaign_ok && hand && r.summary.errors == 0,
        format!(
            "campaign identity holds: {campaign_ok}, min between {:.3e}; hand case ({}, {}, {})",
            r.summary.min_between.unwrap_or(f64::NAN),
            m.total,
            m.within,
            m.between
        ),
    )
}

fn passage_time(r: &CampaignReport) -> Outcome {
    let (phi, h) = pure_pair();
    let t = find_passage_time(&phi.to_density(), &h, 0.0, 4.0, 1e-10).unwrap();
    let closed = t.is_some_and(|t| (t - FRAC_PI_2).abs() <= 1e-9);
    let bound_ok = r
        .instances
        .iter()
        .all(|i| i.passage_time.is_none_or(|t| t + r.config.tol_t >= i.passage_lower_bound));
    outcome(
        closed && bound_ok && r.summary.errors == 0,
        format!(
            "orthogonalization time {t:?} vs pi/2; {} campaign passages, all above arccos(sqrt eps)/dh: {bound_ok}",
            r.summary.passages_found
        ),
    )
}

fn ode_machinery(r: &CampaignReport) -> Outcome {
    let grid = linspace(0.0, FRAC_PI_2, 2001);
    let residual = verify_solution_residual(0.0, &grid);
    let agree = r.instances.iter().filter(|i| i.error.is_none() && i.envelope_agrees).count();

    let xs: Vec<f64> = (0..=1570).map(|k| k as f64 * 1e-3).collect();
    let vs = xs.iter().map(|&x| z_c(x, 0.2)).collect();
    let sample = ComparisonSample::new(xs, vs).unwrap();
    let c = strictness_propagation(&sample, 0.5, 1e-9).unwrap().c;

    outcome(
        residual <= 1e-4 && agree == r.instances.len() && (c - 0.2).abs() <= 1e-9,
        format!(
            "z0 residual {residual:.3e}; envelope agrees with fleming on {agree}/{}; recovered c = {c}",
            r.instances.len()
        ),
    )
}

fn determinism() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_fleming"))
            .args(["scan", "--seed", "42", "--dims", "2,3,4,5,6", "--instances", "200"])
            .output()
            .expect("binary runs")
    };
    let (a, b) = (run(), run());
    let same = a.status.success() && b.status.success() && a.stdout == b.stdout && !a.stdout.is_empty();
    outcome(same, format!("two scans, {} bytes each, identical: {}", a.stdout.len(), a.stdout == b.stdout))
}

fn main() {
    let report = run_campaign(&CampaignConfig::default()).expect("campaign config is valid");

    let results = [
        ("1 pure saturation", pure_saturation()),
        ("2 mixed saturation", mixed_saturation()),
        ("3 generalized Fleming bound", fleming_campaign(&report)),
        ("4 dichotomy", dichotomy(&report)),
        ("5 Mandelstam-Tamm inequality", mt_inequality(&report)),
        ("6 derivative oracles", derivative_oracles(&report)),
        ("7 variance mixing", variance_mixing_lemma(&report)),
        ("8 passage time", passage_time(&report)),
        ("9 comparison machinery", ode_machinery(&report)),
        ("10 determinism", determinism()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
