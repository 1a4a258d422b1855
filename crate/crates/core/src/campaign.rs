//! Seeded randomized verification over GUE Hamiltonians and random
//! density operators.
//!
//! Instance `i` (counted across all dims in config order) draws from
//! [`ensemble::instance_rng`]`(seed, i)`: first `h`, then `ρ`. Instances
//! run in parallel and are merged in index order, so a config fixes the
//! report bit for bit.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    classify_dichotomy, default_probes, find_passage_time, passage_time_lower_bound, verify_fleming,
    verify_mt_inequality, window_times, VerdictKind,
};
use crate::dynamics::{
    decay_derivative, energy_spread, finite_difference_curvature, finite_difference_derivative,
    second_derivative_at_zero, Hamiltonian,
};
use crate::ensemble;
use crate::error::{Error, Result};
use crate::intelligent::variance_mixing;
use crate::odecmp::{comparison_lower_envelope, strictness_propagation, window_samples};
use crate::tol;

/// Times per instance at which `P'` is compared with its finite difference.
const DERIVATIVE_PROBES: usize = 11;

/// Point of `x = tΔh` where strictness is propagated from.
const PROPAGATION_XI: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub seed: u64,
    pub dims: Vec<usize>,
    pub instances_per_dim: usize,
    pub grid_points: usize,
    pub eq_tol: f64,
    pub bound_tol: f64,
    pub rank_tol: f64,
    /// Passage threshold `ε`.
    pub epsilon: f64,
    pub t_max: f64,
    pub tol_t: f64,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            dims: vec![2, 3, 4, 5, 6],
            instances_per_dim: 200,
            grid_points: 201,
            eq_tol: tol::EQ_TOL,
            bound_tol: tol::BOUND_TOL,
            rank_tol: tol::RANK_TOL,
            epsilon: 0.5,
            t_max: 10.0,
            tol_t: 1e-9,
        }
    }
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(d) = self.dims.iter().find(|&&d| d == 0) {
            return Err(Error::DomainError(format!("dimension {d} is not positive")));
        }
        if self.grid_points < 2 {
            return Err(Error::DomainError(format!("grid_points must be at least 2, got {}", self.grid_points)));
        }
        for (name, v) in [("eq_tol", self.eq_tol), ("bound_tol", self.bound_tol), ("tol_t", self.tol_t)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::DomainError(format!("{name} must be positive, got {v}")));
            }
        }
        if self.rank_tol.is_nan() || self.rank_tol < 0.0 {
            return Err(Error::DomainError(format!("rank_tol must be non-negative, got {}", self.rank_tol)));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::DomainError(format!("epsilon must lie in [0, 1], got {}", self.epsilon)));
        }
        if !self.t_max.is_finite() || self.t_max <= 0.0 {
            return Err(Error::DomainError(format!("t_max must be positive, got {}", self.t_max)));
        }
        Ok(())
    }
}

/// Everything measured on one random `(ρ, h)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceResult {
    pub index: u64,
    pub dim: usize,
    pub rank: usize,
    pub delta_h: f64,
    pub fleming_min_margin: f64,
    pub fleming_violations: usize,
    pub mt_min_margin: f64,
    pub mt_violations: usize,
    pub verdict: Option<VerdictKind>,
    pub structural_confirmation: bool,
    /// Largest `|P' - FD|` over the derivative probes.
    pub derivative_error: f64,
    pub d2_analytic: f64,
    pub d2_finite_difference: f64,
    pub mixing_total: f64,
    pub mixing_within: f64,
    pub mixing_between: f64,
    pub mixing_residual: f64,
    pub passage_time: Option<f64>,
    pub passage_lower_bound: f64,
    pub envelope_pass: bool,
    pub envelope_agrees: bool,
    /// Shift `c` recovered at `x = 0.3` for strictly-above states.
    pub propagation_c: Option<f64>,
    pub propagation_holds: Option<bool>,
    /// First error raised while checking this instance.
    pub error: Option<String>,
}

impl InstanceResult {
    pub fn d2_error(&self) -> f64 {
        (self.d2_analytic - self.d2_finite_difference).abs()
    }

    pub fn passage_ok(&self) -> bool {
        self.passage_time.is_none_or(|t| self.passage_lower_bound.is_nan() || t + 1e-9 >= self.passage_lower_bound)
    }

    pub fn passed(&self) -> bool {
        self.error.is_none()
            && self.verdict.is_some()
            && self.fleming_violations == 0
            && self.mt_violations == 0
            && self.derivative_error <= tol::FD_AGREEMENT
            && self.d2_error() <= tol::FD_AGREEMENT
            && self.mixing_residual.abs() <= tol::MIXING_REL * (1.0 + self.mixing_total.abs())
            && self.mixing_between >= -1e-12
            && self.passage_ok()
            && self.envelope_agrees
            && self.propagation_holds != Some(false)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct VerdictCounts {
    pub stationary: usize,
    pub strictly_above: usize,
    pub saturating: usize,
    pub unclassified: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignSummary {
    pub seed: u64,
    pub instances: usize,
    pub verdicts: VerdictCounts,
    pub min_fleming_margin: Option<f64>,
    pub fleming_violations: usize,
    pub min_mt_margin: Option<f64>,
    pub mt_violations: usize,
    pub max_derivative_error: Option<f64>,
    pub max_d2_error: Option<f64>,
    pub max_mixing_residual: Option<f64>,
    pub min_between: Option<f64>,
    pub passages_found: usize,
    pub passage_bound_violations: usize,
    pub envelope_disagreements: usize,
    pub propagation_checked: usize,
    pub propagation_failures: usize,
    pub errors: usize,
    pub failed_instances: Vec<u64>,
    pub all_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignReport {
    pub config: CampaignConfig,
    pub summary: CampaignSummary,
    pub instances: Vec<InstanceResult>,
}

/// Runs the full campaign. Instance failures are recorded, not raised.
pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignReport> {
    config.validate()?;
    let jobs: Vec<(u64, usize)> = config
        .dims
        .iter()
        .flat_map(|&d| std::iter::repeat_n(d, config.instances_per_dim))
        .enumerate()
        .map(|(i, d)| (i as u64, d))
        .collect();
    let instances: Vec<InstanceResult> =
        jobs.par_iter().map(|&(index, dim)| run_instance(config, index, dim)).collect();
    let summary = summarize(config.seed, &instances);
    Ok(CampaignReport { config: config.clone(), summary, instances })
}

fn blank(index: u64, dim: usize) -> InstanceResult {
    InstanceResult {
        index,
        dim,
        rank: 0,
        delta_h: f64::NAN,
        fleming_min_margin: f64::NAN,
        fleming_violations: 0,
        mt_min_margin: f64::NAN,
        mt_violations: 0,
        verdict: None,
        structural_confirmation: false,
        derivative_error: f64::NAN,
        d2_analytic: f64::NAN,
        d2_finite_difference: f64::NAN,
        mixing_total: f64::NAN,
        mixing_within: f64::NAN,
        mixing_between: f64::NAN,
        mixing_residual: f64::NAN,
        passage_time: None,
        passage_lower_bound: f64::NAN,
        envelope_pass: false,
        envelope_agrees: false,
        propagation_c: None,
        propagation_holds: None,
        error: None,
    }
}

/// Draws instance `index` of dimension `dim` and runs every check on it.
pub fn run_instance(config: &CampaignConfig, index: u64, dim: usize) -> InstanceResult {
    let mut out = blank(index, dim);
    if let Err(e) = check_instance(config, &mut out) {
        out.error = Some(e.to_string());
    }
    out
}

fn check_instance(config: &CampaignConfig, out: &mut InstanceResult) -> Result<()> {
    let mut rng = ensemble::instance_rng(config.seed, out.index);
    let h = Hamiltonian::new(ensemble::random_hermitian(&mut rng, out.dim))?;
    let raw = ensemble::random_density_matrix(&mut rng, out.dim);
    let rho = crate::states::validate_density(&raw.matrix, config.rank_tol)?;
    out.rank = rho.rank();
    let delta_h = energy_spread(&rho, &h)?;
    out.delta_h = delta_h;

    let fleming = verify_fleming(&rho, &h, config.grid_points, config.bound_tol)?;
    out.fleming_min_margin = fleming.min_margin;
    out.fleming_violations = fleming.violations.len();

    let mt = verify_mt_inequality(&rho, &h, &fleming.curve.times, config.bound_tol)?;
    out.mt_min_margin = mt.min_margin;
    out.mt_violations = mt.violations.len();

    let verdict = classify_dichotomy(&rho, &h, &default_probes(delta_h), config.eq_tol)?;
    out.verdict = Some(verdict.kind);
    out.structural_confirmation = verdict.structural_confirmation;

    let mut derivative_error = 0.0_f64;
    for t in window_times(delta_h, DERIVATIVE_PROBES) {
        let analytic = decay_derivative(&rho, &h, t)?;
        let fd = finite_difference_derivative(&rho, &h, t)?;
        derivative_error = derivative_error.max((analytic - fd).abs());
    }
    out.derivative_error = derivative_error;
    out.d2_analytic = second_derivative_at_zero(&rho, &h)?;
    out.d2_finite_difference = finite_difference_curvature(&rho, &h)?;

    let mix = variance_mixing(&rho, &h)?;
    out.mixing_total = mix.total;
    out.mixing_within = mix.within;
    out.mixing_between = mix.between;
    out.mixing_residual = mix.residual();

    if delta_h > tol::STATIONARY_TOL {
        out.passage_lower_bound = passage_time_lower_bound(delta_h, config.epsilon)?;
    }
    out.passage_time = find_passage_time(&rho, &h, config.epsilon, config.t_max, config.tol_t)?;

    let (forward, backward) = window_samples(&rho, &h, config.grid_points)?;
    let f = comparison_lower_envelope(&forward, config.bound_tol)?;
    let b = comparison_lower_envelope(&backward, config.bound_tol)?;
    out.envelope_pass = f.passed() && b.passed();
    out.envelope_agrees = out.envelope_pass == fleming.passed();

    if verdict.kind == VerdictKind::StrictlyAbove {
        let xi = forward
            .xs()
            .iter()
            .copied()
            .filter(|&x| x > 0.0 && x < FRAC_PI_2)
            .min_by(|a, b| (a - PROPAGATION_XI).abs().total_cmp(&(b - PROPAGATION_XI).abs()));
        if let Some(xi) = xi {
            match strictness_propagation(&forward, xi, config.bound_tol) {
                Ok(r) => {
                    out.propagation_c = Some(r.c);
                    out.propagation_holds = Some(r.holds());
                }
                // Margin at ξ below tolerance: nothing to propagate.
                Err(Error::NotStrict { .. }) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(())
}

fn fold_opt(acc: Option<f64>, x: f64, pick: fn(f64, f64) -> f64) -> Option<f64> {
    if x.is_nan() {
        return acc;
    }
    Some(acc.map_or(x, |a| pick(a, x)))
}

pub fn summarize(seed: u64, instances: &[InstanceResult]) -> CampaignSummary {
    let mut s = CampaignSummary {
        seed,
        instances: instances.len(),
        verdicts: VerdictCounts::default(),
        min_fleming_margin: None,
        fleming_violations: 0,
        min_mt_margin: None,
        mt_violations: 0,
        max_derivative_error: None,
        max_d2_error: None,
        max_mixing_residual: None,
        min_between: None,
        passages_found: 0,
        passage_bound_violations: 0,
        envelope_disagreements: 0,
        propagation_checked: 0,
        propagation_failures: 0,
        errors: 0,
        failed_instances: Vec::new(),
        all_pass: true,
    };
    for r in instances {
        match r.verdict {
            Some(VerdictKind::Stationary) => s.verdicts.stationary += 1,
            Some(VerdictKind::StrictlyAbove) => s.verdicts.strictly_above += 1,
            Some(VerdictKind::Saturating) => s.verdicts.saturating += 1,
            None => s.verdicts.unclassified += 1,
        }
        s.min_fleming_margin = fold_opt(s.min_fleming_margin, r.fleming_min_margin, f64::min);
        s.fleming_violations += r.fleming_violations;
        s.min_mt_margin = fold_opt(s.min_mt_margin, r.mt_min_margin, f64::min);
        s.mt_violations += r.mt_violations;
        s.max_derivative_error = fold_opt(s.max_derivative_error, r.derivative_error, f64::max);
        s.max_d2_error = fold_opt(s.max_d2_error, r.d2_error(), f64::max);
        s.max_mixing_residual = fold_opt(s.max_mixing_residual, r.mixing_residual.abs(), f64::max);
        s.min_between = fold_opt(s.min_between, r.mixing_between, f64::min);
        if r.passage_time.is_some() {
            s.passages_found += 1;
        }
        if !r.passage_ok() {
            s.passage_bound_violations += 1;
        }
        if r.error.is_none() && !r.envelope_agrees {
            s.envelope_disagreements += 1;
        }
        if let Some(holds) = r.propagation_holds {
            s.propagation_checked += 1;
            if !holds {
                s.propagation_failures += 1;
            }
        }
        if r.error.is_some() {
            s.errors += 1;
        }
        if !r.passed() {
            s.failed_instances.push(r.index);
            s.all_pass = false;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> CampaignConfig {
        CampaignConfig { dims: vec![2, 3, 4], instances_per_dim: 8, ..CampaignConfig::default() }
    }

    #[test]
    fn small_campaign_passes() {
        let report = run_campaign(&small()).unwrap();
        let s = &report.summary;
        assert_eq!(s.instances, 24);
        assert!(s.all_pass, "{s:?}");
        // Full-rank draws have Π = I and hence P ≡ 1.
        let full_rank = report.instances.iter().filter(|r| r.rank == r.dim).count();
        assert_eq!(s.verdicts.stationary, full_rank);
        assert_eq!(s.verdicts.strictly_above, 24 - full_rank);
        assert!(s.min_fleming_margin.unwrap() >= -1e-9);
        assert_eq!(report.instances.iter().map(|r| r.index).collect::<Vec<_>>(), (0..24).collect::<Vec<_>>());
    }

    #[test]
    fn campaign_is_deterministic() {
        let a = run_campaign(&small()).unwrap();
        let b = run_campaign(&small()).unwrap();
        assert_eq!(a, b);
        // Identical instance draws regardless of what else runs.
        assert_eq!(run_instance(&small(), 13, 3), a.instances[13]);
    }

    #[test]
    fn empty_campaign() {
        let config = CampaignConfig { instances_per_dim: 0, ..CampaignConfig::default() };
        let report = run_campaign(&config).unwrap();
        assert_eq!(report.summary.instances, 0);
        assert!(report.summary.all_pass);
        assert_eq!(report.summary.min_fleming_margin, None);
    }

    #[test]
    fn config_validation() {
        let bad = CampaignConfig { grid_points: 1, ..CampaignConfig::default() };
        assert!(run_campaign(&bad).is_err());
        let bad = CampaignConfig { dims: vec![0], ..CampaignConfig::default() };
        assert!(run_campaign(&bad).is_err());
        let bad = CampaignConfig { epsilon: 1.5, ..CampaignConfig::default() };
        assert!(run_campaign(&bad).is_err());
    }
}
