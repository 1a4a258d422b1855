//! Comparison machinery for `v' = -2√(v(1-v))`, `v(0) = 1`.
//!
//! Only the closed-form solution families of this particular right-hand
//! side are provided: `z_c(x)` is 1 before `c`, `cos²(x - c)` on
//! `[c, c + π/2]` and 0 afterwards. Any decay curve rescaled to
//! `x = tΔh` stays above `z_0`, and once it is strictly above at some
//! `ξ` it stays above the shifted solution through `(ξ, v(ξ))`.
//!
//! There is no general ODE engine here.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::bounds::window_times;
use crate::dynamics::{energy_spread, survival_probability_mixed, DecayCurve, Hamiltonian};
use crate::error::{Error, Result};
use crate::states::DensityOperator;
use crate::tol;

/// Maximal-domain solution through `(c, 1)`.
pub fn z_c(x: f64, c: f64) -> f64 {
    if x < c {
        1.0
    } else if x <= c + FRAC_PI_2 {
        (x - c).cos().powi(2)
    } else {
        0.0
    }
}

/// `f(y) = -2√(y(1-y))`, with inputs within `1e-12` of `[0, 1]` clamped.
pub fn rhs_f(y: f64) -> Result<f64> {
    let slack = tol::RHS_DOMAIN_SLACK;
    if !(-slack..=1.0 + slack).contains(&y) {
        return Err(Error::DomainError(format!("rhs_f needs y in [0, 1], got {y}")));
    }
    let y = y.clamp(0.0, 1.0);
    Ok(-2.0 * (y * (1.0 - y)).sqrt())
}

/// Largest `|z_c' - f(z_c)|` over `grid`, with `z_c'` a central difference.
///
/// Points within `1e-3` of the kinks `c` and `c + π/2` are skipped.
pub fn verify_solution_residual(c: f64, grid: &[f64]) -> f64 {
    let s = tol::FD_STEP_ODE;
    grid.iter()
        .filter(|&&x| (x - c).abs() >= tol::KINK_EXCLUSION && (x - c - FRAC_PI_2).abs() >= tol::KINK_EXCLUSION)
        .map(|&x| {
            let fd = (z_c(x + s, c) - z_c(x - s, c)) / (2.0 * s);
            let f = rhs_f(z_c(x, c)).expect("z_c stays in [0, 1]");
            (fd - f).abs()
        })
        .fold(0.0, f64::max)
}

/// Values `v(x)` at strictly increasing `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonSample {
    xs: Vec<f64>,
    vs: Vec<f64>,
}

impl ComparisonSample {
    pub fn new(xs: Vec<f64>, vs: Vec<f64>) -> Result<Self> {
        if xs.is_empty() || xs.len() != vs.len() {
            return Err(Error::InvalidSample(format!("{} abscissae for {} values", xs.len(), vs.len())));
        }
        if let Some(i) = (0..xs.len()).find(|&i| !xs[i].is_finite() || !vs[i].is_finite()) {
            return Err(Error::InvalidSample(format!("non-finite entry at index {i}")));
        }
        if let Some(w) = xs.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSample(format!("xs not strictly increasing at index {}", w + 1)));
        }
        if let Some(v) = vs.iter().find(|v| !(-1e-10..=1.0 + 1e-10).contains(*v)) {
            return Err(Error::InvalidSample(format!("value {v} outside [0, 1]")));
        }
        Ok(Self { xs, vs })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn vs(&self) -> &[f64] {
        &self.vs
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Linear interpolation; exact at grid points.
    pub fn value_at(&self, x: f64) -> Option<f64> {
        let (first, last) = (self.xs[0], self.xs[self.xs.len() - 1]);
        let slack = 1e-14 * (1.0 + x.abs());
        if x < first - slack || x > last + slack {
            return None;
        }
        let i = self.xs.partition_point(|&g| g < x);
        if i < self.xs.len() && (self.xs[i] - x).abs() <= slack {
            return Some(self.vs[i]);
        }
        if i > 0 && (self.xs[i - 1] - x).abs() <= slack {
            return Some(self.vs[i - 1]);
        }
        if i == 0 || i == self.xs.len() {
            return None;
        }
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let w = (x - x0) / (x1 - x0);
        Some(self.vs[i - 1] * (1.0 - w) + self.vs[i] * w)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeViolation {
    pub x: f64,
    pub v: f64,
    pub z: f64,
}

/// Result of checking `v >= z_0 - tol` on a sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeReport {
    pub margins: Vec<f64>,
    pub min_margin: f64,
    pub argmin_x: f64,
    pub violations: Vec<EnvelopeViolation>,
    pub tol: f64,
}

impl EnvelopeReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn check_initial(sample: &ComparisonSample) -> Result<()> {
    let (x0, v0) = (sample.xs[0], sample.vs[0]);
    if x0.abs() > 1e-10 || (v0 - 1.0).abs() > 1e-10 {
        return Err(Error::InitialConditionViolation { x0, v0 });
    }
    Ok(())
}

/// Checks `v(x) >= z_0(x) - tol` at every sample point.
pub fn comparison_lower_envelope(sample: &ComparisonSample, tol: f64) -> Result<EnvelopeReport> {
    check_initial(sample)?;
    let mut margins = Vec::with_capacity(sample.len());
    let mut violations = Vec::new();
    let (mut min_margin, mut argmin_x) = (f64::INFINITY, sample.xs[0]);
    for (&x, &v) in sample.xs.iter().zip(&sample.vs) {
        let z = z_c(x, 0.0);
        let m = v - z;
        if m < min_margin {
            min_margin = m;
            argmin_x = x;
        }
        if m < -tol {
            violations.push(EnvelopeViolation { x, v, z });
        }
        margins.push(m);
    }
    Ok(EnvelopeReport { margins, min_margin, argmin_x, violations, tol })
}

/// Outcome of propagating strictness from `ξ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropagationReport {
    pub xi: f64,
    pub eta: f64,
    /// Shift with `cos²(ξ - c) = η`.
    pub c: f64,
    /// Smallest `v(x) - z_c(x)` over sampled `x` in `[ξ, π/2]`.
    pub min_margin: f64,
    pub argmin_x: f64,
    pub violations: usize,
    pub tol: f64,
}

impl PropagationReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// With `η = v(ξ) > cos²ξ + tol`, finds `c = ξ - arccos√η` and checks
/// `v(x) >= cos²(x - c) - tol` on the sampled part of `[ξ, π/2]`.
pub fn strictness_propagation(sample: &ComparisonSample, xi: f64, tol: f64) -> Result<PropagationReport> {
    if !(xi > 0.0 && xi < FRAC_PI_2) {
        return Err(Error::DomainError(format!("xi = {xi} must lie in (0, pi/2)")));
    }
    let eta = sample
        .value_at(xi)
        .ok_or_else(|| Error::DomainError(format!("xi = {xi} lies outside the sample grid")))?;
    let bound = xi.cos().powi(2);
    if eta <= bound + tol {
        return Err(Error::NotStrict { xi, eta, bound });
    }
    let c = xi - eta.min(1.0).sqrt().acos();
    let (mut min_margin, mut argmin_x, mut violations) = (f64::INFINITY, xi, 0);
    for (&x, &v) in sample.xs.iter().zip(&sample.vs) {
        if x < xi || x > FRAC_PI_2 {
            continue;
        }
        let m = v - z_c(x, c);
        if m < min_margin {
            min_margin = m;
            argmin_x = x;
        }
        if m < -tol {
            violations += 1;
        }
    }
    Ok(PropagationReport { xi, eta, c, min_margin, argmin_x, violations, tol })
}

/// The two halves of the Fleming window as samples in `x = |t|Δh`.
///
/// Uses the same grid and evaluation as [`crate::bounds::verify_fleming`].
/// The `t <= 0` half is the forward curve of `-h`. A stationary pair uses
/// `x = |t|`.
pub fn window_samples(
    rho: &DensityOperator,
    h: &Hamiltonian,
    grid_points: usize,
) -> Result<(ComparisonSample, ComparisonSample)> {
    if grid_points < 2 {
        return Err(Error::DomainError(format!("grid_points must be at least 2, got {grid_points}")));
    }
    let delta_h = energy_spread(rho, h)?;
    let scale = if delta_h > tol::STATIONARY_TOL { delta_h } else { 1.0 };
    let curve = DecayCurve::evaluate(rho, h, &window_times(delta_h, grid_points))?;
    let p0 = survival_probability_mixed(rho, h, 0.0)?;

    let half = |points: Vec<(f64, f64)>| -> Result<ComparisonSample> {
        let mut xs = vec![0.0];
        let mut vs = vec![p0];
        for (t, p) in points {
            let x = t.abs() * scale;
            if x > 0.0 {
                xs.push(x);
                vs.push(p);
            } else {
                vs[0] = p;
            }
        }
        ComparisonSample::new(xs, vs)
    };
    let pairs: Vec<(f64, f64)> = curve.times.iter().copied().zip(curve.values.iter().copied()).collect();
    let forward = half(pairs.iter().copied().filter(|&(t, _)| t >= 0.0).collect())?;
    let backward = half(pairs.iter().rev().copied().filter(|&(t, _)| t <= 0.0).collect())?;
    Ok((forward, backward))
}
