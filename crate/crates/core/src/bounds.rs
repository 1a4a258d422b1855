//! Fleming bound, Mandelstam–Tamm inequality, the saturation dichotomy
//! and passage times. Units have ħ = 1.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{
    decay_derivative, energy_spread, linspace, survival_probability_mixed, DecayCurve, Hamiltonian,
    SpectralDecay,
};
use crate::error::{Error, Result};
use crate::intelligent::is_intelligent;
use crate::states::DensityOperator;
use crate::tol;

/// `cos²(Δh t)` inside the window `Δh|t| <= π/2`, `None` outside it.
///
/// For `Δh = 0` the window is the whole line and the bound is 1.
pub fn fleming_bound(delta_h: f64, t: f64) -> Option<f64> {
    if delta_h <= 0.0 {
        return Some(1.0);
    }
    let x = delta_h * t.abs();
    (x <= FRAC_PI_2 * (1.0 + tol::WINDOW_EDGE_REL)).then(|| x.min(FRAC_PI_2).cos().powi(2))
}

/// Which inequality a [`BoundReport`] checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundKind {
    /// `P_ρ(t) >= cos²(Δh t)`; margin `P - cos²`.
    Fleming,
    /// `|P'| <= 2Δh √(P(1-P))`; margin `2Δh √(P(1-P)) - |P'|`.
    MandelstamTamm,
}

/// A grid point where the margin fell below `-tol`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub t: f64,
    /// `P` for the Fleming bound, `|P'|` for the Mandelstam–Tamm inequality.
    pub value: f64,
    /// `cos²(Δh t)`, or `2Δh √(P(1-P))`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub curve: DecayCurve,
    pub margins: Vec<f64>,
    pub min_margin: f64,
    pub argmin_t: f64,
    pub violations: Vec<Violation>,
    pub tol: f64,
}

impl BoundReport {
    fn from_margins(
        kind: BoundKind,
        curve: DecayCurve,
        margins: Vec<f64>,
        sides: Vec<(f64, f64)>,
        tol: f64,
    ) -> Self {
        let mut min_margin = f64::INFINITY;
        let mut argmin_t = 0.0;
        let mut violations = Vec::new();
        for (i, &m) in margins.iter().enumerate() {
            let t = curve.times[i];
            if m < min_margin {
                min_margin = m;
                argmin_t = t;
            }
            if m < -tol {
                violations.push(Violation { t, value: sides[i].0, bound: sides[i].1 });
            }
        }
        Self { kind, curve, margins, min_margin, argmin_t, violations, tol }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Uniform grid of `x = tΔh` over `[-π/2, π/2]`, mapped back to times.
///
/// For `Δh` at or below the stationary threshold the grid is taken in
/// `t` directly.
pub fn window_times(delta_h: f64, grid_points: usize) -> Vec<f64> {
    let scale = if delta_h > tol::STATIONARY_TOL { delta_h } else { 1.0 };
    linspace(-FRAC_PI_2, FRAC_PI_2, grid_points).into_iter().map(|x| x / scale).collect()
}

/// Samples `P_ρ` across the window and checks `P_ρ >= cos²(Δh t) - tol`.
pub fn verify_fleming(
    rho: &DensityOperator,
    h: &Hamiltonian,
    grid_points: usize,
    tol: f64,
) -> Result<BoundReport> {
    if grid_points < 2 {
        return Err(Error::DomainError(format!("grid_points must be at least 2, got {grid_points}")));
    }
    let delta_h = energy_spread(rho, h)?;
    let times = window_times(delta_h, grid_points);
    let curve = DecayCurve::evaluate(rho, h, &times)?;
    let effective = if delta_h > tol::STATIONARY_TOL { delta_h } else { 0.0 };
    let mut margins = Vec::with_capacity(curve.len());
    let mut sides = Vec::with_capacity(curve.len());
    for (&t, &p) in curve.times.iter().zip(&curve.values) {
        let b = fleming_bound(effective, t).unwrap_or(0.0);
        margins.push(p - b);
        sides.push((p, b));
    }
    Ok(BoundReport::from_margins(BoundKind::Fleming, curve, margins, sides, tol))
}

/// Checks `|P'(t)| <= 2Δh √(max(P(1-P), 0)) + tol` on `grid`, with `P'`
/// from the commutator formula.
pub fn verify_mt_inequality(
    rho: &DensityOperator,
    h: &Hamiltonian,
    grid: &[f64],
    tol: f64,
) -> Result<BoundReport> {
    let delta_h = energy_spread(rho, h)?;
    let rows = grid
        .par_iter()
        .map(|&t| Ok((survival_probability_mixed(rho, h, t)?, decay_derivative(rho, h, t)?)))
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let values: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let curve = DecayCurve::from_samples(grid.to_vec(), values, delta_h);
    let mut margins = Vec::with_capacity(rows.len());
    let mut sides = Vec::with_capacity(rows.len());
    for &(p, dp) in &rows {
        let rhs = 2.0 * delta_h * (p * (1.0 - p)).max(0.0).sqrt();
        margins.push(rhs - dp.abs());
        sides.push((dp.abs(), rhs));
    }
    Ok(BoundReport::from_margins(BoundKind::MandelstamTamm, curve, margins, sides, tol))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VerdictKind {
    /// `Δh = 0` or `P ≡ 1`.
    Stationary,
    /// `P_ρ > cos²(Δh t)` throughout the punctured window.
    StrictlyAbove,
    /// `P_ρ = cos²(Δh t)` for all `t`.
    Saturating,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub t: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DichotomyVerdict {
    pub kind: VerdictKind,
    pub delta_h: f64,
    /// Largest probe margin, for `StrictlyAbove` only.
    pub witness: Option<Witness>,
    /// Whether the intelligent-state characterization holds; only `true`
    /// for `Saturating`.
    pub structural_confirmation: bool,
}

/// Probe times `±kπ/(16Δh)` for `k = 1..=8`, covering the punctured window.
pub fn default_probes(delta_h: f64) -> Vec<f64> {
    let scale = if delta_h > tol::STATIONARY_TOL { delta_h } else { 1.0 };
    (1..=8)
        .flat_map(|k| {
            let x = k as f64 * FRAC_PI_2 / 8.0;
            [x / scale, -x / scale]
        })
        .collect()
}

/// Decides which alternative of the dichotomy `(ρ, h)` realizes.
///
/// Curve data alone never yields `Saturating`: equality at the probes
/// must be confirmed by [`is_intelligent`]. Equality at any single probe
/// must agree with the structural test, otherwise the result is
/// [`Error::InconsistentVerdict`].
pub fn classify_dichotomy(
    rho: &DensityOperator,
    h: &Hamiltonian,
    probe: &[f64],
    eq_tol: f64,
) -> Result<DichotomyVerdict> {
    let delta_h = energy_spread(rho, h)?;
    let stationary =
        DichotomyVerdict { kind: VerdictKind::Stationary, delta_h, witness: None, structural_confirmation: false };
    if delta_h <= tol::STATIONARY_TOL {
        return Ok(stationary);
    }
    if probe.is_empty() {
        return Err(Error::DomainError("probe set is empty".into()));
    }
    for &t in probe {
        let x = delta_h * t.abs();
        if x <= 0.0 || x > FRAC_PI_2 * (1.0 + tol::WINDOW_EDGE_REL) {
            return Err(Error::DomainError(format!("probe t = {t} outside 0 < Δh|t| <= π/2")));
        }
    }

    let values = probe
        .par_iter()
        .map(|&t| survival_probability_mixed(rho, h, t))
        .collect::<Result<Vec<f64>>>()?;
    if values.iter().all(|p| (p - 1.0).abs() <= tol::CONSTANT_CURVE_TOL) {
        return Ok(stationary);
    }

    let margins: Vec<f64> = probe
        .iter()
        .zip(&values)
        .map(|(&t, p)| p - fleming_bound(delta_h, t).expect("probe inside window"))
        .collect();
    let equal_all = margins.iter().all(|m| m.abs() <= eq_tol);
    let equal_any = margins.iter().any(|m| m.abs() <= eq_tol);
    let (structural, _) = is_intelligent(rho, h, tol::DETECTION_TOL)?;

    if equal_any != structural || (structural && !equal_all) {
        let worst = margins.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        return Err(Error::InconsistentVerdict(format!(
            "curve equality at some probe: {equal_any}, at all probes: {equal_all}, \
             structural test: {structural}, largest |margin| {worst:e}"
        )));
    }
    if structural {
        return Ok(DichotomyVerdict {
            kind: VerdictKind::Saturating,
            delta_h,
            witness: None,
            structural_confirmation: true,
        });
    }

    let (i, &margin) = margins
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("probe set is non-empty");
    Ok(DichotomyVerdict {
        kind: VerdictKind::StrictlyAbove,
        delta_h,
        witness: Some(Witness { t: probe[i], margin }),
        structural_confirmation: false,
    })
}

/// `arccos(√ε) / Δh`, the earliest time at which `P_ρ = ε` is possible.
pub fn passage_time_lower_bound(delta_h: f64, epsilon: f64) -> Result<f64> {
    if !delta_h.is_finite() || delta_h <= 0.0 {
        return Err(Error::DomainError(format!("Δh must be positive, got {delta_h}")));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::DomainError(format!("ε must lie in [0, 1], got {epsilon}")));
    }
    Ok(epsilon.sqrt().acos() / delta_h)
}

const MIN_SCAN_SAMPLES: usize = 1000;
const MAX_SCAN_SAMPLES: usize = 10_000;

/// Scan resolution: at least 1000 intervals, finer down to `tol_t` up to
/// a cap of 10 000.
pub fn scan_samples(t_max: f64, tol_t: f64) -> usize {
    let wanted = (t_max / tol_t).ceil();
    if wanted.is_finite() {
        (wanted as usize).clamp(MIN_SCAN_SAMPLES, MAX_SCAN_SAMPLES)
    } else {
        MAX_SCAN_SAMPLES
    }
}

/// Smallest `t ∈ (0, t_max]` with `P_ρ(t) <= ε`, or `None`.
///
/// A uniform scan brackets the first crossing, which is then refined by
/// bisection to `tol_t`. Local minima of the scan are refined on the
/// sign change of `P'`; a minimum within `1e-12` of `ε` counts as a
/// tangential passage at the minimizer, so double roots such as the
/// orthogonalization of an intelligent state are located exactly.
pub fn find_passage_time(
    rho: &DensityOperator,
    h: &Hamiltonian,
    epsilon: f64,
    t_max: f64,
    tol_t: f64,
) -> Result<Option<f64>> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::DomainError(format!("ε must lie in [0, 1], got {epsilon}")));
    }
    if !t_max.is_finite() || t_max <= 0.0 {
        return Err(Error::DomainError(format!("t_max must be positive, got {t_max}")));
    }
    if tol_t.is_nan() || tol_t <= 0.0 {
        return Err(Error::DomainError(format!("tol_t must be positive, got {tol_t}")));
    }
    let decay = SpectralDecay::new(rho, h)?;
    let delta_h = energy_spread(rho, h)?;

    let n = scan_samples(t_max, tol_t);
    let times = linspace(0.0, t_max, n + 1);
    let gap: Vec<f64> = times.iter().map(|&t| decay.value(t) - epsilon).collect();
    let g = |t: f64| decay.value(t) - epsilon;

    let mut found = None;
    for i in 1..=n {
        let next = (i + 1).min(n);
        if gap[i] <= 0.0 {
            let crossing = bisect_crossing(&g, times[i - 1], times[i], tol_t);
            let tangential = refine_minimum(&decay, times[i - 1], times[next])
                .filter(|&tm| g(tm) >= -tol::TOUCH_TOL);
            found = Some(tangential.unwrap_or(crossing));
            break;
        }
        if i < n && gap[i] < gap[i - 1] && gap[i] <= gap[i + 1] {
            if let Some(tm) = refine_minimum(&decay, times[i - 1], times[i + 1]) {
                let gm = g(tm);
                if gm.abs() <= tol::TOUCH_TOL {
                    found = Some(tm);
                    break;
                }
                if gm < 0.0 {
                    found = Some(bisect_crossing(&g, times[i - 1], tm, tol_t));
                    break;
                }
            }
        }
    }

    if let Some(t) = found {
        if delta_h > tol::STATIONARY_TOL {
            let bound = passage_time_lower_bound(delta_h, epsilon)?;
            if t + tol_t < bound {
                return Err(Error::PassageBelowBound { t, bound });
            }
        }
    }
    Ok(found)
}

/// Bisection for the first point with `g <= 0`, given `g(lo) > 0 >= g(hi)`.
fn bisect_crossing(g: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol_t: f64) -> f64 {
    while hi - lo > 0.5 * tol_t {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Minimizer of `P` inside `[lo, hi]` from the sign change of `P'`, if any.
fn refine_minimum(decay: &SpectralDecay, mut lo: f64, mut hi: f64) -> Option<f64> {
    if !(decay.derivative(lo) < 0.0 && decay.derivative(hi) > 0.0) {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if decay.derivative(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble;
    use crate::linalg::{ComplexMatrix, C64};
    use crate::states::{validate_density, PureState};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn intelligent_pair(scale: f64) -> (DensityOperator, Hamiltonian) {
        let phi = PureState::new(vec![re(FRAC_1_SQRT_2), re(FRAC_1_SQRT_2)]).unwrap();
        (phi.to_density(), Hamiltonian::diagonal(&[0.0, 2.0 * scale]))
    }

    fn mixed_intelligent() -> (DensityOperator, Hamiltonian) {
        let s = FRAC_1_SQRT_2;
        let psi1 = vec![re(s), re(0.), re(s), re(0.)];
        let psi2 = vec![re(0.), re(s), re(0.), re(s)];
        let m = &ComplexMatrix::outer(&psi1, &psi1).scale_real(0.75)
            + &ComplexMatrix::outer(&psi2, &psi2).scale_real(0.25);
        (validate_density(&m, tol::RANK_TOL).unwrap(), Hamiltonian::diagonal(&[0., 0., 2., 2.]))
    }

    fn stationary_pair() -> (DensityOperator, Hamiltonian) {
        let rho = validate_density(&ComplexMatrix::from_diagonal(&[0.7, 0.3, 0.0]), tol::RANK_TOL).unwrap();
        (rho, Hamiltonian::diagonal(&[1.0, 1.0, 4.0]))
    }

    #[test]
    fn fleming_bound_examples() {
        assert_eq!(fleming_bound(1.0, 0.0), Some(1.0));
        assert!(fleming_bound(1.0, PI / 2.0).unwrap() < 1e-30);
        assert_eq!(fleming_bound(1.0, 2.0), None);
        assert_eq!(fleming_bound(0.0, 1e6), Some(1.0));
        assert!((fleming_bound(2.0, -0.3).unwrap() - 0.6f64.cos().powi(2)).abs() < 1e-16);
    }

    #[test]
    fn verify_fleming_examples() {
        let (rho, h) = mixed_intelligent();
        let report = verify_fleming(&rho, &h, 201, tol::BOUND_TOL).unwrap();
        assert!(report.min_margin.abs() <= 1e-10);
        assert!(report.passed());
        assert_eq!(report.curve.times.len(), 201);
        assert!((report.curve.times[200] - PI / 2.0).abs() < 1e-15);

        let (rho, h) = stationary_pair();
        let report = verify_fleming(&rho, &h, 101, tol::BOUND_TOL).unwrap();
        assert!(report.margins.iter().all(|m| *m >= -1e-12));

        let mut rng = ChaCha20Rng::seed_from_u64(31);
        let raw = ensemble::random_orthonormal(&mut rng, 4, 2);
        let m = &ComplexMatrix::outer(&raw[0], &raw[0]).scale_real(0.6)
            + &ComplexMatrix::outer(&raw[1], &raw[1]).scale_real(0.4);
        let rho = validate_density(&m, tol::RANK_TOL).unwrap();
        let h = Hamiltonian::new(ensemble::random_hermitian(&mut rng, 4)).unwrap();
        let report = verify_fleming(&rho, &h, 201, tol::BOUND_TOL).unwrap();
        assert!(report.passed());
        // t = 0 pins the minimum margin at zero; away from it the margin is positive.
        let interior = report
            .margins
            .iter()
            .zip(&report.curve.times)
            .filter(|(_, t)| t.abs() > 1e-9)
            .map(|(m, _)| *m)
            .fold(f64::INFINITY, f64::min);
        assert!(interior > 0.0);

        assert!(matches!(verify_fleming(&rho, &h, 1, tol::BOUND_TOL), Err(Error::DomainError(_))));
    }

    #[test]
    fn mt_inequality_examples() {
        let (rho, h) = stationary_pair();
        let report = verify_mt_inequality(&rho, &h, &linspace(-2.0, 2.0, 21), 1e-9).unwrap();
        assert!(report.margins.iter().all(|m| m.abs() <= 1e-12));

        let (rho, h) = intelligent_pair(1.0);
        let t = PI / 4.0;
        let report = verify_mt_inequality(&rho, &h, &[t], 1e-9).unwrap();
        let v = report.violations.is_empty();
        assert!(v);
        assert!((decay_derivative(&rho, &h, t).unwrap().abs() - 1.0).abs() <= 1e-9);
        assert!(report.margins[0].abs() <= 1e-9);

        let mut rng = ChaCha20Rng::seed_from_u64(32);
        for dim in 2..=6 {
            let rho = ensemble::random_density(&mut rng, dim);
            let h = Hamiltonian::new(ensemble::random_hermitian(&mut rng, dim)).unwrap();
            let report = verify_mt_inequality(&rho, &h, &linspace(-4.0, 4.0, 81), 1e-9).unwrap();
            assert!(report.passed(), "min margin {}", report.min_margin);
        }
    }

    #[test]
    fn dichotomy_examples() {
        let (rho, h) = stationary_pair();
        let v = classify_dichotomy(&rho, &h, &default_probes(1.0), tol::EQ_TOL).unwrap();
        assert_eq!(v.kind, VerdictKind::Stationary);

        let (rho, h) = mixed_intelligent();
        let dh = energy_spread(&rho, &h).unwrap();
        let v = classify_dichotomy(&rho, &h, &default_probes(dh), tol::EQ_TOL).unwrap();
        assert_eq!(v.kind, VerdictKind::Saturating);
        assert!(v.structural_confirmation);

        let mut rng = ChaCha20Rng::seed_from_u64(33);
        let raw = ensemble::random_orthonormal(&mut rng, 4, 2);
        let m = &ComplexMatrix::outer(&raw[0], &raw[0]).scale_real(0.55)
            + &ComplexMatrix::outer(&raw[1], &raw[1]).scale_real(0.45);
        let rho = validate_density(&m, tol::RANK_TOL).unwrap();
        let h = Hamiltonian::new(ensemble::random_hermitian(&mut rng, 4)).unwrap();
        let dh = energy_spread(&rho, &h).unwrap();
        let v = classify_dichotomy(&rho, &h, &default_probes(dh), tol::EQ_TOL).unwrap();
        assert_eq!(v.kind, VerdictKind::StrictlyAbove);
        assert!(v.witness.unwrap().margin > 0.0);

        // Unequal split between two eigenvalues.
        let phi = PureState::new(vec![re(0.6f64.sqrt()), re(0.4f64.sqrt())]).unwrap();
        let h = Hamiltonian::diagonal(&[0.0, 2.0]);
        let rho = phi.to_density();
        let dh = energy_spread(&rho, &h).unwrap();
        let v = classify_dichotomy(&rho, &h, &default_probes(dh), tol::EQ_TOL).unwrap();
        assert_eq!(v.kind, VerdictKind::StrictlyAbove);

        let err = classify_dichotomy(&rho, &h, &[10.0], tol::EQ_TOL);
        assert!(matches!(err, Err(Error::DomainError(_))));
    }

    #[test]
    fn shift_invariance() {
        let mut rng = ChaCha20Rng::seed_from_u64(34);
        for dim in 2..=5 {
            let rho = ensemble::random_density(&mut rng, dim);
            let h = Hamiltonian::new(ensemble::random_hermitian(&mut rng, dim)).unwrap();
            let hs = h.shifted(3.7);
            let dh = energy_spread(&rho, &h).unwrap();
            assert!((dh - energy_spread(&rho, &hs).unwrap()).abs() <= 1e-10);
            for t in [-1.0, 0.4, 2.2] {
                let a = survival_probability_mixed(&rho, &h, t).unwrap();
                let b = survival_probability_mixed(&rho, &hs, t).unwrap();
                assert!((a - b).abs() <= 1e-10);
            }
            let probes = default_probes(dh);
            let va = classify_dichotomy(&rho, &h, &probes, tol::EQ_TOL).unwrap();
            let vb = classify_dichotomy(&rho, &hs, &probes, tol::EQ_TOL).unwrap();
            assert_eq!(va.kind, vb.kind);
        }
    }

    #[test]
    fn passage_lower_bound_examples() {
        assert!((passage_time_lower_bound(1.0, 0.0).unwrap() - PI / 2.0).abs() < 1e-15);
        assert_eq!(passage_time_lower_bound(1.0, 1.0).unwrap(), 0.0);
        assert!((passage_time_lower_bound(2.0, 0.5).unwrap() - PI / 8.0).abs() < 1e-15);
        assert!(passage_time_lower_bound(0.0, 0.5).is_err());
        assert!(passage_time_lower_bound(1.0, 1.5).is_err());
        assert!(passage_time_lower_bound(1.0, -0.1).is_err());
    }

    #[test]
    fn passage_time_examples() {
        let (rho, h) = intelligent_pair(1.0);
        let t = find_passage_time(&rho, &h, 0.0, PI, 1e-9).unwrap().unwrap();
        assert!((t - PI / 2.0).abs() <= 1e-9, "{t}");

        let (rho, h) = intelligent_pair(3.0);
        let t = find_passage_time(&rho, &h, 0.0, 2.0, 1e-9).unwrap().unwrap();
        assert!((t - PI / 6.0).abs() <= 1e-9, "{t}");

        let (rho, h) = stationary_pair();
        assert_eq!(find_passage_time(&rho, &h, 0.5, 10.0, 1e-9).unwrap(), None);

        assert!(find_passage_time(&rho, &h, 2.0, 10.0, 1e-9).is_err());
        assert!(find_passage_time(&rho, &h, 0.5, -1.0, 1e-9).is_err());
    }

    #[test]
    fn passage_time_matches_dense_scan() {
        let mut rng = ChaCha20Rng::seed_from_u64(35);
        let mut checked = 0;
        for _ in 0..20 {
            let phi = PureState::new(ensemble::random_unit_vector(&mut rng, 3)).unwrap();
            let rho = phi.to_density();
            let h = Hamiltonian::new(ensemble::random_hermitian(&mut rng, 3)).unwrap();
            let (eps, t_max, tol_t) = (0.5, 2.0, 1e-9);
            let found = find_passage_time(&rho, &h, eps, t_max, tol_t).unwrap();
            // Dense oracle: step 1e-5, matrix route.
            let step = 1e-5;
            let mut oracle = None;
            let mut t = step;
            while t <= t_max {
                if survival_probability_mixed(&rho, &h, t).unwrap() <= eps {
                    oracle = Some(t);
                    break;
                }
                t += step;
            }
            match (found, oracle) {
                (Some(a), Some(b)) => {
                    assert!((a - b).abs() <= step + tol_t, "{a} vs {b}");
                    checked += 1;
                }
                (None, None) => {}
                other => panic!("scan and oracle disagree: {other:?}"),
            }
        }
        assert!(checked >= 3);
    }
}
