//! Exact-versus-RVB comparison and finite-size scaling of the GGM.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ggm::{compute_ggm, Strategy};
use crate::lattice::{Boundary, LadderGeometry};
use crate::rvb::build_rvb_enumerated;
use crate::spectral::{ground_state, HamiltonianSpec, LanczosOptions};

/// Largest ladder [`compare_exact_rvb`] accepts.
pub const MAX_COMPARE_SITES: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareOptions {
    /// Divide `|E_rvb − E0|` by the number of sites instead of `|E0|`.
    pub delta_e_per_site: bool,
    pub strategy: Strategy,
    pub lanczos: LanczosOptions,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            delta_e_per_site: false,
            strategy: Strategy::Full,
            lanczos: LanczosOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRecord {
    pub legs: usize,
    pub rungs: usize,
    pub boundary: Boundary,
    pub n: usize,
    pub j: f64,
    pub fidelity: f64,
    pub delta_e: f64,
    pub delta_e_per_site: bool,
    pub exact_energy: f64,
    pub rvb_energy: f64,
    pub ggm_exact: f64,
    pub ggm_rvb: f64,
    pub strategy: Strategy,
    pub degeneracy_warning: bool,
}

/// Fidelity, energy gap and GGMs of the exact ground state against the
/// RVB state of the same ladder, Heisenberg coupling `j`.
pub fn compare_exact_rvb(geometry: &LadderGeometry, j: f64) -> Result<ComparisonRecord> {
    compare_exact_rvb_with(geometry, j, &CompareOptions::default())
}

pub fn compare_exact_rvb_with(geometry: &LadderGeometry, j: f64, opts: &CompareOptions) -> Result<ComparisonRecord> {
    let n = geometry.n();
    if n > MAX_COMPARE_SITES {
        return Err(Error::resource(format!(
            "comparisons are limited to {MAX_COMPARE_SITES} sites ({n} given)"
        )));
    }
    let rvb = build_rvb_enumerated(geometry)?.normalized()?;
    let spec = HamiltonianSpec::new(geometry.clone(), j, 1.0)?;
    let gs = ground_state(&spec, &opts.lanczos)?;
    let fidelity = gs.state.fidelity(&rvb)?.min(1.0);
    let rvb_energy = spec.operator().expectation(&rvb)?;
    let denom = if opts.delta_e_per_site { n as f64 } else { gs.energy.abs() };
    let delta_e = (rvb_energy - gs.energy).abs() / denom;
    Ok(ComparisonRecord {
        legs: geometry.legs(),
        rungs: geometry.rungs(),
        boundary: geometry.boundary(),
        n,
        j,
        fidelity,
        delta_e,
        delta_e_per_site: opts.delta_e_per_site,
        exact_energy: gs.energy,
        rvb_energy,
        ggm_exact: compute_ggm(&gs.state, opts.strategy, Some(geometry))?.value,
        ggm_rvb: compute_ggm(&rvb, opts.strategy, Some(geometry))?.value,
        strategy: opts.strategy,
        degeneracy_warning: gs.degeneracy_warning,
    })
}

/// Direction in which the data approach their asymptote.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Trend {
    /// Rising towards `G_c`: `G = G_c − k n^{−x}`.
    #[serde(rename = "+")]
    Increasing,
    /// Falling towards `G_c`: `G = G_c + k n^{−x}`.
    #[serde(rename = "-")]
    Decreasing,
}

impl Trend {
    fn coefficient(self) -> f64 {
        match self {
            Trend::Increasing => -1.0,
            Trend::Decreasing => 1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Trend::Increasing => "+",
            Trend::Decreasing => "-",
        }
    }
}

impl std::str::FromStr for Trend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "increasing" => Ok(Trend::Increasing),
            "-" | "decreasing" => Ok(Trend::Decreasing),
            other => Err(Error::domain(format!("unknown trend {other:?}, expected + or -"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub g_c: f64,
    pub k: f64,
    pub x: f64,
    pub sign: Trend,
    /// Root-mean-square residual over the fitted points.
    pub residual: f64,
    pub points_used: Vec<(usize, f64)>,
    /// Constant data: `k = 0`, `x = 0`, `G_c` the common value.
    pub degenerate: bool,
    pub converged: bool,
}

impl ScalingFit {
    pub fn predict(&self, n: f64) -> f64 {
        if self.degenerate {
            return self.g_c;
        }
        self.g_c + self.sign.coefficient() * self.k * n.powf(-self.x)
    }
}

const FIT_STEP_TOL: f64 = 1e-12;
const FIT_MAX_ITER: usize = 1000;
const FLAT_TOL: f64 = 1e-12;

fn detect_trend(points: &[(usize, f64)]) -> Option<Trend> {
    let steps: Vec<f64> = points.windows(2).map(|w| w[1].1 - w[0].1).collect();
    if steps.iter().all(|&d| d >= -FLAT_TOL) {
        Some(Trend::Increasing)
    } else if steps.iter().all(|&d| d <= FLAT_TOL) {
        Some(Trend::Decreasing)
    } else {
        None
    }
}

struct Problem<'a> {
    ns: &'a [f64],
    gs: &'a [f64],
    s: f64,
}

impl Problem<'_> {
    fn residuals(&self, p: &Vector3<f64>) -> Vec<f64> {
        let k = p[1].exp();
        self.ns
            .iter()
            .zip(self.gs)
            .map(|(&n, &g)| p[0] + self.s * k * n.powf(-p[2]) - g)
            .collect()
    }

    fn cost(&self, p: &Vector3<f64>) -> f64 {
        self.residuals(p).iter().map(|r| r * r).sum()
    }

    /// Levenberg-damped Gauss-Newton from `p`.
    fn solve(&self, mut p: Vector3<f64>) -> (Vector3<f64>, f64, bool) {
        let mut cost = self.cost(&p);
        let mut lambda = 1e-3;
        for _ in 0..FIT_MAX_ITER {
            let r = self.residuals(&p);
            let k = p[1].exp();
            let mut jtj = Matrix3::zeros();
            let mut jtr = Vector3::zeros();
            for (i, &n) in self.ns.iter().enumerate() {
                let t = self.s * k * n.powf(-p[2]);
                let row = Vector3::new(1.0, t, -t * n.ln());
                jtj += row * row.transpose();
                jtr += row * r[i];
            }
            let mut accepted = false;
            while lambda < 1e16 {
                let mut a = jtj;
                for d in 0..3 {
                    a[(d, d)] += lambda * jtj[(d, d)].max(1e-300);
                }
                let Some(step) = a.lu().solve(&(-jtr)) else {
                    lambda *= 10.0;
                    continue;
                };
                let trial = p + step;
                let c = self.cost(&trial);
                if c.is_finite() && c <= cost {
                    let done = step.norm() < FIT_STEP_TOL * (1.0 + p.norm()) || cost - c <= 1e-30;
                    p = trial;
                    cost = c;
                    lambda = (lambda / 3.0).max(1e-12);
                    accepted = true;
                    if done {
                        return (p, cost, true);
                    }
                    break;
                }
                lambda *= 4.0;
            }
            if !accepted {
                // no downhill step left at any damping: a stationary point
                return (p, cost, true);
            }
        }
        (p, cost, false)
    }
}

/// Least-squares fit of `G(n) = G_c ∓ k n^{−x}` with `k > 0`.
///
/// The trend comes from the data unless `sign_hint` is given; the fit is
/// multi-started over `x ∈ {0.25, 0.5, 1, 2}` and `G_c ∈ {min, max}` and the
/// lowest residual wins (ties go to the smaller `x`).
pub fn fit_scaling(points: &[(usize, f64)], sign_hint: Option<Trend>) -> Result<ScalingFit> {
    if points.len() < 4 {
        return Err(Error::domain(format!("a scaling fit needs at least 4 points ({} given)", points.len())));
    }
    let mut pts = points.to_vec();
    pts.sort_by_key(|p| p.0);
    if pts.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::domain("scaling fit points must have distinct n"));
    }
    if pts.iter().any(|p| p.0 == 0 || !p.1.is_finite()) {
        return Err(Error::domain("scaling fit points need n > 0 and finite values"));
    }
    let (lo, hi) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.1), hi.max(p.1)));
    if hi - lo <= FLAT_TOL {
        let mean = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
        let rms = (pts.iter().map(|p| (p.1 - mean).powi(2)).sum::<f64>() / pts.len() as f64).sqrt();
        return Ok(ScalingFit {
            g_c: mean,
            k: 0.0,
            x: 0.0,
            sign: sign_hint.unwrap_or(Trend::Decreasing),
            residual: rms,
            points_used: pts,
            degenerate: true,
            converged: true,
        });
    }
    let sign = match sign_hint.or_else(|| detect_trend(&pts)) {
        Some(s) => s,
        None => {
            return Err(Error::Ambiguity(
                "data are not monotone in n; pass the trend explicitly".into(),
            ))
        }
    };
    let ns: Vec<f64> = pts.iter().map(|p| p.0 as f64).collect();
    let gs: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let prob = Problem {
        ns: &ns,
        gs: &gs,
        s: sign.coefficient(),
    };
    let range = hi - lo;
    let mut best: Option<(f64, Vector3<f64>, bool)> = None;
    for &x0 in &[0.25, 0.5, 1.0, 2.0] {
        for &gc0 in &[lo, hi] {
            // best k for these (G_c, x), kept positive
            let (num, den) = ns.iter().zip(&gs).fold((0.0, 0.0), |(a, b), (&n, &g)| {
                let t = n.powf(-x0);
                (a + prob.s * (g - gc0) * t, b + t * t)
            });
            let k0 = (num / den).max(1e-6 * range);
            let (p, cost, ok) = prob.solve(Vector3::new(gc0, k0.ln(), x0));
            let better = match &best {
                None => true,
                Some((bc, bp, _)) => cost < *bc * (1.0 - 1e-12) || (cost <= *bc * (1.0 + 1e-12) && p[2] < bp[2]),
            };
            if better && cost.is_finite() {
                best = Some((cost, p, ok));
            }
        }
    }
    let (cost, p, converged) = best.ok_or(Error::Convergence {
        iterations: FIT_MAX_ITER,
        best_residual: f64::INFINITY,
    })?;
    Ok(ScalingFit {
        g_c: p[0],
        k: p[1].exp(),
        x: p[2],
        sign,
        residual: (cost / pts.len() as f64).sqrt(),
        points_used: pts,
        degenerate: false,
        converged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityRow {
    pub legs: usize,
    pub g_c: f64,
    pub k: f64,
    pub x: f64,
    pub sign: Trend,
    pub residual: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityReport {
    pub odd: Vec<ParityRow>,
    pub even: Vec<ParityRow>,
    /// Largest odd and even leg counts, where the gaps are taken.
    pub compared_legs: (usize, usize),
    pub g_c_gap: f64,
    pub x_gap: f64,
}

impl ParityReport {
    /// Plain-text tables, one per parity, then the gaps.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (title, rows) in [("odd legs", &self.odd), ("even legs", &self.even)] {
            let _ = writeln!(out, "# {title}");
            let _ = writeln!(out, "legs\tG_c\tk\tx\tsign\trms\tdegenerate");
            for r in rows {
                let _ = writeln!(
                    out,
                    "{}\t{:.10}\t{:.6e}\t{:.6}\t{}\t{:.3e}\t{}",
                    r.legs,
                    r.g_c,
                    r.k,
                    r.x,
                    r.sign.symbol(),
                    r.residual,
                    r.degenerate
                );
            }
        }
        let _ = writeln!(
            out,
            "# gaps at L = {} (odd) vs L = {} (even): |dG_c| = {:.6e}, |dx| = {:.6e}",
            self.compared_legs.0, self.compared_legs.1, self.g_c_gap, self.x_gap
        );
        out
    }
}

/// Splits per-leg fits by parity and compares the largest odd and even leg
/// counts.
pub fn odd_even_report(fits: &BTreeMap<usize, ScalingFit>) -> Result<ParityReport> {
    let row = |(&legs, f): (&usize, &ScalingFit)| ParityRow {
        legs,
        g_c: f.g_c,
        k: f.k,
        x: f.x,
        sign: f.sign,
        residual: f.residual,
        degenerate: f.degenerate,
    };
    let odd: Vec<ParityRow> = fits.iter().filter(|(l, _)| *l % 2 == 1).map(row).collect();
    let even: Vec<ParityRow> = fits.iter().filter(|(l, _)| *l % 2 == 0).map(row).collect();
    if odd.len() < 2 || even.len() < 2 {
        return Err(Error::domain(format!(
            "the parity report needs fits for two odd and two even leg counts ({} odd, {} even given)",
            odd.len(),
            even.len()
        )));
    }
    let (o, e) = (odd.last().unwrap(), even.last().unwrap());
    Ok(ParityReport {
        compared_legs: (o.legs, e.legs),
        g_c_gap: (o.g_c - e.g_c).abs(),
        x_gap: (o.x - e.x).abs(),
        odd,
        even,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_ladder;
    use proptest::prelude::{prop_assert, proptest, ProptestConfig};

    fn synthetic(gc: f64, k: f64, x: f64, s: f64) -> Vec<(usize, f64)> {
        [8usize, 12, 16, 20, 24, 32]
            .iter()
            .map(|&n| (n, gc + s * k * (n as f64).powf(-x)))
            .collect()
    }

    #[test]
    fn recovers_synthetic_parameters() {
        let fit = fit_scaling(&synthetic(0.40, 0.30, 1.2, 1.0), None).unwrap();
        assert_eq!(fit.sign, Trend::Decreasing);
        assert!((fit.g_c - 0.40).abs() < 1e-6, "{fit:?}");
        assert!((fit.k - 0.30).abs() < 1e-6, "{fit:?}");
        assert!((fit.x - 1.2).abs() < 1e-6, "{fit:?}");
        assert!(fit.residual < 1e-10 && fit.converged);
    }

    #[test]
    fn rising_data_fit_below_the_asymptote() {
        let fit = fit_scaling(&synthetic(0.5, 0.8, 0.7, -1.0), None).unwrap();
        assert_eq!(fit.sign, Trend::Increasing);
        assert!((fit.g_c - 0.5).abs() < 1e-6 && (fit.x - 0.7).abs() < 1e-6, "{fit:?}");
        assert!((fit.predict(16.0) - (0.5 - 0.8 * 16f64.powf(-0.7))).abs() < 1e-9);
    }

    #[test]
    fn falling_data_reports_minus() {
        let fit = fit_scaling(&[(4, 0.9), (8, 0.7), (12, 0.65), (16, 0.62)], None).unwrap();
        assert_eq!(fit.sign, Trend::Decreasing);
        assert_eq!(serde_json::to_value(fit.sign).unwrap(), "-");
    }

    #[test]
    fn constant_data_is_degenerate() {
        let fit = fit_scaling(&[(4, 0.5), (6, 0.5), (8, 0.5), (10, 0.5)], None).unwrap();
        assert!(fit.degenerate);
        assert_eq!(fit.k, 0.0);
        assert_eq!(fit.g_c, 0.5);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(fit_scaling(&[(4, 0.1), (6, 0.2), (8, 0.3)], None), Err(Error::Domain(_))));
        let zigzag = [(4, 0.1), (6, 0.3), (8, 0.2), (10, 0.4)];
        assert!(matches!(fit_scaling(&zigzag, None), Err(Error::Ambiguity(_))));
        assert!(fit_scaling(&zigzag, Some(Trend::Increasing)).is_ok());
        assert!(matches!(fit_scaling(&[(4, 0.1), (4, 0.2), (8, 0.3), (9, 0.3)], None), Err(Error::Domain(_))));
    }

    #[test]
    fn fits_are_bit_identical_on_repeat() {
        let pts = [(4, 0.61), (8, 0.55), (12, 0.531), (16, 0.524), (20, 0.5201)];
        let a = fit_scaling(&pts, None).unwrap();
        let b = fit_scaling(&pts, None).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn fitted_curve_is_monotone_in_its_direction(gc in 0.1f64..0.9, k in 0.05f64..2.0, x in 0.3f64..2.5, up in proptest::bool::ANY) {
            let s = if up { -1.0 } else { 1.0 };
            let fit = fit_scaling(&synthetic(gc, k, x, s), None).unwrap();
            let ns: Vec<f64> = (8..=32).map(|n| n as f64).collect();
            for w in ns.windows(2) {
                let d = fit.predict(w[1]) - fit.predict(w[0]);
                let ok = if up { d >= -1e-12 } else { d <= 1e-12 };
                prop_assert!(ok);
            }
            prop_assert!((fit.x - x).abs() < 1e-5);
        }
    }

    fn fake_fit(gc: f64, x: f64) -> ScalingFit {
        ScalingFit {
            g_c: gc,
            k: 0.1,
            x,
            sign: Trend::Increasing,
            residual: 0.0,
            points_used: Vec::new(),
            degenerate: false,
            converged: true,
        }
    }

    #[test]
    fn parity_report_gaps() {
        let mut fits = BTreeMap::new();
        for l in 1..=4 {
            fits.insert(l, fake_fit(0.4, 1.0));
        }
        let r = odd_even_report(&fits).unwrap();
        assert_eq!(r.g_c_gap, 0.0);
        assert_eq!(r.x_gap, 0.0);
        assert_eq!(r.compared_legs, (3, 4));
        assert!(r.to_text().contains("# odd legs"));
        fits.remove(&2);
        assert!(matches!(odd_even_report(&fits), Err(Error::Domain(_))));
    }

    #[test]
    fn singlet_comparison_is_perfect() {
        let g = build_ladder(1, 2, Boundary::Open).unwrap();
        let r = compare_exact_rvb(&g, 1.0).unwrap();
        assert!((r.fidelity - 1.0).abs() < 1e-12);
        assert!(r.delta_e.abs() < 1e-12);
        assert!((r.ggm_exact - 0.5).abs() < 1e-12);
    }

    #[test]
    fn plaquette_comparison_is_perfect() {
        let g = build_ladder(2, 2, Boundary::Open).unwrap();
        let r = compare_exact_rvb(&g, 1.0).unwrap();
        assert!((r.fidelity - 1.0).abs() < 1e-9);
        assert!(r.delta_e < 1e-9);
    }

    #[test]
    fn comparison_is_variational_and_symmetric() {
        let g = build_ladder(2, 4, Boundary::Open).unwrap();
        let r = compare_exact_rvb(&g, 1.0).unwrap();
        assert!(r.rvb_energy >= r.exact_energy - 1e-10);
        assert!(r.fidelity > 0.0 && r.fidelity <= 1.0);
        let per_site = compare_exact_rvb_with(
            &g,
            1.0,
            &CompareOptions {
                delta_e_per_site: true,
                ..CompareOptions::default()
            },
        )
        .unwrap();
        assert!((per_site.delta_e * 8.0 - r.delta_e * r.exact_energy.abs()).abs() < 1e-9);
        assert!(matches!(compare_exact_rvb(&build_ladder(2, 3, Boundary::Open).unwrap(), 1.0), Err(Error::Domain(_))));
        assert!(matches!(compare_exact_rvb(&build_ladder(2, 10, Boundary::Open).unwrap(), 1.0), Err(Error::Resource(_))));
    }
}
