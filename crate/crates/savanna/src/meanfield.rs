//! Well-mixed limit of the two-type dynamics: case classification, fixed
//! points with stability, the bistability threshold, and trajectories of
//!
//! ```text
//! du/dt = A (1-u) G(u) - B u H(1-u) = u (1-u) [A g(u) - B h(1-u)]
//! ```
//!
//! where `g(u) = G(u)/u` and `h(y) = H(y)/y` are the per-capita responses.

use crate::error::{Error, Result};
use crate::rates::{check_unimodal, BernsteinRate, PowerLawSpec};

/// Stability tag for a fixed point, decided from the flow direction on each
/// side rather than from derivative formulas so mixture responses of any
/// degree are handled uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
    /// Flow does not change sign across the point (double root) or vanishes
    /// identically next to it.
    Marginal,
}

/// Exponent regime of the power-law model, by boundary stability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseLabel {
    /// alpha < 1, beta < 1: both boundaries unstable.
    Case1,
    /// alpha > 1, beta > 1: both boundaries stable.
    Case2,
    /// alpha > 1 > beta: 0 stable, 1 unstable.
    Case3,
    /// beta > 1 > alpha: 0 unstable, 1 stable.
    Case4,
    /// Boundary pattern of Case 3/4 but no pair of interior fixed points at
    /// this coefficient ratio.
    NoBistability,
}

#[derive(Debug, Clone, Copy)]
pub struct FixedPoint {
    pub u: f64,
    pub stability: Stability,
    /// |A g(u) - B h(1-u)| at the reported point (0 for the boundaries).
    pub residual: f64,
}

/// Fixed points of the mean-field flow together with the case diagnosis.
#[derive(Debug, Clone)]
pub struct FixedPointReport {
    /// All fixed points in increasing order; 0 and 1 are always present.
    pub points: Vec<FixedPoint>,
    pub case_label: CaseLabel,
    /// Location of the balance-ratio maximum.
    pub w: f64,
    /// Coefficient ratio above which two interior fixed points exist
    /// (finite maxima only).
    pub theta0: Option<f64>,
}

impl FixedPointReport {
    pub fn interior(&self) -> impl Iterator<Item = &FixedPoint> {
        self.points.iter().filter(|p| p.u > 0.0 && p.u < 1.0)
    }

    /// The lower/upper interior pair `(v1, v2)` when both are present.
    pub fn interior_pair(&self) -> Option<(f64, f64)> {
        let int: Vec<f64> = self.interior().map(|p| p.u).collect();
        match int.as_slice() {
            [v1, v2] => Some((*v1, *v2)),
            _ => None,
        }
    }
}

/// Classify the power-law exponent regime and the boundary stability that
/// follows from it. Exponents exactly 1 are degenerate and rejected.
pub fn classify_cases(spec: &PowerLawSpec) -> Result<(CaseLabel, Stability, Stability)> {
    let (alpha, beta) = (spec.alpha, spec.beta);
    if alpha == 1.0 || beta == 1.0 {
        return Err(Error::invalid("exponent exactly 1 is degenerate"));
    }
    // As u -> 0 the bracket A u^(alpha-1) - B (1-u)^(beta-1) is dominated by
    // the birth term iff alpha < 1; the mirrored argument covers u -> 1.
    let origin = if alpha < 1.0 { Stability::Unstable } else { Stability::Stable };
    let one = if beta < 1.0 { Stability::Unstable } else { Stability::Stable };
    let label = match (alpha > 1.0, beta > 1.0) {
        (false, false) => CaseLabel::Case1,
        (true, true) => CaseLabel::Case2,
        (true, false) => CaseLabel::Case3,
        (false, true) => CaseLabel::Case4,
    };
    Ok((label, origin, one))
}

/// Location of the maximum of `u^(alpha-1) (1-u)^(1-beta)` for Case 3.
pub fn ratio_argmax(spec: &PowerLawSpec) -> f64 {
    (spec.alpha - 1.0) / (spec.alpha - spec.beta)
}

/// Bistability threshold for the Case-3 power model:
/// `theta0 = (alpha-beta)^(alpha-beta) / ((alpha-1)^(alpha-1) (1-beta)^(1-beta))`,
/// equivalently the reciprocal of the peak of `u^(alpha-1)(1-u)^(1-beta)`.
pub fn theta0(spec: &PowerLawSpec) -> Result<f64> {
    let (alpha, beta) = (spec.alpha, spec.beta);
    if !(alpha > 1.0 && beta < 1.0 && beta > 0.0) {
        return Err(Error::invalid(format!(
            "theta0 requires alpha > 1 > beta > 0, got ({alpha}, {beta})"
        )));
    }
    let d = alpha - beta;
    Ok(d.powf(d) / ((alpha - 1.0).powf(alpha - 1.0) * (1.0 - beta).powf(1.0 - beta)))
}

/// Mean-field drift `A (1-u) G(u) - B u H(1-u)`.
pub fn drift(g: &BernsteinRate, h: &BernsteinRate, a: f64, b: f64, u: f64) -> f64 {
    a * (1.0 - u) * g.eval_in01(u) - b * u * h.eval_in01(1.0 - u)
}

const SCAN_STEP: f64 = 1e-4;
const SIDE_PROBE: f64 = 1e-6;

/// Locate all fixed points of the mean-field flow for coefficients `(a, b)`.
///
/// Interior roots of `A g(u) = B h(1-u)` are found by a sign scan on a 1e-4
/// grid followed by bisection; the unimodality screen guarantees the scan is
/// exhaustive (at most two sign changes), and a violated screen is refused
/// with a diagnostic rather than silently mis-rooted.
pub fn fixed_points(
    g: &BernsteinRate,
    h: &BernsteinRate,
    a: f64,
    b: f64,
) -> Result<FixedPointReport> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::invalid(format!("coefficients must be positive, got ({a}, {b})")));
    }
    let screen = check_unimodal(g, h, 0.001)?;
    if !screen.is_unimodal {
        return Err(Error::runtime(
            "balance ratio g(u)/h(1-u) is not unimodal; the fixed-point scan \
             cannot guarantee completeness for this response pair",
        ));
    }

    let balance = |u: f64| a * g.per_capita_in01(u) - b * h.per_capita_in01(1.0 - u);

    // Sign scan over the interior grid.
    let n = (1.0 / SCAN_STEP) as usize;
    let mut roots: Vec<(f64, f64)> = Vec::new();
    let mut prev_u = SCAN_STEP;
    let mut prev_d = balance(prev_u);
    let mut grid_max = (prev_u, prev_d);
    let mut grid_min = (prev_u, prev_d);
    for i in 2..n {
        let u = i as f64 * SCAN_STEP;
        let d = balance(u);
        if d > grid_max.1 {
            grid_max = (u, d);
        }
        if d < grid_min.1 {
            grid_min = (u, d);
        }
        if d == 0.0 {
            roots.push((u, 0.0));
        } else if prev_d != 0.0 && d.signum() != prev_d.signum() {
            roots.push(bisect_root(&balance, prev_u, u));
        }
        prev_u = u;
        prev_d = d;
    }

    // Tangency: no sign change but the balance grazes zero from one side.
    if roots.is_empty() {
        for (u, d) in [grid_max, grid_min] {
            if d != 0.0 && d.abs() <= 1e-10 {
                roots.push((u, d.abs()));
            }
        }
        if grid_max.1 == 0.0 {
            // Identically zero balance (degenerate family): report the grid
            // argmax as the single marginal point.
            roots.push((grid_max.0, 0.0));
        }
    }
    roots.dedup_by(|x, y| (x.0 - y.0).abs() < SCAN_STEP / 2.0);

    let flow = |u: f64| drift(g, h, a, b, u);
    let side_sign = |u: f64| {
        let f = flow(u.clamp(SIDE_PROBE, 1.0 - SIDE_PROBE));
        if f > 1e-14 {
            1
        } else if f < -1e-14 {
            -1
        } else {
            0
        }
    };

    let mut points = Vec::with_capacity(roots.len() + 2);
    let origin_stab = match side_sign(SIDE_PROBE) {
        -1 => Stability::Stable,
        1 => Stability::Unstable,
        _ => Stability::Marginal,
    };
    points.push(FixedPoint { u: 0.0, stability: origin_stab, residual: 0.0 });
    for &(u, residual) in &roots {
        let left = side_sign(u - SIDE_PROBE);
        let right = side_sign(u + SIDE_PROBE);
        let stability = match (left, right) {
            (1, -1) => Stability::Stable,
            (-1, 1) => Stability::Unstable,
            _ => Stability::Marginal,
        };
        points.push(FixedPoint { u, stability, residual });
    }
    let one_stab = match side_sign(1.0 - SIDE_PROBE) {
        1 => Stability::Stable,
        -1 => Stability::Unstable,
        _ => Stability::Marginal,
    };
    points.push(FixedPoint { u: 1.0, stability: one_stab, residual: 0.0 });

    let case_label = match (origin_stab, one_stab) {
        (Stability::Unstable, Stability::Unstable) => CaseLabel::Case1,
        (Stability::Stable, Stability::Stable) => CaseLabel::Case2,
        (Stability::Stable, Stability::Unstable) | (Stability::Unstable, Stability::Stable) => {
            let bistable_pair = roots.len() == 2;
            if bistable_pair {
                if origin_stab == Stability::Stable {
                    CaseLabel::Case3
                } else {
                    CaseLabel::Case4
                }
            } else {
                CaseLabel::NoBistability
            }
        }
        _ => CaseLabel::NoBistability,
    };

    let theta0 = if screen.max_value.is_finite() && screen.max_value > 0.0 {
        Some(1.0 / screen.max_value)
    } else {
        None
    };

    Ok(FixedPointReport { points, case_label, w: screen.argmax, theta0 })
}

fn bisect_root(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid.abs() < 1e-13 || (hi - lo) < 1e-15 {
            return (mid, fmid.abs());
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    let mid = 0.5 * (lo + hi);
    (mid, f(mid).abs())
}

/// Integrate the mean-field flow with classical fourth-order steps.
///
/// The step bound keeps the per-step change about 1% of the fastest rate
/// scale, which also keeps the discrete path monotone between fixed points.
pub fn ode_trajectory(
    g: &BernsteinRate,
    h: &BernsteinRate,
    a: f64,
    b: f64,
    u0: f64,
    t_end: f64,
    dt: f64,
) -> Result<Vec<(f64, f64)>> {
    if !(0.0..=1.0).contains(&u0) {
        return Err(Error::invalid(format!("u0 = {u0} outside [0,1]")));
    }
    if !(t_end >= 0.0) {
        return Err(Error::invalid(format!("t_end = {t_end} must be nonnegative")));
    }
    let dt_max = 1e-2 / (a * g.lambda() + b * h.lambda());
    if !(dt > 0.0) || dt > dt_max {
        return Err(Error::invalid(format!(
            "dt = {dt} exceeds the stability bound {dt_max:.3e} for these rates"
        )));
    }
    let f = |u: f64| drift(g, h, a, b, u);
    let mut path = Vec::with_capacity((t_end / dt).ceil() as usize + 1);
    let mut t = 0.0;
    let mut u = u0;
    path.push((t, u));
    while t < t_end {
        let step = dt.min(t_end - t);
        let k1 = f(u);
        let k2 = f((u + 0.5 * step * k1).clamp(0.0, 1.0));
        let k3 = f((u + 0.5 * step * k2).clamp(0.0, 1.0));
        let k4 = f((u + step * k3).clamp(0.0, 1.0));
        u = (u + step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).clamp(0.0, 1.0);
        t += step;
        path.push((t, u));
    }
    Ok(path)
}

/// Largest admissible step for `ode_trajectory` with these parameters.
pub fn max_step(g: &BernsteinRate, h: &BernsteinRate, a: f64, b: f64) -> f64 {
    1e-2 / (a * g.lambda() + b * h.lambda())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;

    /// Independent maximization oracle: coarse scan then golden-section
    /// refinement of `u^(alpha-1) (1-u)^(1-beta)`.
    fn peak_oracle(alpha: f64, beta: f64) -> (f64, f64) {
        let f = |u: f64| u.powf(alpha - 1.0) * (1.0 - u).powf(1.0 - beta);
        let mut best = (0.0, 0.0);
        for i in 1..10_000 {
            let u = i as f64 / 10_000.0;
            if f(u) > best.1 {
                best = (u, f(u));
            }
        }
        let (mut lo, mut hi) = (best.0 - 2e-4, best.0 + 2e-4);
        let phi = 0.5 * (5.0_f64.sqrt() - 1.0);
        for _ in 0..200 {
            let x1 = hi - phi * (hi - lo);
            let x2 = lo + phi * (hi - lo);
            if f(x1) < f(x2) {
                lo = x1;
            } else {
                hi = x2;
            }
        }
        let w = 0.5 * (lo + hi);
        (w, f(w))
    }

    /// Independent root oracle on the exact power form: bisection of
    /// `theta u^(alpha-1) (1-u)^(1-beta) = 1` on each side of the peak.
    fn power_roots_oracle(alpha: f64, beta: f64, theta: f64) -> Option<(f64, f64)> {
        let f = |u: f64| theta * u.powf(alpha - 1.0) * (1.0 - u).powf(1.0 - beta) - 1.0;
        let (w, peak) = peak_oracle(alpha, beta);
        if theta * peak <= 1.0 {
            return None;
        }
        // f < 0 near both endpoints, f(w) > 0.
        let v2 = {
            let mut lo = w;
            let mut hi = 1.0 - 1e-12;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let v1 = {
            let mut lo = 1e-12;
            let mut hi = w;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        Some((v1, v2))
    }

    #[test]
    fn classification_matches_exponent_regime() {
        let case = |a, b| classify_cases(&PowerLawSpec::new(a, b).unwrap()).unwrap();
        assert_eq!(
            case(0.5, 0.5),
            (CaseLabel::Case1, Stability::Unstable, Stability::Unstable)
        );
        assert_eq!(case(2.0, 3.0), (CaseLabel::Case2, Stability::Stable, Stability::Stable));
        assert_eq!(case(3.0, 0.5), (CaseLabel::Case3, Stability::Stable, Stability::Unstable));
        assert_eq!(case(0.5, 3.0), (CaseLabel::Case4, Stability::Unstable, Stability::Stable));
        assert!(classify_cases(&PowerLawSpec::new(1.0, 0.5).unwrap()).is_err());
    }

    #[test]
    fn theta0_reference_values() {
        let spec = PowerLawSpec::new(3.0, 0.5).unwrap();
        let w = ratio_argmax(&spec);
        assert_eq!(w, 0.8);
        let peak = w.powf(2.0) * (1.0 - w).powf(0.5);
        assert!((peak - 0.286217).abs() < 1e-5);
        let t0 = theta0(&spec).unwrap();
        assert!((t0 - 1.0 / peak).abs() < 1e-12);
        assert!((t0 - 3.49386).abs() < 1e-3);

        let t0 = theta0(&PowerLawSpec::new(2.0, 0.5).unwrap()).unwrap();
        assert!((t0 - 2.598076211353316).abs() < 1e-10);
    }

    #[test]
    fn theta0_agrees_with_maximization_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let alpha = rng.gen_range(1.05..6.0);
            let beta = rng.gen_range(0.05..0.95);
            let spec = PowerLawSpec::new(alpha, beta).unwrap();
            let (w_hat, peak) = peak_oracle(alpha, beta);
            let closed = theta0(&spec).unwrap();
            assert!(
                (closed - 1.0 / peak).abs() < 1e-8,
                "alpha={alpha} beta={beta}: {closed} vs {}",
                1.0 / peak
            );
            assert!((ratio_argmax(&spec) - w_hat).abs() < 1e-6);
        }
    }

    #[test]
    fn theta0_rejects_wrong_case() {
        assert!(theta0(&PowerLawSpec::new(0.5, 0.5).unwrap()).is_err());
        assert!(theta0(&PowerLawSpec::new(2.0, 3.0).unwrap()).is_err());
    }

    #[test]
    fn linear_model_has_no_interior_points() {
        let lin = BernsteinRate::new(1.0, vec![1.0]).unwrap();
        let report = fixed_points(&lin, &lin, 2.0, 1.0).unwrap();
        assert_eq!(report.interior().count(), 0);
        assert_eq!(report.points[0].stability, Stability::Unstable);
        assert_eq!(report.points.last().unwrap().stability, Stability::Stable);
        let report = fixed_points(&lin, &lin, 1.0, 2.0).unwrap();
        assert_eq!(report.interior().count(), 0);
        assert_eq!(report.points[0].stability, Stability::Stable);
    }

    #[test]
    fn bistable_power_model_fixed_points() {
        let spec = PowerLawSpec::new(3.0, 0.5).unwrap();
        let (g, h) = spec.to_rates(60).unwrap();
        let theta = 5.0;
        let report = fixed_points(&g, &h, theta, 1.0).unwrap();
        assert_eq!(report.case_label, CaseLabel::Case3);
        let (v1, v2) = report.interior_pair().expect("two interior points");
        assert!(v1 < 0.8 && 0.8 < v2, "roots {v1}, {v2} do not bracket 0.8");
        for p in report.interior() {
            assert!(p.residual < 1e-10, "residual {}", p.residual);
        }
        let stabs: Vec<Stability> = report.points.iter().map(|p| p.stability).collect();
        assert_eq!(
            stabs,
            vec![Stability::Stable, Stability::Unstable, Stability::Stable, Stability::Unstable]
        );
        // Mixture roots track the exact power-law roots.
        let (v1x, v2x) = power_roots_oracle(3.0, 0.5, theta).unwrap();
        assert!((v1 - v1x).abs() < 0.02, "{v1} vs oracle {v1x}");
        assert!((v2 - v2x).abs() < 0.02, "{v2} vs oracle {v2x}");
    }

    #[test]
    fn subthreshold_ratio_has_no_interior_points() {
        let (g, h) = PowerLawSpec::new(3.0, 0.5).unwrap().to_rates(60).unwrap();
        let report = fixed_points(&g, &h, 2.0, 1.0).unwrap();
        assert_eq!(report.interior().count(), 0);
        assert_eq!(report.case_label, CaseLabel::NoBistability);
    }

    #[test]
    fn mixture_roots_converge_to_power_roots() {
        // theta must stay below sqrt(m) for the smallest degree, or the
        // mixture's finite h(0) erases the upper root.
        let theta = 4.2;
        let (v1x, v2x) = power_roots_oracle(3.0, 0.5, theta).unwrap();
        let mut errs = Vec::new();
        for m in [20, 40, 80] {
            let (g, h) = PowerLawSpec::new(3.0, 0.5).unwrap().to_rates(m).unwrap();
            let (v1, v2) = fixed_points(&g, &h, theta, 1.0)
                .unwrap()
                .interior_pair()
                .expect("two roots");
            errs.push((v1 - v1x).abs().max((v2 - v2x).abs()));
        }
        assert!(
            errs[1] <= errs[0] + 1e-12 && errs[2] <= errs[1] + 1e-12,
            "errors not non-increasing: {errs:?}"
        );
    }

    #[test]
    fn trajectory_is_constant_at_fixed_point() {
        let (g, h) = PowerLawSpec::new(3.0, 0.5).unwrap().to_rates(60).unwrap();
        let report = fixed_points(&g, &h, 5.0, 1.0).unwrap();
        let (_, v2) = report.interior_pair().unwrap();
        let dt = max_step(&g, &h, 5.0, 1.0);
        let path = ode_trajectory(&g, &h, 5.0, 1.0, v2, 10.0, dt).unwrap();
        for (_, u) in path {
            assert!((u - v2).abs() < 1e-8);
        }
    }

    #[test]
    fn trajectory_splits_at_the_threshold_point() {
        let (g, h) = PowerLawSpec::new(3.0, 0.5).unwrap().to_rates(60).unwrap();
        let (v1, v2) = fixed_points(&g, &h, 5.0, 1.0).unwrap().interior_pair().unwrap();
        let dt = max_step(&g, &h, 5.0, 1.0);
        let below = ode_trajectory(&g, &h, 5.0, 1.0, v1 - 0.01, 60.0, dt).unwrap();
        assert!(below.last().unwrap().1 < 1e-3);
        let above = ode_trajectory(&g, &h, 5.0, 1.0, v1 + 0.01, 60.0, dt).unwrap();
        assert!((above.last().unwrap().1 - v2).abs() < 1e-6);
    }

    #[test]
    fn trajectory_rejects_oversized_step() {
        let (g, h) = PowerLawSpec::new(3.0, 0.5).unwrap().to_rates(60).unwrap();
        let dt = max_step(&g, &h, 5.0, 1.0);
        assert!(ode_trajectory(&g, &h, 5.0, 1.0, 0.5, 1.0, dt * 1.5).is_err());
    }

    #[test]
    fn trajectories_stay_monotone_between_fixed_points() {
        let (g, h) = PowerLawSpec::new(3.0, 0.5).unwrap().to_rates(60).unwrap();
        let report = fixed_points(&g, &h, 5.0, 1.0).unwrap();
        let (v1, v2) = report.interior_pair().unwrap();
        let dt = max_step(&g, &h, 5.0, 1.0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let u0: f64 = rng.gen_range(0.0..1.0);
            let path = ode_trajectory(&g, &h, 5.0, 1.0, u0, 30.0, dt).unwrap();
            let increasing = path.last().unwrap().1 >= u0;
            for w in path.windows(2) {
                let du = w[1].1 - w[0].1;
                if increasing {
                    assert!(du >= -1e-9, "overshoot at u0={u0}");
                } else {
                    assert!(du <= 1e-9, "overshoot at u0={u0}");
                }
            }
            // No excursion past the basin's attracting point.
            let last = path.last().unwrap().1;
            if u0 > v1 && u0 < v2 {
                assert!(last <= v2 + 1e-9);
            }
        }
    }
}
