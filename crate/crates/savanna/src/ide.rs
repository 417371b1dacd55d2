//! Nonlocal reaction dynamics on the torus: the dispersal-scale limit of the
//! lattice model. Cell values react to the disk average of the field,
//!
//! ```text
//! du/dt = A(x) (1-u) G(ubar) - B(x) u H(1-ubar),
//! ```
//!
//! with no spatial derivative, so explicit stepping is limited by the
//! reaction rates alone.

use crate::error::{Error, Result};
use crate::grid::{DiskKernel, ScalarField};
use crate::rates::{BernsteinRate, HeterogeneityField};
use rayon::prelude::*;

/// Coefficients of the reaction term: homogeneous constants or a
/// continental-scale field sampled at `x / side`.
#[derive(Debug, Clone)]
pub enum Coefficients {
    Constant { a: f64, b: f64 },
    Field(HeterogeneityField),
}

impl Coefficients {
    pub fn at(&self, x: (f64, f64), side: f64) -> (f64, f64) {
        match self {
            Coefficients::Constant { a, b } => (*a, *b),
            Coefficients::Field(f) => f.at((x.0 / side, x.1 / side)),
        }
    }

    pub fn max_values(&self) -> (f64, f64) {
        match self {
            Coefficients::Constant { a, b } => (*a, *b),
            Coefficients::Field(f) => f.max_samples(),
        }
    }
}

/// Fourth-order explicit solver bound to one grid geometry and one model.
pub struct IdeSolver {
    kernel: DiskKernel,
    a: Vec<f64>,
    b: Vec<f64>,
    g: BernsteinRate,
    h: BernsteinRate,
    n: usize,
    dt_max: f64,
}

impl IdeSolver {
    pub fn new(
        template: &ScalarField,
        coeffs: &Coefficients,
        g: BernsteinRate,
        h: BernsteinRate,
    ) -> Result<Self> {
        let kernel = DiskKernel::for_spacing(template.spacing())?;
        let n = template.cells_per_side();
        let mut a = vec![0.0; n * n];
        let mut b = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..n {
                let (av, bv) = coeffs.at(template.center(i, j), template.side());
                a[j * n + i] = av;
                b[j * n + i] = bv;
            }
        }
        let (a_max, b_max) = coeffs.max_values();
        let dt_max = 0.1 / (a_max * g.lambda() + b_max * h.lambda());
        Ok(Self { kernel, a, b, g, h, n, dt_max })
    }

    /// Largest admissible time step for these rates.
    pub fn max_step(&self) -> f64 {
        self.dt_max
    }

    pub fn kernel(&self) -> &DiskKernel {
        &self.kernel
    }

    fn rhs(&self, u: &ScalarField) -> Vec<f64> {
        let ubar = self.kernel.average(u);
        let n = self.n;
        let mut out = vec![0.0; n * n];
        out.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
            for (i, slot) in row.iter_mut().enumerate() {
                let idx = j * n + i;
                let uv = u.values[idx].clamp(0.0, 1.0);
                let m = ubar.values[idx];
                *slot = self.a[idx] * (1.0 - uv) * self.g.eval_in01(m)
                    - self.b[idx] * uv * self.h.eval_in01(1.0 - m);
            }
        });
        out
    }

    /// One classical fourth-order step of size `dt` (caller keeps `dt`
    /// within `max_step`).
    pub fn step(&self, u: &ScalarField, dt: f64) -> ScalarField {
        let combine = |base: &ScalarField, k: &[f64], w: f64| {
            let mut out = base.clone();
            out.values
                .par_iter_mut()
                .zip(k.par_iter())
                .for_each(|(v, kv)| *v = (*v + w * kv).clamp(0.0, 1.0));
            out
        };
        let k1 = self.rhs(u);
        let u2 = combine(u, &k1, 0.5 * dt);
        let k2 = self.rhs(&u2);
        let u3 = combine(u, &k2, 0.5 * dt);
        let k3 = self.rhs(&u3);
        let u4 = combine(u, &k3, dt);
        let k4 = self.rhs(&u4);
        let mut out = u.clone();
        out.values
            .par_iter_mut()
            .enumerate()
            .for_each(|(idx, v)| {
                *v = (*v + dt / 6.0 * (k1[idx] + 2.0 * k2[idx] + 2.0 * k3[idx] + k4[idx]))
                    .clamp(0.0, 1.0);
            });
        out.time = u.time + dt;
        out
    }

    fn check_dt(&self, dt: f64) -> Result<()> {
        if !(dt > 0.0) || dt > self.dt_max * (1.0 + 1e-12) {
            return Err(Error::invalid(format!(
                "dt = {dt} exceeds the reaction-rate bound {:.3e}",
                self.dt_max
            )));
        }
        Ok(())
    }

    /// Advance `u0` to `t_end`; the final partial step is shortened so the
    /// end time is hit exactly.
    pub fn run(&self, u0: &ScalarField, t_end: f64, dt: f64) -> Result<ScalarField> {
        self.check_dt(dt)?;
        let mut u = u0.clone();
        let mut remaining = t_end - u.time;
        if remaining < 0.0 {
            return Err(Error::invalid("t_end lies before the field's time stamp"));
        }
        while remaining > 1e-12 {
            let step = dt.min(remaining);
            u = self.step(&u, step);
            remaining -= step;
        }
        Ok(u)
    }

    /// Advance while collecting the field at each requested time (sorted).
    pub fn run_snapshots(
        &self,
        u0: &ScalarField,
        times: &[f64],
        dt: f64,
    ) -> Result<Vec<ScalarField>> {
        self.check_dt(dt)?;
        let mut sorted = times.to_vec();
        sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut out = Vec::with_capacity(sorted.len());
        let mut u = u0.clone();
        for t in sorted {
            u = self.run(&u, t, dt)?;
            out.push(u.clone());
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meanfield;
    use crate::rates::PowerLawSpec;
    use rand::Rng;
    use rand::SeedableRng;

    fn bistable_model() -> (BernsteinRate, BernsteinRate) {
        PowerLawSpec::new(3.0, 0.5).unwrap().to_rates(60).unwrap()
    }

    #[test]
    fn constant_field_reduces_to_mean_field_ode() {
        let (g, h) = bistable_model();
        let (a, b) = (5.0, 1.0);
        let u0 = ScalarField::constant(4.0, 0.1, 0.35).unwrap();
        let solver = IdeSolver::new(&u0, &Coefficients::Constant { a, b }, g.clone(), h.clone())
            .unwrap();
        let dt_ide = solver.max_step() * 0.5;
        let dt_ode = meanfield::max_step(&g, &h, a, b);
        let mut u = u0;
        for step in 1..=10 {
            let t = step as f64 * 0.5;
            u = solver.run(&u, t, dt_ide).unwrap();
            let ode = meanfield::ode_trajectory(&g, &h, a, b, 0.35, t, dt_ode).unwrap();
            let target = ode.last().unwrap().1;
            for &v in &u.values {
                assert!((v - target).abs() < 1e-7, "t={t}: {v} vs {target}");
            }
        }
    }

    #[test]
    fn absorbing_states_are_invariant() {
        let (g, h) = bistable_model();
        let coeffs = Coefficients::Constant { a: 5.0, b: 1.0 };
        for value in [0.0, 1.0] {
            let u0 = ScalarField::constant(2.0, 0.1, value).unwrap();
            let solver = IdeSolver::new(&u0, &coeffs, g.clone(), h.clone()).unwrap();
            let u = solver.run(&u0, 3.0, solver.max_step()).unwrap();
            for &v in &u.values {
                assert_eq!(v, value);
            }
        }
    }

    #[test]
    fn values_stay_in_unit_interval() {
        let (g, h) = bistable_model();
        let coeffs = Coefficients::Field(
            HeterogeneityField::two_stripe(8, (2.0, 1.0), (8.0, 1.0)).unwrap(),
        );
        let u0 = ScalarField::from_fn(4.0, 0.1, |x, y| {
            0.5 + 0.5 * ((x * 1.3).sin() * (y * 0.7).cos())
        })
        .unwrap();
        let solver = IdeSolver::new(&u0, &coeffs, g, h).unwrap();
        let mut u = u0;
        for _ in 0..40 {
            u = solver.step(&u, solver.max_step());
            assert!(u.min() >= 0.0 && u.max() <= 1.0);
        }
    }

    #[test]
    fn comparison_principle_preserves_order() {
        let (g, h) = bistable_model();
        let coeffs = Coefficients::Constant { a: 5.0, b: 1.0 };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..3 {
            let freq = rng.gen_range(0.5..2.0);
            let lo = ScalarField::from_fn(2.0, 0.1, |x, y| {
                0.4 * (0.5 + 0.5 * ((x * freq).sin() * (y * 1.1).cos()))
            })
            .unwrap();
            let mut hi = lo.clone();
            for v in hi.values.iter_mut() {
                *v = (*v + rng.gen_range(0.0..0.3)).min(1.0);
            }
            let solver = IdeSolver::new(&lo, &coeffs, g.clone(), h.clone()).unwrap();
            let dt = solver.max_step() * 0.5;
            let mut a = lo;
            let mut b = hi;
            for _ in 0..20 {
                a = solver.step(&a, dt);
                b = solver.step(&b, dt);
                for (x, y) in a.values.iter().zip(&b.values) {
                    assert!(x <= &(y + 1e-10), "order broken: {x} > {y}");
                }
            }
        }
    }

    #[test]
    fn deterministic_across_runs() {
        let (g, h) = bistable_model();
        let coeffs = Coefficients::Constant { a: 4.0, b: 1.0 };
        let u0 = ScalarField::from_fn(2.0, 0.1, |x, y| (x * y / 4.0).min(1.0)).unwrap();
        let solver = IdeSolver::new(&u0, &coeffs, g, h).unwrap();
        let r1 = solver.run(&u0, 2.0, solver.max_step()).unwrap();
        let r2 = solver.run(&u0, 2.0, solver.max_step()).unwrap();
        assert_eq!(r1.values, r2.values);
    }

    #[test]
    fn rejects_oversized_step() {
        let (g, h) = bistable_model();
        let u0 = ScalarField::constant(2.0, 0.1, 0.5).unwrap();
        let solver =
            IdeSolver::new(&u0, &Coefficients::Constant { a: 5.0, b: 1.0 }, g, h).unwrap();
        assert!(solver.run(&u0, 1.0, solver.max_step() * 2.0).is_err());
    }
}
