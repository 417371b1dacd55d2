//! Convergence of lattice coarse densities to the nonlocal limit dynamics
//! as the dispersal scale grows.

use crate::error::Result;
use crate::grid::ScalarField;
use crate::ide::{Coefficients, IdeSolver};
use crate::lattice::{coarse_density, InitialCondition, LatticeState};
use crate::rates::BernsteinRate;
use rayon::prelude::*;

/// Sup-tile errors at one dispersal scale.
#[derive(Debug, Clone)]
pub struct HydroRow {
    pub dispersal: u32,
    pub per_seed_sup: Vec<f64>,
    pub median_sup: f64,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Sup over coarse tiles of |tile density - limit prediction| where the
/// prediction is the limit field averaged over the tile's site positions.
pub fn sup_tile_error(
    state_snapshot: &crate::lattice::Snapshot,
    dispersal: u32,
    gamma: f64,
    limit: &ScalarField,
) -> Result<f64> {
    let coarse = coarse_density(state_snapshot, dispersal, gamma)?;
    let tile = coarse.tile_sites;
    let l = dispersal as f64;
    let mut sup = 0.0_f64;
    for tj in 0..coarse.tiles_per_side {
        for ti in 0..coarse.tiles_per_side {
            let mut expected = 0.0;
            for j in tj * tile..(tj + 1) * tile {
                for i in ti * tile..(ti + 1) * tile {
                    expected += limit.interp(i as f64 / l, j as f64 / l);
                }
            }
            expected /= (tile * tile) as f64;
            sup = sup.max((coarse.fraction(ti, tj) - expected).abs());
        }
    }
    Ok(sup)
}

/// For each dispersal scale, run seeded lattice replicas from independent
/// Bernoulli sites with the profile's success probabilities, and measure
/// the sup-tile distance to the limit dynamics at time `t`.
#[allow(clippy::too_many_arguments)]
pub fn hydro_check(
    dispersals: &[u32],
    side_units: u32,
    g: &BernsteinRate,
    h: &BernsteinRate,
    coeffs: &Coefficients,
    u0: &ScalarField,
    t: f64,
    gamma: f64,
    seeds: &[u64],
    limit_spacing: f64,
) -> Result<Vec<HydroRow>> {
    // One limit solve serves every scale and seed.
    let template = ScalarField::new(side_units as f64, limit_spacing)?;
    let u0_limit = ScalarField::from_fn(side_units as f64, limit_spacing, |x, y| {
        u0.interp(x, y).clamp(0.0, 1.0)
    })?;
    let solver = IdeSolver::new(&template, coeffs, g.clone(), h.clone())?;
    let limit = solver.run(&u0_limit, t, solver.max_step())?;

    let mut rows = Vec::with_capacity(dispersals.len());
    for &l in dispersals {
        let per_seed_sup: Vec<f64> = seeds
            .par_iter()
            .map(|&seed| -> Result<f64> {
                let mut st = LatticeState::new(
                    l,
                    side_units,
                    g.clone(),
                    h.clone(),
                    coeffs,
                    &InitialCondition::Profile(u0.clone()),
                    seed,
                )?;
                let snaps = st.run(t, &[t])?;
                sup_tile_error(&snaps[0], l, gamma, &limit)
            })
            .collect::<Result<_>>()?;
        rows.push(HydroRow { dispersal: l, median_sup: median(&per_seed_sup), per_seed_sup });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rates::PowerLawSpec;

    fn model() -> (BernsteinRate, BernsteinRate) {
        PowerLawSpec::new(3.0, 0.5).unwrap().to_rates(60).unwrap()
    }

    fn plateau_profile(side: f64) -> ScalarField {
        ScalarField::from_fn(side, 0.05, |x, y| {
            let c = side / 2.0;
            if (x - c).abs() < 1.0 && (y - c).abs() < 1.0 {
                0.9
            } else {
                0.05
            }
        })
        .unwrap()
    }

    #[test]
    fn vacant_initial_state_has_zero_error() {
        let (g, h) = model();
        let coeffs = Coefficients::Constant { a: 5.0, b: 1.0 };
        let u0 = ScalarField::constant(2.0, 0.1, 0.0).unwrap();
        let rows =
            hydro_check(&[10, 20], 2, &g, &h, &coeffs, &u0, 2.0, 0.25, &[1, 2, 3], 0.1).unwrap();
        for row in rows {
            assert_eq!(row.median_sup, 0.0);
        }
    }

    #[test]
    fn time_zero_error_is_sampling_noise() {
        let (g, h) = model();
        let coeffs = Coefficients::Constant { a: 5.0, b: 1.0 };
        let u0 = ScalarField::constant(2.0, 0.1, 0.5).unwrap();
        let rows = hydro_check(&[20], 2, &g, &h, &coeffs, &u0, 0.0, 0.25, &[4, 5, 6], 0.1).unwrap();
        // Tile side snaps to 10 sites: binomial noise scale 0.05, sup over
        // 16 tiles stays within ~4 sigma.
        assert!(rows[0].median_sup < 0.2, "sup {}", rows[0].median_sup);
        assert!(rows[0].median_sup > 0.0);
    }

    #[test]
    fn sup_error_shrinks_with_dispersal() {
        let (g, h) = model();
        let theta = 2.0 * crate::meanfield::theta0(&PowerLawSpec::new(3.0, 0.5).unwrap()).unwrap();
        let coeffs = Coefficients::Constant { a: theta, b: 1.0 };
        let u0 = plateau_profile(4.0);
        let rows = hydro_check(
            &[10, 20],
            4,
            &g,
            &h,
            &coeffs,
            &u0,
            3.0,
            0.25,
            &[11, 12, 13],
            0.05,
        )
        .unwrap();
        assert!(
            rows[1].median_sup < rows[0].median_sup,
            "L=20 error {} !< L=10 error {}",
            rows[1].median_sup,
            rows[0].median_sup
        );
    }
}
