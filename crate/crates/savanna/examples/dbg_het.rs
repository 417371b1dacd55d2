use savanna::hetero::*;
use savanna::rates::HeterogeneityField;
fn main() {
    let t1 = 6.5132;
    let f = HeterogeneityField::two_stripe(16, (0.5 * t1, 1.0), (2.0 * t1, 1.0)).unwrap();
    let map = region_partition(&f, t1, 0.5, 32, 4.0).unwrap();
    for c in &map.components {
        println!("component {}: {:?}, {} cells, mean ratio {:.2}", c.id, c.label, c.cell_count, c.mean_ratio);
    }
    println!("boundaries: {}", map.boundaries.len());
    let spec = SeedSpec {
        forest_density: 0.9, grass_density: 0.0,
        forest_half_width: 0.75, grass_half_width: 0.75, background: 0.0,
    };
    let seeded = build_h3_initial(&map, &spec).unwrap();
    for p in &seeded.placed {
        println!("placed seed for component {} at {:?}", p.component, p.center);
    }
    let prof = &seeded.profile;
    println!("profile sum = {}", prof.values.iter().sum::<f64>());
    println!("profile at (3.0, 2.0) = {}", prof.interp(3.0, 2.0));
    println!("profile at (1.0, 2.0) = {}", prof.interp(1.0, 2.0));
    println!("profile at (2.75, 0.75) = {}", prof.interp(2.75, 0.75));

    // Run the lattice briefly and report stripe densities.
    use savanna::config::ModelSpec;
    use savanna::ide::Coefficients;
    use savanna::lattice::{InitialCondition, LatticeState};
    let (g, h) = ModelSpec::power(3.0, 0.5).build().unwrap();
    let mut st = LatticeState::new(
        20, 4, g, h,
        &Coefficients::Field(f.clone()),
        &InitialCondition::Profile(seeded.profile.clone()),
        1,
    ).unwrap();
    println!("t=0 density {}", st.density());
    for t in [1.0, 3.0, 6.0, 10.0] {
        st.run(t, &[]).unwrap();
        let snap = st.snapshot();
        let left = snap.density_in(0, 0, 40, 80);
        let right = snap.density_in(40, 0, 40, 80);
        println!("t={t}: density {:.4} (grass half {:.4}, forest half {:.4})", st.density(), left, right);
    }
}
// appended second stage
