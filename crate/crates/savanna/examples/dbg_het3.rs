use savanna::config::ModelSpec;
use savanna::grid::ScalarField;
use savanna::ide::Coefficients;
use savanna::lattice::{InitialCondition, LatticeState};
use savanna::rates::HeterogeneityField;
fn main() {
    let t1 = 6.5132;
    let (g, h) = ModelSpec::power(3.0, 0.5).build().unwrap();
    let f = HeterogeneityField::two_stripe(4, (0.5 * t1, 1.0), (2.0 * t1, 1.0)).unwrap();
    println!("field at (0.25, 0.5) = {:?}  (0.75, 0.5) = {:?}", f.at((0.25, 0.5)), f.at((0.75, 0.5)));
    let profile = ScalarField::from_fn(4.0, 0.05, |x, _| if x >= 2.0 { 0.95 } else { 0.0 }).unwrap();
    let mut st = LatticeState::new(
        20, 4, g, h,
        &Coefficients::Field(f),
        &InitialCondition::Profile(profile),
        1,
    ).unwrap();
    for t in [1.0, 3.0, 6.0, 10.0] {
        st.run(t, &[]).unwrap();
        let snap = st.snapshot();
        println!(
            "t={t}: grass half {:.4}, forest half {:.4}",
            snap.density_in(0, 0, 40, 80),
            snap.density_in(40, 0, 40, 80)
        );
    }
}
