use savanna::config::ModelSpec;
use savanna::grid::ScalarField;
use savanna::ide::{Coefficients, IdeSolver};
use savanna::rates::HeterogeneityField;
fn main() {
    let t1 = 6.5132;
    let (g, h) = ModelSpec::power(3.0, 0.5).build().unwrap();
    let f = HeterogeneityField::two_stripe(16, (0.5 * t1, 1.0), (2.0 * t1, 1.0)).unwrap();
    // Forest stripe is x in [2, 4); seed it fully at 0.9.
    let u0 = ScalarField::from_fn(4.0, 0.05, |x, _| if x >= 2.0 { 0.9 } else { 0.0 }).unwrap();
    let solver = IdeSolver::new(&u0, &Coefficients::Field(f), g, h).unwrap();
    let mut u = u0;
    for t in [5.0, 10.0, 20.0, 40.0] {
        u = solver.run(&u, t, solver.max_step()).unwrap();
        let n = u.cells_per_side();
        let mut grass = 0.0;
        let mut forest = 0.0;
        for j in 0..n {
            for i in 0..n {
                if i < n / 2 { grass += u.get(i, j); } else { forest += u.get(i, j); }
            }
        }
        let half = (n * n / 2) as f64;
        println!("t={t}: grass mean {:.4}, forest mean {:.4}", grass / half, forest / half);
    }
    // Profile across the stripe at the end.
    let n = u.cells_per_side();
    print!("cross-section u(x): ");
    for i in (0..n).step_by(4) {
        print!("{:.2} ", u.get(i, n / 2));
    }
    println!();
}
