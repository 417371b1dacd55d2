use savanna::dual::{collision_probability, log_log_slope};
use savanna::ide::Coefficients;
use savanna::rates::BernsteinRate;
fn main() {
    let coeffs = Coefficients::Constant { a: 1.0, b: 1.0 };
    let g = BernsteinRate::new(0.45, vec![0.0, 1.0]).unwrap();
    let h = BernsteinRate::new(0.45, vec![0.0, 1.0]).unwrap();
    for seed in [1u64, 42, 777, 2024, 31415] {
        let ests = collision_probability(&[10, 20, 40, 80], 2, 2.0, &g, &h, &coeffs, None, 4000, seed).unwrap();
        let pts: Vec<(f64, f64)> = ests.iter().map(|e| (e.dispersal as f64, e.p_collision)).collect();
        let slope = log_log_slope(&pts, 1.0 / 8000.0);
        print!("seed {seed}: slope {slope:.3}, p = [");
        for e in &ests { print!("{:.3} ", e.p_collision); }
        println!("], mean sizes [{:.1} {:.1} {:.1} {:.1}]", ests[0].mean_size, ests[1].mean_size, ests[2].mean_size, ests[3].mean_size);
    }
}
