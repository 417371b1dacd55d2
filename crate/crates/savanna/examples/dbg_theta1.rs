use savanna::front::{theta1_bisect, FrontParams};
use savanna::rates::PowerLawSpec;
fn main() {
    let (g, h) = PowerLawSpec::new(3.0, 0.5).unwrap().to_rates(60).unwrap();
    for spacing in [0.05, 0.025] {
        let p = FrontParams { spacing, ..FrontParams::default() };
        let t0 = std::time::Instant::now();
        let res = theta1_bisect(&g, &h, 6.0, 7.0, 1e-3, &p).unwrap();
        println!("h={spacing}: theta1 = {:.5} ({} evals, {:.1}s)", res.theta1, res.evaluations.len(), t0.elapsed().as_secs_f64());
    }
}
