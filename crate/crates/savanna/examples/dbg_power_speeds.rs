use savanna::front::{front_speed, FrontParams};
use savanna::rates::PowerLawSpec;
fn main() {
    let (g, h) = PowerLawSpec::new(3.0, 0.5).unwrap().to_rates(60).unwrap();
    let p = FrontParams::default();
    for theta in [3.6, 3.8, 4.0, 4.5, 5.0, 6.0, 7.0] {
        match front_speed(&g, &h, theta, 1.0, &p) {
            Ok(tr) => println!("rho({theta}) = {:+.5}  residual {:.2e}", tr.speed, tr.residual),
            Err(e) => println!("rho({theta}) ERR: {e}"),
        }
    }
}
