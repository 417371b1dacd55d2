use savanna::front::{front_speed, FrontParams};
use savanna::rates::BernsteinRate;
fn main() {
    let q = BernsteinRate::new(1.0, vec![0.0, 1.0]).unwrap();
    for (label, p) in [
        ("win16 L40 h0.05", FrontParams::default()),
        ("win16 L30 h0.1", FrontParams { domain_len: 30.0, spacing: 0.1, ..FrontParams::default() }),
        ("win24 L30 h0.1", FrontParams { domain_len: 30.0, spacing: 0.1, t_window: 24.0, ..FrontParams::default() }),
    ] {
        print!("{label}: ");
        for theta in [0.96, 0.99, 1.0, 1.01, 1.04] {
            let tr = front_speed(&q, &q, theta, 1.0, &p).unwrap();
            print!("rho({theta})={:+.5} ", tr.speed);
        }
        println!();
    }
}
