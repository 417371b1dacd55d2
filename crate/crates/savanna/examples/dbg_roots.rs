use savanna::meanfield::fixed_points;
use savanna::rates::PowerLawSpec;
fn main() {
    for m in [20, 40, 80] {
        let (g, h) = PowerLawSpec::new(3.0, 0.5).unwrap().to_rates(m).unwrap();
        match fixed_points(&g, &h, 5.0, 1.0) {
            Ok(r) => {
                println!("m={m}: label {:?}", r.case_label);
                for p in &r.points {
                    println!("  u={:.12} {:?} res={:.2e}", p.u, p.stability, p.residual);
                }
            }
            Err(e) => println!("m={m}: ERR {e}"),
        }
    }
}
